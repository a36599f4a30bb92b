"""Fast self-checks of the core invariants, runnable without the test tree."""
from __future__ import annotations

from typing import Callable

import numpy as np
from scipy.integrate import trapezoid

from .experiments import fit_slope
from .field import Circle, GridSpec, UnionOfCircles, integrate
from .potential import CW, g_antiderivative, sqrt_two_w, w, w_prime
from .profile import solve_eta
from .reaction import ForcingSpec, ReactionForm
from .reference import CircleLaw, circle_extinction_time, circle_extinction_time_rk4
from .stepper import SimConfig, run

__all__ = ["CHECKS", "run_checks"]


def _potential() -> float:
    s = np.linspace(-0.5, 1.5, 2001)
    # complex-step derivative is exact to roundoff for polynomials
    err = np.max(np.abs(w(s + 1e-20j).imag / 1e-20 - w_prime(s)))
    inner = np.linspace(0.0, 1.0, 20001)
    cw = trapezoid(sqrt_two_w(inner), inner)
    return max(err, abs(cw - CW), abs(float(g_antiderivative(1.0)) - CW))


def _eta_endpoint() -> float:
    t = solve_eta(n_points=2001)
    return max(abs(t.values[0] - CW), abs(t.values[-1] - CW))


def _mass(form: ReactionForm) -> float:
    shape = UnionOfCircles((Circle((-0.2, 0.0), 0.1), Circle((0.2, 0.0), 0.15)))
    cfg = SimConfig(GridSpec(2, 64), 2 / 64, 1 / 64**2, 0.004, form, shape)
    masses = []
    run(cfg, lambda s: masses.append(integrate(s.u)))
    return max(abs(m - masses[0]) for m in masses) / masses[0]


def _bounds() -> float:
    cfg = SimConfig(GridSpec(2, 64), 2 / 64, (2 / 64) ** 2, 0.2, "classic_forced", Circle((0.0, 0.0), 0.25))
    worst = [0.0]

    def obs(state):
        d = state.u.data
        worst[0] = max(worst[0], -float(d.min()), float(d.max()) - 1.0)

    run(cfg, obs)
    return worst[0]


def _forced_bounds() -> float:
    cfg = SimConfig(GridSpec(2, 64), 2 / 64, 1 / 64**2, 0.01, "modified_forced", Circle((0.0, 0.0), 0.25),
                    ForcingSpec("constant", 2.0))
    worst = [0.0]
    run(cfg, lambda s: worst.__setitem__(0, max(worst[0], -float(s.u.data.min()), float(s.u.data.max()) - 1)))
    return worst[0]


def _reference() -> float:
    law = CircleLaw(0.25, 2.0)
    return abs(circle_extinction_time_rk4(law, 1e-5) - circle_extinction_time(law))


def _slope() -> float:
    eps = np.array([2 / 64, 2 / 128, 2 / 256])
    return abs(fit_slope(eps, eps**2) - 2.0)


# name -> (function returning a nonnegative defect, tolerance)
CHECKS: dict[str, tuple[Callable[[], float], float]] = {
    "potential identities": (_potential, 1e-6),
    "eta far-field value": (_eta_endpoint, 1e-3),
    "mass conservation classic_conserved": (lambda: _mass(ReactionForm.CLASSIC_CONSERVED), 1e-10),
    "mass conservation modified_conserved": (lambda: _mass(ReactionForm.MODIFIED_CONSERVED), 1e-10),
    "u stays in [0, 1] at dt = M eps^2": (_bounds, 1e-12),
    "u stays in [0, 1] with forcing": (_forced_bounds, 1e-12),
    "reference RK4 vs closed form": (_reference, 1e-8),
    "slope fit on eps^2": (_slope, 1e-6),
}


def run_checks(echo: Callable[[str], None] = print) -> bool:
    ok = True
    for name, (fn, tol) in CHECKS.items():
        defect = fn()
        passed = bool(defect <= tol)
        ok &= passed
        echo(f"{'PASS' if passed else 'FAIL'}  {name}: defect {defect:.3e} (tol {tol:.0e})")
    return ok
