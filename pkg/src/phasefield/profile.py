"""One-dimensional interface profiles.

``q`` is the heteroclinic joining the wells (closed form). ``eta`` and
``xi`` are the first- and second-order correction profiles; both solve
linear boundary-value problems of the form

    y'' - W''(q(s)) y = f(s),    s in [-L, L],

whose operator has the (approximate) kernel span(q'). They are solved by
second-order finite differences with Dirichlet data and then shifted by a
multiple of q' so that y(0) = 0.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg

from .errors import ProfileSolveError
from .potential import CW, w_second

__all__ = [
    "ProfileTable",
    "q_profile",
    "q_prime",
    "solve_eta",
    "solve_xi",
    "eta_rhs",
    "xi_rhs",
    "bvp_residual",
    "write_profile_csv",
]

DEFAULT_HALF_WIDTH = 20.0


def q_profile(s):
    """q(s) = (1 - tanh(s / 2)) / 2: equals 1 at -inf, 1/2 at 0, 0 at +inf."""
    return 0.5 * (1.0 - np.tanh(0.5 * np.asarray(s, dtype=float)))


def q_prime(s):
    """q'(s) = -q (1 - q) = -sqrt(2 W(q))."""
    c = np.cosh(0.5 * np.asarray(s, dtype=float))
    return -0.25 / (c * c)


def eta_rhs(s):
    return -CW - q_prime(s)


def xi_rhs(s):
    return s * q_prime(s)


@dataclass(frozen=True)
class ProfileTable:
    """A profile sampled on a symmetric uniform grid over [-L, L]."""

    domain_half_width: float
    n_points: int
    s_values: np.ndarray
    values: np.ndarray
    derivative: np.ndarray

    @property
    def spacing(self) -> float:
        return 2.0 * self.domain_half_width / (self.n_points - 1)

    @property
    def center_index(self) -> int:
        return self.n_points // 2

    def __call__(self, s):
        return np.interp(s, self.s_values, self.values)


def _grid(half_width: float, n_points: int) -> np.ndarray:
    if not half_width > 0:
        raise ValueError(f"half_width must be positive, got {half_width}")
    if half_width < 10:
        raise ValueError(f"half_width must be >= 10, got {half_width}")
    if n_points < 1001:
        raise ValueError(f"n_points must be >= 1001, got {n_points}")
    if n_points % 2 == 0:
        raise ValueError("n_points must be odd so that s = 0 is a node")
    s = np.linspace(-half_width, half_width, n_points)
    s[n_points // 2] = 0.0
    return s


def _solve_dirichlet(s: np.ndarray, rhs: np.ndarray, left: float, right: float) -> np.ndarray:
    h = s[1] - s[0]
    potential = w_second(q_profile(s[1:-1]))
    m = len(s) - 2
    inv_h2 = 1.0 / (h * h)
    # banded storage for solve_banded: rows are super, main, sub diagonals
    ab = np.empty((3, m))
    ab[0, :] = inv_h2
    ab[1, :] = -2.0 * inv_h2 - potential
    ab[2, :] = inv_h2
    b = np.array(rhs[1:-1], dtype=float)
    b[0] -= left * inv_h2
    b[-1] -= right * inv_h2
    try:
        interior = scipy.linalg.solve_banded((1, 1), ab, b, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ProfileSolveError(f"finite-difference system is singular: {exc}") from exc
    if not np.all(np.isfinite(interior)):
        raise ProfileSolveError("finite-difference solve produced non-finite values")
    out = np.empty_like(s)
    out[0], out[-1] = left, right
    out[1:-1] = interior
    return out


def _pin_center(s: np.ndarray, y: np.ndarray) -> np.ndarray:
    qp = q_prime(s)
    c = len(s) // 2
    alpha = y[c] / qp[c]
    y = y - alpha * qp
    y[c] = 0.0
    return y


def _table(s: np.ndarray, y: np.ndarray, half_width: float) -> ProfileTable:
    deriv = np.gradient(y, s, edge_order=2)
    for arr in (s, y, deriv):
        arr.setflags(write=False)
    return ProfileTable(half_width, len(s), s, y, deriv)


def solve_eta(half_width: float = DEFAULT_HALF_WIDTH, n_points: int = 8001) -> ProfileTable:
    """First-order correction: eta'' - W''(q) eta = -c_W - q', eta(0) = 0.

    Far from the interface eta tends to c_W / W''(well) = c_W.
    """
    s = _grid(half_width, n_points)
    y = _solve_dirichlet(s, eta_rhs(s), CW, CW)
    return _table(s, _pin_center(s, y), half_width)


def solve_xi(half_width: float = DEFAULT_HALF_WIDTH, n_points: int = 8001) -> ProfileTable:
    """Second-order correction: xi'' - W''(q) xi = s q', xi(0) = 0, decaying."""
    s = _grid(half_width, n_points)
    y = _solve_dirichlet(s, xi_rhs(s), 0.0, 0.0)
    return _table(s, _pin_center(s, y), half_width)


def bvp_residual(table: ProfileTable, rhs) -> np.ndarray:
    """Pointwise residual y'' - W''(q) y - rhs on interior nodes.

    The second derivative uses the fourth-order five-point stencil, so the
    residual of a second-order solution measures its O(h^2) truncation
    error rather than vanishing identically.
    """
    y, s, h = table.values, table.s_values, table.spacing
    d2 = (-y[4:] + 16.0 * y[3:-1] - 30.0 * y[2:-2] + 16.0 * y[1:-3] - y[:-4]) / (12.0 * h * h)
    inner = s[2:-2]
    return d2 - w_second(q_profile(inner)) * y[2:-2] - rhs(inner)


def write_profile_csv(table: ProfileTable, path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["s", "value", "derivative"])
        for row in zip(table.s_values, table.values, table.derivative):
            writer.writerow([f"{v:.17g}" for v in row])
