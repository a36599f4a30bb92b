"""Sharp-interface reference solutions for the radial test problems.

Closed forms where they exist, otherwise classical fixed-step RK4 on the
squared radii, with the vanishing of a radius localised by bisection.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Callable

import numpy as np

__all__ = [
    "CircleLaw",
    "TwoCircleLaw",
    "rk4_step",
    "rk4_integrate",
    "circle_radius",
    "circle_extinction_time",
    "circle_extinction_time_rk4",
    "two_circle_solution",
    "two_circle_extinction_time",
    "two_circle_extinction_rk4",
    "circle_trajectory",
    "two_circle_trajectory",
    "write_trajectory_csv",
]

RK4_STEP = 1e-6


@dataclass(frozen=True)
class CircleLaw:
    """dR/dt = -1/R + cg."""

    r0: float
    cg: float = 0.0

    def __post_init__(self):
        if not self.r0 > 0:
            raise ValueError(f"r0 must be positive, got {self.r0}")

    def rhs(self, t, y):
        return np.array([-1.0 / y[0] + self.cg])

    def squared_rhs(self, t, z):
        # d(R^2)/dt = 2 R R' = -2 + 2 cg R
        return np.array([-2.0 + 2.0 * self.cg * math.sqrt(max(z[0], 0.0))])

    @property
    def initial(self) -> np.ndarray:
        return np.array([self.r0])


@dataclass(frozen=True)
class TwoCircleLaw:
    """Volume-preserving flow of two disjoint circles, radii (r, R)."""

    r0: float
    R0: float

    def __post_init__(self):
        if not 0 < self.r0 < self.R0:
            raise ValueError(f"need 0 < r0 < R0, got r0={self.r0}, R0={self.R0}")

    def rhs(self, t, y):
        r, R = y
        mean = 2.0 / (r + R)
        return np.array([-1.0 / r + mean, -1.0 / R + mean])

    def squared_rhs(self, t, z):
        r, R = math.sqrt(max(z[0], 0.0)), math.sqrt(z[1])
        return np.array([-2.0 + 4.0 * r / (r + R), -2.0 + 4.0 * R / (r + R)])

    @property
    def initial(self) -> np.ndarray:
        return np.array([self.r0, self.R0])

    @property
    def final_radius(self) -> float:
        return math.hypot(self.r0, self.R0)


def rk4_step(f: Callable, t: float, y: np.ndarray, h: float) -> np.ndarray:
    k1 = f(t, y)
    k2 = f(t + h / 2, y + h / 2 * k1)
    k3 = f(t + h / 2, y + h / 2 * k2)
    k4 = f(t + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def rk4_integrate(f: Callable, y0, t_end: float, h: float = RK4_STEP,
                  keep: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Fixed-step RK4 from 0 to ``t_end`` (last step shortened to land on it).

    Returns (times, states); with ``keep`` only every keep-th step is
    stored, plus the endpoint.
    """
    y = np.asarray(y0, dtype=float)
    n_full = int(math.floor(t_end / h + 1e-9))
    times, states = [0.0], [y]
    t = 0.0
    for i in range(1, n_full + 1):
        y = rk4_step(f, t, y, h)
        t = i * h
        if keep and i % keep == 0:
            times.append(t)
            states.append(y)
    rest = t_end - t
    if rest > 1e-15:
        y = rk4_step(f, t, y, rest)
        t = t_end
    if times[-1] != t:
        times.append(t)
        states.append(y)
    return np.array(times), np.array(states)


@lru_cache(maxsize=64)
def _vanishing(law, h: float) -> tuple[float, tuple[float, ...]]:
    """Time at which the first radius vanishes, and the squared radii then.

    Marching is done on the squared radii, whose right-hand side stays
    bounded as a radius shrinks to zero (dR/dt itself blows up like 1/R).
    The last step is cut by bisection on the sign of the first squared
    radius.
    """
    f = law.squared_rhs
    z = law.initial**2
    t = 0.0
    while True:
        nxt = rk4_step(f, t, z, h)
        if nxt[0] <= 0.0:
            break
        z, t = nxt, t + h
        if t > 1e3:
            raise ValueError("radius does not vanish")
    lo, hi = 0.0, h
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if rk4_step(f, t, z, mid)[0] > 0.0:
            lo = mid
        else:
            hi = mid
    z_end = rk4_step(f, t, z, hi)
    return t + hi, tuple(float(v) for v in z_end)


def circle_extinction_time(law: CircleLaw) -> float:
    """Closed-form extinction time; requires cg < 1/r0."""
    r0, cg = law.r0, law.cg
    if cg * r0 >= 1.0:
        raise ValueError(f"cg = {cg} >= 1/r0 = {1 / r0}: the circle does not shrink")
    x = cg * r0
    if abs(x) < 1e-2:
        # series r0^2 sum x^k / (k + 2); the closed form cancels badly here
        return r0 * r0 * sum(x**k / (k + 2) for k in range(12))
    return -(1.0 / cg) * (math.log1p(-cg * r0) / cg + r0)


def circle_extinction_time_rk4(law: CircleLaw, h: float = RK4_STEP) -> float:
    if law.cg * law.r0 >= 1.0:
        raise ValueError("circle does not shrink")
    return _vanishing(law, h)[0]


def _radii_at(law, t: float, h: float) -> np.ndarray:
    if t < 0:
        raise ValueError("t must be nonnegative")
    shrinking = not isinstance(law, CircleLaw) or law.cg * law.r0 < 1.0
    if shrinking:
        t_ext = _vanishing(law, h)[0]
        if t > t_ext * (1 + 1e-9):
            raise ValueError(f"t = {t} is past the extinction time {t_ext}")
    z = rk4_integrate(law.squared_rhs, law.initial**2, t, h)[1][-1]
    return np.sqrt(np.maximum(z, 0.0))


def circle_radius(law: CircleLaw, t: float, h: float = RK4_STEP) -> float:
    """R(t): closed form sqrt(r0^2 - 2t) without forcing, RK4 otherwise."""
    if law.cg == 0:
        if t < 0:
            raise ValueError("t must be nonnegative")
        t_ext = law.r0**2 / 2.0
        if t > t_ext * (1 + 1e-12):
            raise ValueError(f"t = {t} is past extinction at {t_ext}")
        return math.sqrt(max(law.r0**2 - 2.0 * t, 0.0))
    return float(_radii_at(law, t, h)[0])


def circle_trajectory(law: CircleLaw, t_end: float, h: float = RK4_STEP, keep: int = 100):
    times, z = rk4_integrate(law.squared_rhs, law.initial**2, t_end, h, keep)
    return times, np.sqrt(np.maximum(z[:, 0], 0.0))


def two_circle_extinction_time(law: TwoCircleLaw) -> float:
    r0, R0 = law.r0, law.R0
    return -r0 * R0 / 2.0 + (R0**2 + r0**2) / 4.0 * math.log1p(2.0 * r0 * R0 / (R0 - r0) ** 2)


def two_circle_extinction_rk4(law: TwoCircleLaw, h: float = RK4_STEP) -> tuple[float, float]:
    """(vanishing time of the small circle, large radius at that time) by RK4."""
    t_ext, z = _vanishing(law, h)
    return t_ext, math.sqrt(z[1])


def two_circle_solution(law: TwoCircleLaw, t: float, h: float = RK4_STEP) -> tuple[float, float]:
    """(r(t), R(t)) up to the small-circle extinction."""
    r, R = _radii_at(law, t, h)
    return float(r), float(R)


def two_circle_trajectory(law: TwoCircleLaw, t_end: float, h: float = RK4_STEP, keep: int = 100):
    times, z = rk4_integrate(law.squared_rhs, law.initial**2, t_end, h, keep)
    radii = np.sqrt(np.maximum(z, 0.0))
    return times, radii[:, 0], radii[:, 1]


def write_trajectory_csv(path, times, r, R=None) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", "r", "R"])
        for i, t in enumerate(times):
            big = "" if R is None else f"{R[i]:.17g}"
            writer.writerow([f"{t:.17g}", f"{r[i]:.17g}", big])
