"""Measurements taken from a field during a run."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import ndimage

from .errors import DegenerateFieldError
from .field import Circle, GridSpec, ScalarField, Torus, UnionOfCircles, integrate
from .potential import CW, w_prime
from .reaction import eval_forcing, multiplier_values

__all__ = [
    "Ray",
    "Observation",
    "measure",
    "radius_along_ray",
    "threshold_volume",
    "default_rays",
    "component_max",
    "ObservationRecorder",
    "write_observations_csv",
]

LEVEL = 0.5


@dataclass(frozen=True)
class Ray:
    origin: tuple[float, ...]
    direction: tuple[float, ...]

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        n = float(np.linalg.norm(d))
        if n == 0:
            raise ValueError("ray direction must be nonzero")
        object.__setattr__(self, "direction", tuple(d / n))


@dataclass
class Observation:
    time: float
    mass: float
    volume_threshold: float
    radii: list[float] = field(default_factory=list)
    g_eps: float = math.nan
    g_tilde_eps: float = math.nan
    max_u: float = math.nan
    min_u: float = math.nan

    def row(self) -> list[float]:
        return [self.time, self.mass, self.volume_threshold, *self.radii,
                self.g_eps, self.g_tilde_eps, self.max_u, self.min_u]


def _sample(u: ScalarField, points: np.ndarray) -> np.ndarray:
    """Periodic multilinear interpolation at physical points (n, dim)."""
    idx = (points.T + 0.5) / u.grid.h - 0.5
    return ndimage.map_coordinates(u.data, idx, order=1, mode="grid-wrap")


def radius_along_ray(u: ScalarField, origin: Sequence[float], direction: Sequence[float]) -> float:
    """Distance from ``origin`` to the first crossing of the 1/2 level.

    Returns 0 when u(origin) < 1/2 or no crossing is found within one box
    length (the component has vanished or fills the ray).
    """
    ray = Ray(tuple(origin), tuple(direction))
    h = u.grid.h
    steps = np.arange(u.grid.p + 1) * h
    pts = np.asarray(ray.origin)[None, :] + steps[:, None] * np.asarray(ray.direction)[None, :]
    vals = _sample(u, pts)
    if vals[0] < LEVEL:
        return 0.0
    below = np.nonzero(vals < LEVEL)[0]
    if below.size == 0:
        return 0.0
    k = int(below[0])
    a, b = vals[k - 1], vals[k]
    return float(steps[k - 1] + h * (a - LEVEL) / (a - b))


def _inside_fraction(phi: np.ndarray, nb: np.ndarray, inside: np.ndarray) -> np.ndarray:
    """Fraction of a half cell (toward one neighbour) lying in {phi >= 0}."""
    with np.errstate(divide="ignore", invalid="ignore"):
        theta = phi / (phi - nb)  # crossing position in units of h
    crosses = inside != (nb >= 0)
    full = np.where(inside, 0.5, 0.0)
    part = np.where(inside, np.minimum(0.5, theta), np.maximum(0.0, 0.5 - theta))
    return np.where(crosses, part, full), crosses


def threshold_volume(u: ScalarField) -> float:
    """Measure of {u >= 1/2} with an axis-wise linear sub-cell correction.

    Cells without a sign change along any axis count 0 or 1. Otherwise the
    cell contributes the mean, over the axes carrying a sign change, of the
    1D inside fraction obtained from linear interpolation toward both
    neighbours on that axis.
    """
    phi = u.data - LEVEL
    inside = phi >= 0
    total = np.zeros_like(phi)
    n_axes = np.zeros(phi.shape, dtype=np.int64)
    for ax in range(phi.ndim):
        lo, c_lo = _inside_fraction(phi, np.roll(phi, 1, axis=ax), inside)
        hi, c_hi = _inside_fraction(phi, np.roll(phi, -1, axis=ax), inside)
        active = c_lo | c_hi
        total += np.where(active, lo + hi, 0.0)
        n_axes += active
    frac = np.where(n_axes > 0, total / np.maximum(n_axes, 1), inside.astype(float))
    return float(np.sum(frac)) * u.grid.cell_volume


def default_rays(shape) -> list[Ray]:
    """Rays used to track radii for the standard test geometries.

    Circles: one ray per member, pointing away from the centroid of the
    other members (or along +x for a lone circle). Torus: from the tube
    centre outward in x and upward in z.
    """
    if isinstance(shape, Circle):
        e = (1.0,) + (0.0,) * (shape.dim - 1)
        return [Ray(tuple(shape.center), e)]
    if isinstance(shape, UnionOfCircles):
        centers = np.array([m.center for m in shape.members], dtype=float)
        rays = []
        for i, c in enumerate(centers):
            others = np.delete(centers, i, axis=0)
            d = c - others.mean(axis=0) if len(others) else np.eye(len(c))[0]
            if not np.any(d):
                d = np.eye(len(c))[0]
            rays.append(Ray(tuple(c), tuple(d)))
        return rays
    if isinstance(shape, Torus):
        cx, cy, cz = shape.center
        tube = (cx + shape.major_radius, cy, cz)
        return [Ray(tube, (1.0, 0.0, 0.0)), Ray(tube, (0.0, 0.0, 1.0))]
    return []


def component_mask(grid: GridSpec, shape) -> np.ndarray | None:
    """Cells closer to the smallest member's centre than to any other centre.

    None for single-component shapes.
    """
    if not isinstance(shape, UnionOfCircles) or len(shape.members) < 2:
        return None
    x = grid.coordinates()
    dists = [sum((xi - ci) ** 2 for xi, ci in zip(x, m.center)) for m in shape.members]
    k = shape.smallest
    mask = np.ones(grid.shape, dtype=bool)
    for j, d in enumerate(dists):
        if j != k:
            mask &= np.broadcast_to(dists[k] <= d, grid.shape)
    return mask


def component_max(u: ScalarField, mask: np.ndarray | None = None) -> float:
    """max(u) over the tracked component region (whole box if ``mask`` is None)."""
    return float(np.max(u.data if mask is None else u.data[mask]))


def measure(u: ScalarField, g: ScalarField, eps: float, rays: Iterable[Ray] = (), time: float = 0.0) -> Observation:
    try:
        g_eps, g_tilde = multiplier_values(u, g, eps)
    except DegenerateFieldError:
        g_eps = integrate(w_prime(u.data) - eps * CW * g.data, u.grid) / (eps * CW)
        g_tilde = math.nan
    return Observation(
        time=time,
        mass=integrate(u),
        volume_threshold=threshold_volume(u),
        radii=[radius_along_ray(u, r.origin, r.direction) for r in rays],
        g_eps=g_eps,
        g_tilde_eps=g_tilde,
        max_u=float(np.max(u.data)),
        min_u=float(np.min(u.data)),
    )


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_observations_csv(observations: Sequence[Observation], path, n_radii: int | None = None) -> None:
    if n_radii is None:
        n_radii = len(observations[0].radii) if observations else 0
    header = ["time", "mass", "volume", *[f"r{i}" for i in range(n_radii)],
              "g_eps", "g_tilde_eps", "max_u", "min_u"]
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for obs in observations:
            writer.writerow([_fmt(v) for v in obs.row()])


class ObservationRecorder:
    """Observer callback for :func:`phasefield.stepper.run` that records
    an :class:`Observation` each time it is invoked."""

    def __init__(self, cfg, rays: Sequence[Ray] | None = None):
        self.eps = cfg.eps
        self.g = eval_forcing(cfg.forcing, cfg.grid)
        self.rays = list(default_rays(cfg.shape) if rays is None else rays)
        self.observations: list[Observation] = []

    def __call__(self, state) -> None:
        self.observations.append(measure(state.u, self.g, self.eps, self.rays, time=state.time))

    def write_csv(self, path) -> None:
        write_observations_csv(self.observations, path, n_radii=len(self.rays))
