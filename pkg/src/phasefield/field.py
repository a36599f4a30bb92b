"""Periodic scalar fields on the unit box Q = [-1/2, 1/2]^d.

Samples live at cell centres ``x_i = -1/2 + (i + 1/2) h`` with ``h = 1/P``.
The heat semigroup is applied exactly in Fourier space.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError
from .profile import q_profile

__all__ = [
    "GridSpec",
    "ScalarField",
    "Circle",
    "UnionOfCircles",
    "Torus",
    "signed_distance",
    "init_phase_field",
    "integrate",
    "diffusion_half_step",
    "write_field",
    "read_field",
]

log = logging.getLogger(__name__)

MAGIC = b"PFMF"
HEADER_SIZE = 16
CLEARANCE_WIDTHS = 4.0


@dataclass(frozen=True)
class GridSpec:
    dim: int
    p: int

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ConfigError("grid.dim", f"dimension must be 2 or 3, got {self.dim}")
        if self.p < 8 or self.p & (self.p - 1):
            raise ConfigError("grid.p", f"P must be a power of two >= 8, got {self.p}")

    @property
    def h(self) -> float:
        return 1.0 / self.p

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.p,) * self.dim

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    def axis(self) -> np.ndarray:
        return -0.5 + (np.arange(self.p) + 0.5) * self.h

    def coordinates(self) -> tuple[np.ndarray, ...]:
        """Broadcastable open-mesh coordinate arrays, one per axis."""
        return _coordinates(self)

    def squared_wavenumbers(self) -> np.ndarray:
        """|p|^2 on the real-FFT half spectrum (integer modes)."""
        return _squared_wavenumbers(self)


@lru_cache(maxsize=16)
def _coordinates(grid: GridSpec) -> tuple[np.ndarray, ...]:
    axes = [grid.axis()] * grid.dim
    return tuple(np.ix_(*axes))


@lru_cache(maxsize=16)
def _squared_wavenumbers(grid: GridSpec) -> np.ndarray:
    full = np.fft.fftfreq(grid.p, d=1.0 / grid.p)  # Nyquist mode lands on -P/2
    half = np.fft.rfftfreq(grid.p, d=1.0 / grid.p)
    axes = [full] * (grid.dim - 1) + [half]
    mesh = np.ix_(*axes)
    k2 = sum(m * m for m in mesh)
    k2.setflags(write=False)
    return k2


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: GridSpec
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.shape != self.grid.shape:
            raise ValueError(f"data shape {data.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(data)):
            raise FloatingPointError("field contains non-finite values")
        object.__setattr__(self, "data", data)

    @classmethod
    def constant(cls, grid: GridSpec, value: float) -> "ScalarField":
        return cls(grid, np.full(grid.shape, float(value)))

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)


# -- shapes -----------------------------------------------------------------


@dataclass(frozen=True)
class Circle:
    """Disk in 2D, ball in 3D."""

    center: tuple[float, ...]
    radius: float
    kind: str = field(default="circle", init=False)

    @property
    def dim(self) -> int:
        return len(self.center)

    def distance(self, *x):
        r2 = sum((xi - ci) ** 2 for xi, ci in zip(x, self.center))
        return np.sqrt(r2) - self.radius

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        c = np.asarray(self.center, dtype=float)
        return c - self.radius, c + self.radius


@dataclass(frozen=True)
class UnionOfCircles:
    members: tuple[Circle, ...]
    kind: str = field(default="union_of_circles", init=False)

    def __post_init__(self):
        if not self.members:
            raise ConfigError("shape.members", "union_of_circles needs at least one member")
        if len({m.dim for m in self.members}) != 1:
            raise ConfigError("shape.members", "all members must share a dimension")

    @property
    def dim(self) -> int:
        return self.members[0].dim

    def distance(self, *x):
        d = self.members[0].distance(*x)
        for m in self.members[1:]:
            d = np.minimum(d, m.distance(*x))
        return d

    def bounds(self):
        lows, highs = zip(*(m.bounds() for m in self.members))
        return np.min(lows, axis=0), np.max(highs, axis=0)

    @property
    def smallest(self) -> int:
        return int(np.argmin([m.radius for m in self.members]))


@dataclass(frozen=True)
class Torus:
    """Solid torus with symmetry axis parallel to z."""

    center: tuple[float, float, float]
    major_radius: float
    minor_radius: float
    kind: str = field(default="torus", init=False)

    def __post_init__(self):
        if not 0 < self.minor_radius < self.major_radius:
            raise ConfigError("shape.torus", "need 0 < minor_radius < major_radius")

    @property
    def dim(self) -> int:
        return 3

    def distance(self, x, y, z):
        cx, cy, cz = self.center
        rho = np.sqrt((x - cx) ** 2 + (y - cy) ** 2)
        return np.sqrt((rho - self.major_radius) ** 2 + (z - cz) ** 2) - self.minor_radius

    def bounds(self):
        c = np.asarray(self.center, dtype=float)
        ext = np.array([self.major_radius + self.minor_radius] * 2 + [self.minor_radius])
        return c - ext, c + ext


Shape = Circle | UnionOfCircles | Torus


def signed_distance(shape: Shape, x: Sequence[float] | Sequence[np.ndarray]):
    """Signed distance to the shape boundary, negative inside."""
    if len(x) != shape.dim:
        raise ValueError(f"point has {len(x)} coordinates, shape is {shape.dim}D")
    return shape.distance(*x)


def clearance(shape: Shape) -> float:
    lo, hi = shape.bounds()
    return float(min(np.min(lo + 0.5), np.min(0.5 - hi)))


def init_phase_field(grid: GridSpec, shape: Shape, eps: float) -> ScalarField:
    """Sample q(d(x) / eps) at every cell centre."""
    if not eps > 0:
        raise ConfigError("eps", f"eps must be positive, got {eps}")
    if shape.dim != grid.dim:
        raise ConfigError("shape.dim", f"shape is {shape.dim}D but grid is {grid.dim}D")
    margin = clearance(shape)
    if margin < CLEARANCE_WIDTHS * eps:
        raise ConfigError(
            "shape.clearance",
            f"shape clearance {margin:.6g} to the box boundary is below "
            f"{CLEARANCE_WIDTHS:g} eps = {CLEARANCE_WIDTHS * eps:.6g}",
        )
    data = q_profile(shape.distance(*grid.coordinates()) / eps)
    # q is not periodic; its value at the box faces is the seam mismatch
    seam = max(float(np.max(np.take(data, [0, -1], axis=a))) for a in range(grid.dim))
    if seam > 1e-6:
        log.debug("periodic seam mismatch %.3g (clearance %.3g eps)", seam, margin / eps)
    return ScalarField(grid, np.broadcast_to(data, grid.shape).copy())


def integrate(u: ScalarField | np.ndarray, grid: GridSpec | None = None) -> float:
    """Midpoint quadrature over the unit box."""
    if isinstance(u, ScalarField):
        grid, u = u.grid, u.data
    return float(np.sum(u)) * grid.cell_volume


def heat_multiplier(grid: GridSpec, dt: float) -> np.ndarray:
    return _heat_multiplier(grid, float(dt))


@lru_cache(maxsize=16)
def _heat_multiplier(grid: GridSpec, dt: float) -> np.ndarray:
    m = np.exp(-4.0 * math.pi**2 * dt * grid.squared_wavenumbers())
    m.setflags(write=False)
    return m


def diffusion_array(data: np.ndarray, multiplier: np.ndarray) -> np.ndarray:
    return np.fft.irfftn(np.fft.rfftn(data) * multiplier, s=data.shape, axes=range(data.ndim))


def diffusion_half_step(u: ScalarField, dt: float) -> ScalarField:
    """Exact heat flow over ``dt``: mode p is damped by exp(-4 pi^2 dt |p|^2)."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    return ScalarField(u.grid, diffusion_array(u.data, heat_multiplier(u.grid, dt)))


# -- binary dump ------------------------------------------------------------


def write_field(u: ScalarField, path, **meta) -> None:
    """Write the 16-byte-header binary dump plus a JSON sidecar.

    ``meta`` supplies the provenance keys (eps, dt, time, model).
    """
    path = Path(path)
    header = MAGIC + bytes([u.grid.dim, u.grid.p.bit_length() - 1]) + bytes(10)
    with path.open("wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(u.data, dtype="<f8").tobytes())
    sidecar = {"dim": u.grid.dim, "P": u.grid.p}
    for key in ("eps", "dt", "time", "model"):
        sidecar[key] = meta.get(key)
    path.with_suffix(path.suffix + ".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True))


def read_field(path) -> ScalarField:
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise ValueError(f"{path}: bad magic {raw[:4]!r}")
    dim, log2p = raw[4], raw[5]
    if any(raw[6:HEADER_SIZE]):
        raise ValueError(f"{path}: reserved header bytes are not zero")
    grid = GridSpec(dim, 1 << log2p)
    data = np.frombuffer(raw, dtype="<f8", offset=HEADER_SIZE)
    if data.size != grid.p**dim:
        raise ValueError(f"{path}: expected {grid.p**dim} values, found {data.size}")
    return ScalarField(grid, data.reshape(grid.shape).astype(np.float64))
