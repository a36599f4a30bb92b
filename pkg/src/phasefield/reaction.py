"""Reaction terms F(u) of the split scheme and the forcing field g.

Four forms are supported; the conserved ones subtract a nonlocal
correction so that the reaction integrates to zero over the box:

* ``classic_forced``      W'(u) - eps c_W g
* ``modified_forced``     W'(u) - eps g sqrt(2W(u))
* ``classic_conserved``   classic_forced minus its box average
* ``modified_conserved``  modified_forced minus sqrt(2W(u)) times
  (integral of modified_forced) / (integral of sqrt(2W(u)))
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError, DegenerateFieldError
from .field import GridSpec, ScalarField
from .potential import CW, sqrt_two_w, w_prime

__all__ = [
    "ReactionForm",
    "ForcingSpec",
    "eval_forcing",
    "eval_reaction",
    "reaction_array",
    "multiplier_values",
    "DEGENERATE_THRESHOLD",
]

DEGENERATE_THRESHOLD = 1e-12


class ReactionForm(str, enum.Enum):
    CLASSIC_FORCED = "classic_forced"
    MODIFIED_FORCED = "modified_forced"
    CLASSIC_CONSERVED = "classic_conserved"
    MODIFIED_CONSERVED = "modified_conserved"

    @property
    def conserved(self) -> bool:
        return self in (ReactionForm.CLASSIC_CONSERVED, ReactionForm.MODIFIED_CONSERVED)

    @property
    def modified(self) -> bool:
        return self in (ReactionForm.MODIFIED_FORCED, ReactionForm.MODIFIED_CONSERVED)


@dataclass(frozen=True)
class ForcingSpec:
    """Forcing term g.

    kind is one of ``none``, ``constant`` (g = cg), ``radial_cosine``
    (g = cg cos(frequency pi |x|)) or ``sampled`` (g given as a field).
    """

    kind: str = "none"
    cg: float = 0.0
    frequency: float = 8.0
    field: Optional[ScalarField] = None

    def __post_init__(self):
        if self.kind not in ("none", "constant", "radial_cosine", "sampled"):
            raise ConfigError("forcing.kind", f"unknown forcing kind {self.kind!r}")
        if self.kind == "sampled" and self.field is None:
            raise ConfigError("forcing.field", "sampled forcing needs a field")

    def to_dict(self) -> dict:
        if self.kind == "sampled":
            return {"kind": "sampled"}
        out = {"kind": self.kind}
        if self.kind != "none":
            out["cg"] = self.cg
        if self.kind == "radial_cosine":
            out["frequency"] = self.frequency
        return out


def eval_forcing(spec: ForcingSpec, grid: GridSpec) -> ScalarField:
    if spec.kind == "none":
        return ScalarField.constant(grid, 0.0)
    if spec.kind == "constant":
        return ScalarField.constant(grid, spec.cg)
    if spec.kind == "radial_cosine":
        r = np.sqrt(sum(x * x for x in grid.coordinates()))
        return ScalarField(grid, spec.cg * np.cos(spec.frequency * math.pi * r))
    if spec.field.grid != grid:
        raise ConfigError(
            "forcing.field", f"sampled forcing grid {spec.field.grid} does not match {grid}"
        )
    return spec.field


def reaction_array(
    form: ReactionForm, u: np.ndarray, g: np.ndarray | None, eps: float, cell_volume: float
) -> np.ndarray:
    """F(u) on raw arrays; ``g=None`` means zero forcing."""
    form = ReactionForm(form)
    wp = w_prime(u)
    if form.modified:
        s2w = sqrt_two_w(u)
        f = wp if g is None else wp - eps * g * s2w
        if form is ReactionForm.MODIFIED_FORCED:
            return f
        denom = float(np.sum(s2w)) * cell_volume
        if denom < DEGENERATE_THRESHOLD:
            raise DegenerateFieldError(
                f"integral of sqrt(2W(u)) is {denom:.3g}; the interface has vanished"
            )
        return f - s2w * (float(np.sum(f)) * cell_volume / denom)
    f = wp if g is None else wp - (eps * CW) * g
    if form is ReactionForm.CLASSIC_FORCED:
        return f
    # the box has unit volume, so the average is the integral
    return f - float(np.sum(f)) * cell_volume


def _check(u: ScalarField, g: ScalarField, eps: float):
    if not eps > 0:
        raise ConfigError("eps", f"eps must be positive, got {eps}")
    if u.grid != g.grid:
        raise ValueError("u and g live on different grids")


def eval_reaction(form: ReactionForm, u: ScalarField, g: ScalarField, eps: float) -> ScalarField:
    _check(u, g, eps)
    return ScalarField(u.grid, reaction_array(form, u.data, g.data, eps, u.grid.cell_volume))


def multiplier_values(u: ScalarField, g: ScalarField, eps: float) -> tuple[float, float]:
    """Lagrange-multiplier diagnostics (g_eps, g_tilde_eps).

    g_eps = average of (W'(u) - eps c_W g) / (eps c_W);
    g_tilde_eps = integral of (W'(u) - eps g sqrt(2W)) / (eps * integral of sqrt(2W)).
    With g = 0 and u a profile field around a smooth set, g_tilde_eps
    approximates minus the mean curvature averaged over the boundary.
    """
    _check(u, g, eps)
    dv = u.grid.cell_volume
    wp = w_prime(u.data)
    s2w = sqrt_two_w(u.data)
    g_eps = float(np.sum(wp - eps * CW * g.data)) * dv / (eps * CW)
    denom = float(np.sum(s2w)) * dv
    if denom < DEGENERATE_THRESHOLD:
        raise DegenerateFieldError(
            f"integral of sqrt(2W(u)) is {denom:.3g}; g_tilde_eps is undefined"
        )
    g_tilde = float(np.sum(wp - eps * g.data * s2w)) * dv / (eps * denom)
    return g_eps, g_tilde
