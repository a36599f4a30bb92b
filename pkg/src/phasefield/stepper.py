"""Lie-splitting time integrator: exact heat flow, then one explicit
reaction step evaluated at the post-diffusion field."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, DegenerateFieldError
from .field import GridSpec, ScalarField, diffusion_array, heat_multiplier, init_phase_field
from .observables import component_mask, component_max
from .potential import STABILITY_M
from .reaction import ForcingSpec, ReactionForm, eval_forcing, reaction_array

__all__ = ["SimConfig", "SimState", "step", "run", "detect_extinction", "initial_state"]

log = logging.getLogger(__name__)

MIN_EPS_OVER_H = 1.5
RECOMMENDED_EPS_OVER_H = 2.0
# tolerance for dt == M eps^2 computed in floating point
_DT_SLACK = 1e-12


@dataclass(frozen=True)
class SimConfig:
    grid: GridSpec
    eps: float
    dt: float
    t_end: float
    form: ReactionForm
    shape: object
    forcing: ForcingSpec = field(default_factory=ForcingSpec)
    observe_every: int = 1
    stop_on_extinction: bool = False

    def __post_init__(self):
        object.__setattr__(self, "form", ReactionForm(self.form))
        self.validate()

    def validate(self) -> None:
        if not self.eps > 0:
            raise ConfigError("eps > 0", f"eps = {self.eps}")
        if not self.dt > 0:
            raise ConfigError("dt > 0", f"dt = {self.dt}")
        if not self.t_end >= 0:
            raise ConfigError("t_end >= 0", f"t_end = {self.t_end}")
        bound = STABILITY_M * self.eps**2
        if self.dt > bound * (1 + _DT_SLACK):
            raise ConfigError(
                "dt <= M eps^2", f"dt = {self.dt:.6g} exceeds M eps^2 = {bound:.6g}"
            )
        ratio = self.eps / self.grid.h
        if ratio < MIN_EPS_OVER_H:
            raise ConfigError(
                "eps >= 1.5 h", f"eps / h = {ratio:.4g} is below {MIN_EPS_OVER_H}"
            )
        if ratio < RECOMMENDED_EPS_OVER_H:
            log.warning("eps / h = %.3g is below the recommended %.1f", ratio, RECOMMENDED_EPS_OVER_H)
        if self.observe_every < 1:
            raise ConfigError("observe_every >= 1", f"observe_every = {self.observe_every}")
        if getattr(self.shape, "dim", self.grid.dim) != self.grid.dim:
            raise ConfigError("shape.dim == grid.dim", f"shape is {self.shape.dim}D, grid {self.grid.dim}D")

    @property
    def n_steps(self) -> int:
        return max(0, math.ceil(self.t_end / self.dt - 1e-9))

    def with_(self, **changes) -> "SimConfig":
        return replace(self, **changes)


@dataclass
class SimState:
    u: ScalarField
    time: float = 0.0
    step_index: int = 0
    terminated: Optional[str] = None  # reached_t_end | extinct | degenerate
    extinction_time: Optional[float] = None
    message: str = ""


class _Context:
    """Per-config arrays reused across steps."""

    def __init__(self, cfg: SimConfig):
        self.multiplier = heat_multiplier(cfg.grid, cfg.dt)
        g = eval_forcing(cfg.forcing, cfg.grid).data
        self.g = None if cfg.forcing.kind == "none" else g
        self.mask = component_mask(cfg.grid, cfg.shape)


def initial_state(cfg: SimConfig) -> SimState:
    return SimState(u=init_phase_field(cfg.grid, cfg.shape, cfg.eps))


def detect_extinction(u: ScalarField) -> bool:
    """True when no point of u reaches 1/2."""
    return float(np.max(u.data)) < 0.5


def _advance(data: np.ndarray, cfg: SimConfig, ctx: _Context) -> np.ndarray:
    v = diffusion_array(data, ctx.multiplier)
    f = reaction_array(cfg.form, v, ctx.g, cfg.eps, cfg.grid.cell_volume)
    v -= (cfg.dt / cfg.eps**2) * f
    return v


def step(state: SimState, cfg: SimConfig, _ctx: _Context | None = None) -> SimState:
    if state.terminated is not None:
        raise RuntimeError(f"cannot step a terminated simulation ({state.terminated})")
    ctx = _ctx or _Context(cfg)
    try:
        data = _advance(state.u.data, cfg, ctx)
    except DegenerateFieldError as exc:
        return replace(state, terminated="degenerate", message=str(exc))
    n = state.step_index + 1
    return SimState(u=ScalarField(cfg.grid, data), time=n * cfg.dt, step_index=n)


def run(cfg: SimConfig, observer: Callable[[SimState], None] | None = None,
        state: SimState | None = None) -> SimState:
    """Integrate from the initial shape (or ``state``) up to ``cfg.t_end``.

    ``observer`` sees the initial state, every ``observe_every``-th state
    and the final one. With ``stop_on_extinction`` the run ends as soon as
    the tracked component drops below 1/2; the extinction time is refined
    by linear interpolation of its maximum between the bracketing steps.
    """
    observe = observer or (lambda s: None)
    if state is None:
        state = initial_state(cfg)
    ctx = _Context(cfg)
    observe(state)
    last_observed = state.step_index
    indicator = component_max(state.u, ctx.mask)
    n_steps = cfg.n_steps
    while state.step_index < n_steps:
        new = step(state, cfg, ctx)
        if new.terminated == "degenerate":
            state = new
            break
        state = new
        value = component_max(state.u, ctx.mask)
        if cfg.stop_on_extinction and value < 0.5 <= indicator:
            frac = (indicator - 0.5) / (indicator - value)
            state.extinction_time = state.time - cfg.dt + frac * cfg.dt
            state.terminated = "extinct"
            break
        indicator = value
        if state.step_index % cfg.observe_every == 0:
            observe(state)
            last_observed = state.step_index
    if state.terminated is None:
        state.terminated = "reached_t_end"
    if state.step_index != last_observed:
        observe(state)
    return state
