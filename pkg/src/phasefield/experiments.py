"""Convergence-study harness for the standard test problems.

Each experiment runs a set of reaction forms over a sweep of resolutions
P (with eps = 2/P and dt = 1/P^2), compares the measured quantities with
the sharp-interface references, and fits log-log slopes against eps.
"""
from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .config import sim_config_from_dict, sim_config_to_dict
from .errors import ConfigError
from .field import Circle, GridSpec, Torus, UnionOfCircles, write_field
from .observables import Observation, ObservationRecorder, Ray, _sample
from .reaction import ReactionForm
from .reference import (
    CircleLaw,
    TwoCircleLaw,
    circle_extinction_time,
    two_circle_extinction_time,
)
from .stepper import SimConfig, SimState, run

__all__ = [
    "EXPERIMENTS",
    "ExperimentSpec",
    "CellResult",
    "ConvergenceReport",
    "default_spec",
    "spec_from_dict",
    "run_cell",
    "run_experiment",
    "fit_slope",
]

log = logging.getLogger(__name__)

EXPERIMENTS = (
    "shrinking_circle",
    "forced_circle",
    "two_circles_conserved",
    "forced_stationary_circle",
    "torus_conserved",
    "custom",
)
EXTINCTION_EXPERIMENTS = ("shrinking_circle", "forced_circle", "two_circles_conserved")
REPORT_HEADER = ["experiment", "model", "P", "eps", "dt", "quantity", "measured", "reference", "abs_error"]

# c_g for the stationary forced circle; the classical model's drift grows
# roughly linearly in c_g while the modified one stays two orders smaller
STATIONARY_CG = 25.0
TORUS_SHAPE = Torus((0.0, 0.0, 0.0), 0.22, 0.12)
TWO_CIRCLES = UnionOfCircles((Circle((-0.2, 0.0), 0.1), Circle((0.2, 0.0), 0.15)))


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    cfg: SimConfig
    sweep: tuple[int, ...]
    models: tuple[ReactionForm, ...]

    def __post_init__(self):
        if self.name not in EXPERIMENTS:
            raise ConfigError("experiment.name", f"unknown experiment {self.name!r}")
        _check_sweep(self.sweep)
        if not self.models:
            raise ConfigError("experiment.models", "at least one model is required")
        try:
            forms = tuple(ReactionForm(m) for m in self.models)
        except ValueError as exc:
            raise ConfigError("experiment.models", str(exc)) from exc
        object.__setattr__(self, "models", forms)

    def cell_config(self, model: ReactionForm, p: int) -> SimConfig:
        return self.cfg.with_(grid=GridSpec(self.cfg.grid.dim, p), eps=2.0 / p, dt=1.0 / p**2,
                              form=ReactionForm(model))

    def to_dict(self) -> dict:
        return {"name": self.name, "sweep": list(self.sweep),
                "models": [m.value for m in self.models], "cfg": sim_config_to_dict(self.cfg)}


def _check_sweep(sweep: Sequence[int]) -> None:
    if not sweep:
        raise ConfigError("experiment.sweep", "sweep must be nonempty")
    for p in sweep:
        if p < 8 or p & (p - 1):
            raise ConfigError("experiment.sweep", f"{p} is not a power of two >= 8")
    if any(b <= a for a, b in zip(sweep, sweep[1:])):
        raise ConfigError("experiment.sweep", f"sweep {list(sweep)} is not strictly increasing")


def _template(name: str) -> dict:
    if name == "shrinking_circle":
        return {"grid": {"dim": 2, "p": 64}, "form": "classic_forced",
                "shape": {"kind": "circle", "center": [0.0, 0.0], "radius": 0.25},
                "observe_every": 16, "stop_on_extinction": True}
    if name == "forced_circle":
        return {"grid": {"dim": 2, "p": 64}, "form": "classic_forced",
                "shape": {"kind": "circle", "center": [0.0, 0.0], "radius": 0.25},
                "forcing": {"kind": "constant", "cg": 2.0},
                "observe_every": 16, "stop_on_extinction": True}
    if name == "two_circles_conserved":
        return {"grid": {"dim": 2, "p": 64}, "form": "classic_conserved",
                "shape": {"kind": "union_of_circles",
                          "members": [{"center": list(m.center), "radius": m.radius}
                                      for m in TWO_CIRCLES.members]},
                "observe_every": 16, "stop_on_extinction": True}
    if name == "forced_stationary_circle":
        return {"grid": {"dim": 2, "p": 256}, "form": "classic_conserved", "t_end": 0.01,
                "shape": {"kind": "circle", "center": [0.0, 0.0], "radius": 0.25},
                "forcing": {"kind": "radial_cosine", "cg": STATIONARY_CG, "frequency": 8.0},
                "observe_every": 32}
    if name == "torus_conserved":
        return {"grid": {"dim": 3, "p": 64}, "form": "classic_conserved", "t_end": 0.012,
                "shape": {"kind": "torus", "center": list(TORUS_SHAPE.center),
                          "major_radius": TORUS_SHAPE.major_radius,
                          "minor_radius": TORUS_SHAPE.minor_radius},
                "observe_every": 4}
    return {}


_DEFAULTS = {
    "shrinking_circle": ((64, 128, 256), ("classic_forced",)),
    "forced_circle": ((64, 128, 256), ("classic_forced", "modified_forced")),
    "two_circles_conserved": ((64, 128, 256), ("classic_conserved", "modified_conserved")),
    "forced_stationary_circle": ((256,), ("classic_conserved", "modified_conserved")),
    "torus_conserved": ((64,), ("classic_conserved", "modified_conserved")),
}


def _reference_extinction(name: str, cfg: SimConfig) -> float:
    if name == "two_circles_conserved":
        r, R = sorted(m.radius for m in cfg.shape.members)
        return two_circle_extinction_time(TwoCircleLaw(r, R))
    cg = cfg.forcing.cg if cfg.forcing.kind == "constant" else 0.0
    return circle_extinction_time(CircleLaw(cfg.shape.radius, cg))


def spec_from_dict(d: Mapping[str, Any]) -> ExperimentSpec:
    """Parse an ExperimentSpec mapping; ``cfg`` entries override the
    experiment's default template field by field."""
    allowed = {"name", "cfg", "sweep", "models"}
    extra = set(d) - allowed
    if extra:
        raise ConfigError("experiment.keys", f"unknown keys {sorted(extra)}")
    name = d.get("name")
    if name not in EXPERIMENTS:
        raise ConfigError("experiment.name", f"unknown experiment {name!r}; choose from {EXPERIMENTS}")
    sweep, models = _DEFAULTS.get(name, (None, None))
    sweep = tuple(int(p) for p in d.get("sweep", sweep or ()))
    models = tuple(d.get("models", models or ()))
    _check_sweep(sweep)
    merged = _template(name)
    merged.update(d.get("cfg") or {})
    merged["grid"] = {**merged.get("grid", {"dim": 2}), "p": sweep[0]}
    merged["eps"], merged["dt"] = 2.0 / sweep[0], 1.0 / sweep[0] ** 2
    if models:
        merged["form"] = models[0]
    if name in EXTINCTION_EXPERIMENTS and "t_end" not in merged:
        merged["t_end"] = 0.0
        probe = sim_config_from_dict(merged)
        factor = 2.0 if name == "two_circles_conserved" else 1.5
        merged["t_end"] = factor * _reference_extinction(name, probe)
    return ExperimentSpec(name=name, cfg=sim_config_from_dict(merged), sweep=sweep, models=models)


def default_spec(name: str, **overrides) -> ExperimentSpec:
    d = {"name": name}
    d.update(overrides)
    return spec_from_dict(d)


# -- running ----------------------------------------------------------------


@dataclass
class CellResult:
    experiment: str
    model: ReactionForm
    p: int
    eps: float
    dt: float
    quantities: dict[str, tuple[float, float]] = field(default_factory=dict)
    observations: list[Observation] = field(default_factory=list)
    extra: dict[str, list[float]] = field(default_factory=dict)
    terminated: str | None = None
    complete: bool = True
    reason: str = ""


def _rays(name: str, cfg: SimConfig) -> list[Ray] | None:
    if name == "forced_stationary_circle" and isinstance(cfg.shape, Circle):
        angles = np.linspace(0.0, 2.0 * math.pi, 8, endpoint=False)
        return [Ray(tuple(cfg.shape.center), (math.cos(a), math.sin(a))) for a in angles]
    return None


def run_cell(name: str, cfg: SimConfig, out_dir: Path | None = None) -> CellResult:
    """Run one (model, P) cell and evaluate its quantities."""
    rays = _rays(name, cfg)
    recorder = ObservationRecorder(cfg, rays)
    centre_values: list[float] = []
    centre = None
    if isinstance(cfg.shape, Torus):
        centre = np.asarray(cfg.shape.center, dtype=float)[None, :]

    def observer(state: SimState) -> None:
        recorder(state)
        if centre is not None:
            centre_values.append(float(_sample(state.u, centre)[0]))

    state = run(cfg, observer)
    cell = CellResult(name, cfg.form, cfg.grid.p, cfg.eps, cfg.dt,
                      observations=recorder.observations, terminated=state.terminated)
    if centre is not None:
        cell.extra["centre_value"] = centre_values
    if state.terminated == "degenerate":
        cell.complete, cell.reason = False, f"degenerate: {state.message}"
    obs = recorder.observations

    if name in EXTINCTION_EXPERIMENTS:
        ref = _reference_extinction(name, cfg)
        if state.terminated != "extinct":
            cell.complete = False
            cell.reason = cell.reason or f"no extinction before t_end = {cfg.t_end}"
            cell.quantities["extinction_time"] = (math.nan, ref)
        else:
            cell.quantities["extinction_time"] = (state.extinction_time, ref)
        if name == "two_circles_conserved":
            members = cfg.shape.members
            big = int(np.argmax([m.radius for m in members]))
            r_star = math.sqrt(sum(m.radius**2 for m in members))
            cell.quantities["large_radius_at_extinction"] = (obs[-1].radii[big], r_star)
            cell.quantities["volume_at_extinction"] = (obs[-1].volume_threshold, math.pi * r_star**2)
    elif name == "forced_stationary_circle":
        r0 = cfg.shape.radius
        mean_r = np.array([np.mean(o.radii) for o in obs])
        cell.quantities["final_radius"] = (float(mean_r[-1]), r0)
        cell.quantities["max_radius_drift"] = (float(np.max(np.abs(mean_r - r0))), 0.0)
    elif name == "torus_conserved":
        v0 = obs[0].volume_threshold
        drift = np.array([o.volume_threshold / v0 - 1.0 for o in obs])
        closed = [i for i, c in enumerate(centre_values) if c >= 0.5]
        t_topo = obs[closed[0]].time if closed else math.nan
        cell.quantities["topology_time"] = (t_topo, math.nan)
        cell.quantities["volume_drift_at_topology"] = (
            float(drift[closed[0]]) if closed else math.nan, 0.0)
        cell.quantities["max_volume_drift"] = (float(np.max(np.abs(drift))), 0.0)
    else:
        cell.quantities["mass_drift"] = (obs[-1].mass - obs[0].mass, 0.0)
        cell.quantities["volume_drift"] = (obs[-1].volume_threshold - obs[0].volume_threshold, 0.0)

    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        recorder.write_csv(out_dir / "observations.csv")
        write_field(state.u, out_dir / "final.pfmf", eps=cfg.eps, dt=cfg.dt,
                    time=state.time, model=cfg.form.value)
    return cell


def fit_slope(eps: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of log(error) against log(eps); needs >= 3 points."""
    eps = np.asarray(eps, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if eps.size < 3 or eps.size != errors.size:
        raise ValueError("slope fit needs at least three (eps, error) pairs")
    if not (np.all(eps > 0) and np.all(errors > 0) and np.all(np.isfinite(errors))):
        raise ValueError("slope fit needs positive finite errors")
    x, y = np.log(eps), np.log(errors)
    return float(np.polyfit(x, y, 1)[0])


def _abs_error(measured: float, reference: float) -> float:
    return abs(measured - reference) if math.isfinite(measured) and math.isfinite(reference) else math.nan


@dataclass
class ConvergenceReport:
    experiment: str
    cells: list[CellResult]
    slopes: dict[tuple[str, str], float] = field(default_factory=dict)

    @property
    def incomplete(self) -> list[CellResult]:
        return [c for c in self.cells if not c.complete]

    def cell(self, model, p: int) -> CellResult:
        model = ReactionForm(model)
        return next(c for c in self.cells if c.model is model and c.p == p)

    def errors(self, model, quantity: str) -> tuple[list[float], list[float]]:
        model = ReactionForm(model)
        rows = [(c.eps, _abs_error(*c.quantities[quantity])) for c in self.cells
                if c.model is model and quantity in c.quantities]
        rows.sort(reverse=True)
        return [r[0] for r in rows], [r[1] for r in rows]

    def rows(self) -> list[list[str]]:
        out = []
        for c in self.cells:
            for q, (measured, ref) in c.quantities.items():
                out.append([self.experiment, c.model.value, str(c.p), _fmt(c.eps), _fmt(c.dt), q,
                            _fmt(measured), _fmt(ref), _fmt(_abs_error(measured, ref))])
        for (model, q), slope in self.slopes.items():
            out.append([self.experiment, model, "", "", "", f"slope:{q}", _fmt(slope), "", ""])
        return out

    def write_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(REPORT_HEADER)
            writer.writerows(self.rows())


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _compute_slopes(report: ConvergenceReport) -> None:
    models = []
    for c in report.cells:
        if c.model.value not in models:
            models.append(c.model.value)
    for model in models:
        quantities = [q for c in report.cells if c.model.value == model for q in c.quantities]
        for q in dict.fromkeys(quantities):
            eps, errs = report.errors(model, q)
            if len(eps) < 3 or not all(math.isfinite(e) and e > 0 for e in errs):
                continue
            report.slopes[(model, q)] = fit_slope(eps, errs)


def run_experiment(spec: ExperimentSpec, out_dir=None, threads: int = 1) -> ConvergenceReport:
    """Run every (model, P) cell, then write report.csv and manifest.json."""
    out = Path(out_dir) if out_dir is not None else None
    jobs = [(m, p) for m in spec.models for p in spec.sweep]

    def work(job):
        model, p = job
        cfg = spec.cell_config(model, p)
        cell_dir = out / model.value / f"P{p}" if out is not None else None
        log.info("running %s %s P=%d", spec.name, model.value, p)
        return run_cell(spec.name, cfg, cell_dir)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cells = list(pool.map(work, jobs))
    else:
        cells = [work(j) for j in jobs]

    report = ConvergenceReport(spec.name, cells)
    _compute_slopes(report)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        report.write_csv(out / "report.csv")
        manifest = {
            "experiment": spec.to_dict(),
            "cells": [{"model": c.model.value, "P": c.p,
                       "status": "complete" if c.complete else "incomplete",
                       "terminated": c.terminated, "reason": c.reason} for c in cells],
        }
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return report
