"""Build SimConfig / ExperimentSpec objects from plain mappings (YAML or JSON)."""
from __future__ import annotations

from pathlib import Path
from typing import Any, Mapping

import yaml

from .errors import ConfigError
from .field import Circle, GridSpec, Torus, UnionOfCircles
from .reaction import ForcingSpec, ReactionForm
from .stepper import SimConfig

__all__ = ["load_mapping", "sim_config_from_dict", "sim_config_to_dict", "shape_from_dict", "shape_to_dict"]

SIM_KEYS = {"grid", "eps", "dt", "t_end", "form", "forcing", "shape", "observe_every", "stop_on_extinction"}


def load_mapping(path) -> dict:
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("config.syntax", f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config.syntax", f"{path}: top level must be a mapping")
    return data


def _unknown(d: Mapping, allowed: set, where: str) -> None:
    extra = set(d) - allowed
    if extra:
        raise ConfigError(f"{where}.keys", f"unknown keys {sorted(extra)}; allowed {sorted(allowed)}")


def shape_from_dict(d: Mapping[str, Any]):
    kind = d.get("kind")
    try:
        if kind in ("circle", "sphere"):
            _unknown(d, {"kind", "center", "radius"}, "shape")
            return Circle(tuple(map(float, d["center"])), float(d["radius"]))
        if kind == "union_of_circles":
            _unknown(d, {"kind", "members"}, "shape")
            members = tuple(Circle(tuple(map(float, m["center"])), float(m["radius"])) for m in d["members"])
            return UnionOfCircles(members)
        if kind == "torus":
            _unknown(d, {"kind", "center", "major_radius", "minor_radius"}, "shape")
            return Torus(tuple(map(float, d.get("center", (0, 0, 0)))),
                         float(d["major_radius"]), float(d["minor_radius"]))
    except KeyError as exc:
        raise ConfigError("shape", f"missing field {exc} for shape kind {kind!r}") from exc
    raise ConfigError("shape.kind", f"unknown shape kind {kind!r}")


def shape_to_dict(shape) -> dict:
    if isinstance(shape, Circle):
        return {"kind": "circle", "center": list(shape.center), "radius": shape.radius}
    if isinstance(shape, UnionOfCircles):
        return {"kind": "union_of_circles",
                "members": [{"center": list(m.center), "radius": m.radius} for m in shape.members]}
    return {"kind": "torus", "center": list(shape.center),
            "major_radius": shape.major_radius, "minor_radius": shape.minor_radius}


def forcing_from_dict(d: Mapping[str, Any] | None) -> ForcingSpec:
    if not d:
        return ForcingSpec()
    _unknown(d, {"kind", "cg", "frequency"}, "forcing")
    if d.get("kind") == "sampled":
        raise ConfigError("forcing.kind", "sampled forcing cannot be given in a config file")
    return ForcingSpec(kind=d.get("kind", "none"), cg=float(d.get("cg", 0.0)),
                       frequency=float(d.get("frequency", 8.0)))


def sim_config_from_dict(d: Mapping[str, Any]) -> SimConfig:
    """Parse a SimConfig mapping.

    ``eps`` and ``dt`` default to 2/P and 1/P^2 when omitted.
    """
    _unknown(d, SIM_KEYS, "cfg")
    for key in ("grid", "t_end", "form", "shape"):
        if key not in d:
            raise ConfigError(f"cfg.{key}", f"missing required field {key!r}")
    g = d["grid"]
    _unknown(g, {"dim", "p"}, "grid")
    grid = GridSpec(int(g.get("dim", 2)), int(g["p"]))
    try:
        form = ReactionForm(d["form"])
    except ValueError as exc:
        raise ConfigError("cfg.form", f"unknown reaction form {d['form']!r}") from exc
    eps = d.get("eps")
    dt = d.get("dt")
    return SimConfig(
        grid=grid,
        eps=2.0 / grid.p if eps is None else float(eps),
        dt=1.0 / grid.p**2 if dt is None else float(dt),
        t_end=float(d["t_end"]),
        form=form,
        shape=shape_from_dict(d["shape"]),
        forcing=forcing_from_dict(d.get("forcing")),
        observe_every=int(d.get("observe_every", 1)),
        stop_on_extinction=bool(d.get("stop_on_extinction", False)),
    )


def sim_config_to_dict(cfg: SimConfig) -> dict:
    return {
        "grid": {"dim": cfg.grid.dim, "p": cfg.grid.p},
        "eps": cfg.eps,
        "dt": cfg.dt,
        "t_end": cfg.t_end,
        "form": cfg.form.value,
        "forcing": cfg.forcing.to_dict(),
        "shape": shape_to_dict(cfg.shape),
        "observe_every": cfg.observe_every,
        "stop_on_extinction": cfg.stop_on_extinction,
    }
