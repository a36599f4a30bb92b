import json
import math

import numpy as np
import pytest

from phasefield.errors import ConfigError
from phasefield.experiments import (
    ExperimentSpec, REPORT_HEADER, default_spec, fit_slope, run_experiment, spec_from_dict,
)
from phasefield.reaction import ReactionForm


def test_fit_slope_recovers_power():
    eps = np.array([2 / 64, 2 / 128, 2 / 256])
    assert fit_slope(eps, eps**2) == pytest.approx(2.0, abs=1e-6)
    assert fit_slope(eps, 3 * eps) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        fit_slope(eps[:2], eps[:2])
    with pytest.raises(ValueError):
        fit_slope(eps, [1.0, 0.0, 1.0])


@pytest.mark.parametrize("sweep", [[], [64, 64], [128, 64], [64, 96], [4, 8]])
def test_sweep_validation(sweep):
    with pytest.raises(ConfigError) as info:
        default_spec("shrinking_circle", sweep=sweep)
    assert info.value.invariant == "experiment.sweep"


def test_spec_parsing():
    with pytest.raises(ConfigError):
        spec_from_dict({"name": "nope"})
    with pytest.raises(ConfigError):
        spec_from_dict({"name": "shrinking_circle", "colour": 1})
    spec = default_spec("forced_circle")
    assert spec.sweep == (64, 128, 256)
    assert spec.models == (ReactionForm.CLASSIC_FORCED, ReactionForm.MODIFIED_FORCED)
    assert spec.cfg.t_end == pytest.approx(1.5 * 0.0482868, rel=1e-6)
    cell = spec.cell_config("modified_forced", 128)
    assert cell.eps == 2 / 128 and cell.dt == 1 / 128**2 and cell.grid.p == 128
    stationary = default_spec("forced_stationary_circle")
    assert stationary.cfg.forcing.cg == 25.0 and stationary.sweep == (256,)
    torus = default_spec("torus_conserved")
    assert torus.cfg.grid.dim == 3 and torus.sweep == (64,)
    custom = spec_from_dict({"name": "forced_circle", "cfg": {"forcing": {"kind": "constant", "cg": -2.0}}})
    assert custom.cfg.t_end == pytest.approx(1.5 * 0.0236337, rel=1e-6)


def test_custom_needs_full_config():
    with pytest.raises(ConfigError):
        spec_from_dict({"name": "custom", "sweep": [64], "models": ["classic_forced"]})
    spec = spec_from_dict({"name": "custom", "sweep": [64], "models": ["classic_forced"], "cfg": {
        "grid": {"dim": 2, "p": 64}, "t_end": 0.001, "form": "classic_forced",
        "shape": {"kind": "circle", "center": [0, 0], "radius": 0.2}}})
    assert isinstance(spec, ExperimentSpec)


def test_report_is_byte_identical_on_rerun(tmp_path):
    spec = default_spec("shrinking_circle", sweep=[64, 128])
    run_experiment(spec, tmp_path / "a")
    run_experiment(spec, tmp_path / "b", threads=2)
    a = (tmp_path / "a" / "report.csv").read_bytes()
    assert a == (tmp_path / "b" / "report.csv").read_bytes()
    assert a.decode().splitlines()[0] == ",".join(REPORT_HEADER)


def test_outputs_and_slopes(tmp_path):
    report = run_experiment(default_spec("two_circles_conserved"), tmp_path)
    for model in ("classic_conserved", "modified_conserved"):
        for p in (64, 128, 256):
            cell_dir = tmp_path / model / f"P{p}"
            assert (cell_dir / "observations.csv").exists()
            assert (cell_dir / "final.pfmf").exists() and (cell_dir / "final.pfmf.json").exists()
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert all(c["status"] == "complete" for c in manifest["cells"])
    assert report.slopes[("classic_conserved", "extinction_time")] < report.slopes[("modified_conserved", "extinction_time")]
    rows = (tmp_path / "report.csv").read_text().splitlines()
    assert sum(r.split(",")[5].startswith("slope:") for r in rows[1:]) == len(report.slopes)


def test_incomplete_cells_are_marked(tmp_path):
    spec = default_spec("shrinking_circle", sweep=[64], cfg={"t_end": 0.005})
    report = run_experiment(spec, tmp_path)
    assert len(report.incomplete) == 1
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["cells"][0]["status"] == "incomplete"
    assert "no extinction" in manifest["cells"][0]["reason"]
    measured = report.cells[0].quantities["extinction_time"][0]
    assert math.isnan(measured)
    assert not report.slopes


def test_stationary_circle_without_forcing(tmp_path):
    # with c_g = 0 a single circle is stationary under conserved flow
    spec = default_spec("forced_stationary_circle",
                        cfg={"forcing": {"kind": "radial_cosine", "cg": 0.0}, "t_end": 0.02})
    report = run_experiment(spec)
    h = 1 / 256
    for cell in report.cells:
        drift, _ = cell.quantities["max_radius_drift"]
        assert drift <= 2 * h
