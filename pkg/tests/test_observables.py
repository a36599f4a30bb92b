import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from phasefield.field import Circle, GridSpec, ScalarField, Torus, UnionOfCircles, init_phase_field
from phasefield.observables import (
    ObservationRecorder, Ray, component_mask, component_max, default_rays, measure,
    radius_along_ray, threshold_volume, write_observations_csv,
)
from phasefield.stepper import SimConfig, run


def circle_field(p, radius, center=(0.0, 0.0)):
    g = GridSpec(2, p)
    return init_phase_field(g, Circle(center, radius), 2 / p)


@given(st.floats(0.0, 2 * math.pi), st.floats(0.1, 0.3))
def test_radius_along_ray(angle, radius):
    u = circle_field(128, radius)
    r = radius_along_ray(u, (0.0, 0.0), (math.cos(angle), math.sin(angle)))
    assert r == pytest.approx(radius, abs=0.1 / 128)


def test_radius_degenerate_cases():
    g = GridSpec(2, 32)
    assert radius_along_ray(ScalarField.constant(g, 0.0), (0, 0), (1, 0)) == 0.0
    assert radius_along_ray(ScalarField.constant(g, 1.0), (0, 0), (1, 0)) == 0.0
    with pytest.raises(ValueError):
        Ray((0, 0), (0, 0))


@pytest.mark.parametrize("radius", [0.1, 0.2, 0.3])
def test_threshold_volume_circle(radius):
    u = circle_field(128, radius)
    assert threshold_volume(u) == pytest.approx(math.pi * radius**2, rel=2e-3)


@pytest.mark.parametrize("p", [64, 128, 256])
@pytest.mark.parametrize("radius", [0.1, 0.2, 0.25])
def test_threshold_volume_subcell_accuracy(p, radius):
    # plain cell counting errs by a sizeable fraction of perimeter * h; the
    # sub-cell correction must do much better
    err = abs(threshold_volume(circle_field(p, radius)) - math.pi * radius**2)
    assert err <= 0.05 * (2 * math.pi * radius) / p


@given(st.floats(0.05, 0.45))
def test_threshold_volume_slab_exact(a):
    # periodic tent field 1/2 + a - |x| is linear across both crossings |x| = a
    g = GridSpec(2, 32)
    x, y = g.coordinates()
    data = np.broadcast_to(0.5 + a - np.abs(x) + 0 * y, g.shape)
    u = ScalarField(g, data.copy())
    assert threshold_volume(u) == pytest.approx(2 * a, abs=1e-12)


def test_threshold_volume_bounds():
    g = GridSpec(3, 8)
    assert threshold_volume(ScalarField.constant(g, 1.0)) == pytest.approx(1.0)
    assert threshold_volume(ScalarField.constant(g, 0.0)) == 0.0


def test_default_rays():
    (ray,) = default_rays(Circle((0.1, 0.0), 0.2))
    assert ray.origin == (0.1, 0.0) and ray.direction == (1.0, 0.0)
    rays = default_rays(UnionOfCircles((Circle((-0.2, 0.0), 0.1), Circle((0.2, 0.0), 0.15))))
    assert rays[0].direction == pytest.approx((-1.0, 0.0)) and rays[1].direction == pytest.approx((1.0, 0.0))
    rays = default_rays(Torus((0, 0, 0), 0.22, 0.12))
    assert rays[0].origin == (0.22, 0, 0) and len(rays) == 2


def test_component_mask_is_voronoi_of_smallest():
    g = GridSpec(2, 64)
    shape = UnionOfCircles((Circle((-0.2, 0.0), 0.1), Circle((0.2, 0.0), 0.15)))
    mask = component_mask(g, shape)
    x, _ = g.coordinates()
    assert np.array_equal(mask, np.broadcast_to(x <= 0, g.shape))
    assert component_mask(g, Circle((0, 0), 0.2)) is None
    u = init_phase_field(g, shape, 2 / 64)
    assert component_max(u, mask) > 0.9


def test_measure_on_circle():
    u = circle_field(256, 0.25)
    obs = measure(u, ScalarField.constant(u.grid, 0.0), 2 / 256, default_rays(Circle((0, 0), 0.25)), time=0.5)
    assert obs.time == 0.5
    assert obs.g_tilde_eps == pytest.approx(4.0, rel=1e-3)
    assert obs.radii[0] == pytest.approx(0.25, abs=1e-3)
    assert 0 <= obs.volume_threshold <= 1
    assert obs.min_u >= 0 and obs.max_u <= 1


def test_measure_degenerate_field_gives_nan():
    g = GridSpec(2, 16)
    obs = measure(ScalarField.constant(g, 1.0), ScalarField.constant(g, 0.0), 0.1)
    assert math.isnan(obs.g_tilde_eps) and obs.g_eps == 0.0


def test_recorder_and_csv(tmp_path):
    c = SimConfig(GridSpec(2, 64), 2 / 64, 1 / 64**2, 4 / 64**2, "classic_forced", Circle((0, 0), 0.25))
    rec = ObservationRecorder(c)
    run(c, rec)
    assert len(rec.observations) == 5
    path = tmp_path / "obs.csv"
    rec.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "time,mass,volume,r0,g_eps,g_tilde_eps,max_u,min_u"
    assert len(lines) == 6
    assert float(lines[1].split(",")[1]) == rec.observations[0].mass
    write_observations_csv([], tmp_path / "empty.csv")
