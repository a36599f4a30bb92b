import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad, solve_ivp

from phasefield.reference import (
    CircleLaw, TwoCircleLaw, circle_extinction_time, circle_extinction_time_rk4, circle_radius,
    circle_trajectory, rk4_integrate, two_circle_extinction_rk4, two_circle_extinction_time,
    two_circle_solution, two_circle_trajectory, write_trajectory_csv,
)


def quad_extinction(r0, cg):
    # time to shrink from r0 to 0 under dR/dt = -1/R + cg
    return quad(lambda r: 1.0 / (1.0 / r - cg), 0.0, r0, epsabs=1e-14, epsrel=1e-13)[0]


def test_shrinking_circle_reference():
    assert circle_extinction_time(CircleLaw(0.25)) == 0.03125
    assert circle_extinction_time_rk4(CircleLaw(0.25)) == pytest.approx(0.03125, abs=1e-9)


@pytest.mark.parametrize("cg,expected", [(2.0, 0.0482868), (-2.0, 0.0236337)])
def test_forced_circle_reference(cg, expected):
    law = CircleLaw(0.25, cg)
    t = circle_extinction_time(law)
    assert t == pytest.approx(expected, abs=5e-8)
    assert t == pytest.approx(quad_extinction(0.25, cg), rel=1e-10)
    assert circle_extinction_time_rk4(law) == pytest.approx(t, abs=1e-9)


@given(st.floats(0.05, 0.4), st.floats(-5.0, 2.0))
def test_closed_form_matches_quadrature(r0, cg):
    law = CircleLaw(r0, cg)
    assert circle_extinction_time(law) == pytest.approx(quad_extinction(r0, cg), rel=1e-8)


def test_non_shrinking_circle_rejected():
    with pytest.raises(ValueError):
        circle_extinction_time(CircleLaw(0.25, 4.0))
    with pytest.raises(ValueError):
        CircleLaw(0.0)


def test_circle_radius():
    law = CircleLaw(0.25)
    assert circle_radius(law, 0.01) == pytest.approx(math.sqrt(0.0625 - 0.02))
    with pytest.raises(ValueError):
        circle_radius(law, 0.04)
    forced = CircleLaw(0.25, 2.0)
    sol = solve_ivp(forced.rhs, (0, 0.03), forced.initial, rtol=1e-12, atol=1e-14)
    assert circle_radius(forced, 0.03, h=1e-5) == pytest.approx(sol.y[0, -1], abs=1e-9)
    times, radii = circle_trajectory(forced, 0.03, h=1e-5, keep=100)
    assert times[0] == 0 and times[-1] == pytest.approx(0.03) and radii[0] == 0.25


def test_two_circle_reference():
    law = TwoCircleLaw(0.1, 0.15)
    t = two_circle_extinction_time(law)
    assert t == pytest.approx(0.0133, abs=5e-5)
    t_rk, big = two_circle_extinction_rk4(law)
    assert t_rk == pytest.approx(t, abs=1e-9)
    assert big == pytest.approx(0.180278, abs=1e-6)
    assert big == pytest.approx(law.final_radius, abs=1e-12)


def test_two_circle_area_invariant():
    law = TwoCircleLaw(0.1, 0.15)
    times, r, R = two_circle_trajectory(law, 0.013, h=1e-6, keep=1000)
    assert np.max(np.abs(r**2 + R**2 - 0.0325)) < 1e-14
    assert np.all(np.diff(r) < 0) and np.all(np.diff(R) > 0)
    sol = solve_ivp(law.rhs, (0, 0.01), law.initial, rtol=1e-12, atol=1e-14)
    assert two_circle_solution(law, 0.01) == pytest.approx(tuple(sol.y[:, -1]), abs=1e-9)
    with pytest.raises(ValueError):
        TwoCircleLaw(0.15, 0.1)


def test_rk4_order():
    f = lambda t, y: -y
    errs = [abs(rk4_integrate(f, [1.0], 1.0, h)[1][-1, 0] - math.exp(-1)) for h in (0.1, 0.05)]
    assert 14 < errs[0] / errs[1] < 18


def test_rk4_lands_on_end_time():
    times, states = rk4_integrate(lambda t, y: np.ones_like(y), [0.0], 0.35, 0.1, keep=1)
    assert times[-1] == 0.35 and states[-1, 0] == pytest.approx(0.35)


def test_trajectory_csv(tmp_path):
    path = tmp_path / "traj.csv"
    write_trajectory_csv(path, [0.0, 1.0], [0.2, 0.1])
    assert path.read_text().splitlines() == ["time,r,R", "0,0.20000000000000001,", "1,0.10000000000000001,"]
