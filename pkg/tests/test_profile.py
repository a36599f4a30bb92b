import numpy as np
import pytest

from phasefield.errors import ProfileSolveError
from phasefield.potential import CW
from phasefield.profile import (
    bvp_residual, eta_rhs, q_prime, solve_eta, solve_xi, write_profile_csv, xi_rhs,
)


@pytest.fixture(scope="module")
def eta():
    return solve_eta()


@pytest.fixture(scope="module")
def xi():
    return solve_xi()


def test_eta_far_field(eta):
    # W''(0) = W''(1) = 1, so eta tends to c_W on both sides
    assert abs(eta.values[0] - 1 / 6) < 1e-3
    assert abs(eta.values[-1] - 1 / 6) < 1e-3


def test_eta_closed_form(eta):
    # direct substitution shows c_W + (2/3) q' solves the corrected problem
    exact = CW + (2.0 / 3.0) * q_prime(eta.s_values)
    assert np.max(np.abs(eta.values - exact)) < 1e-8


def test_centre_pinned(eta, xi):
    assert eta(0.0) == pytest.approx(0.0, abs=1e-12)
    assert xi(0.0) == pytest.approx(0.0, abs=1e-12)


def test_eta_residual_small(eta):
    assert np.max(np.abs(bvp_residual(eta, eta_rhs))) <= 1e-4


def test_xi_decay_bound(xi):
    s = xi.s_values
    weight = (1 + s**2) * np.abs(q_prime(s))
    mask = np.abs(s) <= 15  # beyond this both sides sit at roundoff
    c = np.max(np.abs(xi.values[mask]) / weight[mask])
    assert c <= 10


def test_xi_odd_symmetry(xi):
    # s q' is odd and W''(q(s)) is even, so xi is odd
    assert np.max(np.abs(xi.values + xi.values[::-1])) < 1e-10


def test_xi_residual_second_order():
    r = [np.max(np.abs(bvp_residual(solve_xi(n_points=n), xi_rhs))) for n in (1001, 2001)]
    assert 3.5 <= r[0] / r[1] <= 4.5


def test_table_interpolates_and_is_read_only(xi):
    s = xi.s_values[100]
    assert xi(s) == xi.values[100]
    assert not xi.values.flags.writeable
    assert xi.spacing == pytest.approx(40 / 8000)
    assert xi.s_values[xi.center_index] == 0.0


@pytest.mark.parametrize("kw", [{"half_width": 5.0}, {"n_points": 500}, {"n_points": 2000}, {"half_width": -1.0}])
def test_grid_validation(kw):
    with pytest.raises(ValueError):
        solve_eta(**kw)


def test_profile_solve_error_is_runtime():
    assert issubclass(ProfileSolveError, RuntimeError)


def test_csv(tmp_path, eta):
    p = tmp_path / "eta.csv"
    write_profile_csv(eta, p)
    lines = p.read_text().splitlines()
    assert lines[0] == "s,value,derivative"
    assert len(lines) == eta.n_points + 1
    s, v, d = map(float, lines[1].split(","))
    assert s == eta.s_values[0] and v == eta.values[0]
