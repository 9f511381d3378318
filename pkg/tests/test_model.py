"""Potentials, parameter validation, grids, and trajectory containers."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinlab.model import (
    DomainError,
    InitialLaw,
    ModelParams,
    PathEnsemble,
    confinement_check,
    custom_potential,
    double_well,
    grid_times,
    log_barrier,
    max_negative_curvature,
    point_mass,
    u1_double_prime,
    u1_eval,
    u1_prime,
    uniform_symmetric,
)


def test_double_well_critical_points():
    p = double_well(2.0)
    assert u1_prime(p, 1.0) == pytest.approx(0.0, abs=1e-15)
    assert u1_prime(p, -1.0) == pytest.approx(0.0, abs=1e-15)
    assert u1_prime(p, 0.0) == 0.0


def test_double_well_value_at_zero():
    # -log(s^2) with s = 2
    assert u1_eval(double_well(2.0), 0.0) == pytest.approx(-math.log(4), rel=1e-12)


def test_double_well_even():
    p = double_well(2.0)
    for x in np.linspace(0.0, 1.9, 40):
        assert u1_eval(p, x) == pytest.approx(u1_eval(p, -x), rel=1e-14)


def test_domain_error_at_and_beyond_boundary():
    p = double_well(2.0)
    for x in (2.0, -2.0, 2.5):
        with pytest.raises(DomainError):
            u1_eval(p, x)
        with pytest.raises(DomainError):
            u1_prime(p, x)


def test_derivatives_match_finite_differences():
    p = double_well(2.0)
    rng = np.random.default_rng(0)
    xs = rng.uniform(-1.8, 1.8, 100)
    h = 1e-6
    for x in xs:
        fd1 = (u1_eval(p, x + h) - u1_eval(p, x - h)) / (2 * h)
        assert u1_prime(p, x) == pytest.approx(fd1, rel=1e-6, abs=1e-6)
        fd2 = (u1_prime(p, x + h) - u1_prime(p, x - h)) / (2 * h)
        assert u1_double_prime(p, x) == pytest.approx(fd2, rel=1e-6, abs=1e-5)


def test_max_negative_curvature_double_well():
    # sup of -U1'' on (-2, 2) is attained at 0: 2 - 2 s^2/(s^2)^2 = 1.5 for s=2
    assert max_negative_curvature(double_well(2.0)) == pytest.approx(1.5, abs=1e-6)


def test_confinement_log_barrier_passes():
    rep = confinement_check(log_barrier(2.0))
    assert rep.passed
    assert np.all(np.diff(rep.values) > 0)


def test_confinement_double_well_passes():
    rep = confinement_check(double_well(2.0))
    assert rep.passed
    assert np.all(np.diff(rep.values) > 0)


def test_confinement_flat_potential_fails():
    flat = custom_potential(
        lambda x: 0.0 * x, lambda x: 0.0 * x, lambda x: 0.0 * x, 2.0
    )
    rep = confinement_check(flat)
    assert not rep.passed


def test_grid_times_examples():
    np.testing.assert_allclose(
        grid_times(ModelParams(1, 1.0, 2.0, 1.0, 2, 2, 0)),
        [0, 0.25, 0.5, 0.75, 1.0],
    )
    np.testing.assert_allclose(
        grid_times(ModelParams(1, 1.0, 2.0, 0.2, 2, 1, 0)), [0, 0.1, 0.2]
    )
    np.testing.assert_allclose(
        grid_times(ModelParams(1, 1.0, 2.0, 1.0, 1, 4, 0)),
        [0, 0.25, 0.5, 0.75, 1.0],
    )


@settings(deadline=None, max_examples=50)
@given(
    kappa=st.integers(min_value=1, max_value=20),
    m=st.integers(min_value=1, max_value=20),
    horizon=st.floats(min_value=0.1, max_value=50, allow_nan=False),
)
def test_freeze_points_on_grid_bit_exactly(kappa, m, horizon):
    params = ModelParams(1, 1.0, 2.0, horizon, kappa, m, 0)
    grid = grid_times(params)
    h = params.grid_step
    for k in range(kappa + 1):
        assert grid[k * m] == k * m * h
    assert grid[0] == 0.0


def test_model_params_validation():
    with pytest.raises(ValueError):
        ModelParams(0, 1.0, 2.0, 1.0, 1, 1, 0)
    with pytest.raises(ValueError):
        ModelParams(1, -0.5, 2.0, 1.0, 1, 1, 0)
    with pytest.raises(ValueError):
        ModelParams(1, 1.0, 2.0, 0.0, 1, 1, 0)
    with pytest.raises(ValueError):
        ModelParams(1, 1.0, 2.0, 1.0, 0, 1, 0)
    with pytest.raises(ValueError):
        ModelParams(1, 1.0, 2.0, 1.0, 1, 1, -1)


def test_initial_law_rejects_boundary_support():
    with pytest.raises(ValueError):
        point_mass(2.0, 2.0)
    with pytest.raises(ValueError):
        point_mass(-2.3, 2.0)
    with pytest.raises(ValueError):
        uniform_symmetric(2.0, 2.0)
    with pytest.raises(ValueError):
        uniform_symmetric(0.0, 2.0)
    assert isinstance(point_mass(1.9, 2.0), InitialLaw)


def test_path_ensemble_rejects_boundary_values():
    params = ModelParams(2, 1.0, 2.0, 1.0, 1, 2, 0)
    grid = grid_times(params)
    vals = np.zeros((2, 3))
    vals[1, 2] = 2.0
    with pytest.raises(ValueError):
        PathEnsemble(vals, grid, params)


def test_path_ensemble_shape_check_and_readonly():
    params = ModelParams(2, 1.0, 2.0, 1.0, 1, 2, 0)
    grid = grid_times(params)
    ens = PathEnsemble(np.zeros((2, 3)), grid, params)
    with pytest.raises(ValueError):
        PathEnsemble(np.zeros((3, 3)), grid, params)
    with pytest.raises(ValueError):
        ens.values[0, 0] = 1.0
