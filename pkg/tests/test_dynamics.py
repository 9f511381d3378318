"""Integrator tests: determinism, coupling identities, safeguard, weak order."""

import math

import numpy as np
import pytest

from spinlab.disorder import GAUSSIAN, RADEMACHER, DisorderMatrix, sample_matrix
from spinlab.dynamics import (
    CouplingStats,
    SafeguardError,
    coupling_envelope,
    envelope_violated,
    sample_initial,
    simulate_coupled,
    simulate_frozen,
    simulate_full,
)
from spinlab.model import (
    ModelParams,
    custom_potential,
    double_well,
    point_mass,
    uniform_symmetric,
)
from spinlab.streams import BrownianStream, CounterStream


def _params(n=10, beta=1.0, s=2.0, horizon=1.0, kappa=5, substeps=4, seed=7):
    return ModelParams(n, beta, s, horizon, kappa, substeps, seed)


def test_sample_initial_point_mass_consumes_no_randomness():
    law = point_mass(0.3, 2.0)
    x = sample_initial(law, 8, CounterStream(1, "init-test"))
    np.testing.assert_array_equal(x, np.full(8, 0.3))


def test_sample_initial_uniform_bounded_and_centered():
    law = uniform_symmetric(1.5, 2.0)
    x = sample_initial(law, 20_000, CounterStream(1, "init-test"))
    assert np.all(np.abs(x) < 1.5)
    assert abs(x.mean()) < 0.03
    assert abs(x.var() - 1.5**2 / 3.0) < 0.02


def test_no_matrix_equals_zero_matrix_bitwise():
    p = _params()
    pot = double_well(2.0)
    init = uniform_symmetric(1.0, 2.0)
    zero = DisorderMatrix(np.zeros((p.n_particles, p.n_particles)), GAUSSIAN, seed=0)
    a = simulate_full(p, pot, None, init, replica=2)
    b = simulate_full(p, pot, zero, init, replica=2)
    np.testing.assert_array_equal(a.values, b.values)


def test_beta_zero_ignores_disorder_bitwise():
    p0 = _params(beta=0.0)
    pot = double_well(2.0)
    init = uniform_symmetric(1.0, 2.0)
    mat = sample_matrix(RADEMACHER, p0.n_particles, seed=11)
    a = simulate_full(p0, pot, mat, init, replica=0)
    b = simulate_full(p0, pot, None, init, replica=0)
    np.testing.assert_array_equal(a.values, b.values)


def test_frozen_with_one_substep_is_the_full_dynamics():
    # refresh_every = substeps = 1 must take the identical code path
    p = _params(substeps=1, kappa=20)
    pot = double_well(2.0)
    init = uniform_symmetric(1.0, 2.0)
    mat = sample_matrix(GAUSSIAN, p.n_particles, seed=3)
    full = simulate_full(p, pot, mat, init, replica=1)
    frozen = simulate_frozen(p, pot, mat, init, replica=1)
    np.testing.assert_array_equal(full.values, frozen.values)


def test_coupled_without_interaction_has_zero_distance():
    p = _params(beta=0.0)
    pot = double_well(2.0)
    init = uniform_symmetric(1.0, 2.0)
    full, frozen, stats = simulate_coupled(p, pot, None, init, replica=0)
    np.testing.assert_array_equal(full.values, frozen.values)
    assert stats.msd == 0.0
    assert np.all(stats.r_t == 0.0)


def test_coupled_msd_matches_definition():
    """msd must equal (1/(N T)) trapezoid of ||X - X~||^2 over the grid."""
    p = _params(n=20, kappa=4, substeps=5)
    pot = double_well(2.0)
    init = uniform_symmetric(1.0, 2.0)
    mat = sample_matrix(RADEMACHER, p.n_particles, seed=5)
    full, frozen, stats = simulate_coupled(p, pot, mat, init, replica=4)
    diff2 = np.sum((frozen.values - full.values) ** 2, axis=0)
    expected = np.trapezoid(diff2, dx=p.grid_step) / (p.n_particles * p.horizon)
    assert stats.msd == pytest.approx(expected, rel=1e-12)
    assert stats.msd > 0.0


def test_coupled_l_t_vanishes_at_freeze_points():
    p = _params(n=6, kappa=5, substeps=4)
    pot = double_well(2.0)
    init = uniform_symmetric(1.0, 2.0)
    mat = sample_matrix(GAUSSIAN, p.n_particles, seed=9)
    _, _, stats = simulate_coupled(p, pot, mat, init, replica=0)
    for k in range(p.kappa + 1):
        assert stats.l_t[k * p.substeps] == 0.0


def test_shared_streams_same_initials_different_paths():
    # same replica index reuses initial draws and increments across matrices
    p = _params()
    pot = double_well(2.0)
    init = uniform_symmetric(1.0, 2.0)
    a = simulate_full(p, pot, sample_matrix(GAUSSIAN, p.n_particles, seed=1), init, replica=6)
    b = simulate_full(p, pot, sample_matrix(RADEMACHER, p.n_particles, seed=2), init, replica=6)
    np.testing.assert_array_equal(a.values[:, 0], b.values[:, 0])
    assert not np.array_equal(a.values[:, 1:], b.values[:, 1:])


def test_simulation_is_deterministic():
    p = _params()
    pot = double_well(2.0)
    init = uniform_symmetric(1.0, 2.0)
    mat = sample_matrix(GAUSSIAN, p.n_particles, seed=8)
    a = simulate_full(p, pot, mat, init, replica=5)
    b = simulate_full(p, pot, mat, init, replica=5)
    np.testing.assert_array_equal(a.values, b.values)
    c = simulate_full(p, pot, mat, init, replica=6)
    assert not np.array_equal(a.values, c.values)


def test_trajectories_stay_strictly_inside_even_with_coarse_steps():
    # tight box and coarse grid: per-step noise sd 0.32 against walls at 1
    p = ModelParams(50, 0.0, 1.0, 1.0, 5, 2, 31)
    pot = double_well(1.0)
    init = uniform_symmetric(0.9, 1.0)
    ens = simulate_full(p, pot, None, init, replica=0)
    assert np.all(np.abs(ens.values) < 2.0)
    assert ens.safeguard_activations > 0


def test_safeguard_raises_loudly_when_dynamics_escape():
    # outward drift: the true solution exits the box, refinement cannot save it
    repel = custom_potential(
        lambda x: -25.0 * x**2, lambda x: -50.0 * x, lambda x: -50.0 + 0.0 * x, 1.0
    )
    p = ModelParams(1, 0.0, 1.0, 1.0, 10, 1, 17)
    init = point_mass(0.5, 1.0)
    with pytest.raises(SafeguardError):
        simulate_full(p, repel, None, init, replica=0)


def test_coupling_envelope_examples():
    assert coupling_envelope(1.0, 1.0, 0.1, 100, [0.0])[0] == 0.0
    # (3 a2 rho sqrt(N) / (a2 + c)) (e^{(a2+c) t} - 1) at t = 1
    val = coupling_envelope(1.0, 1.0, 0.1, 100, [1.0])[0]
    assert val == pytest.approx(1.5 * math.expm1(2.0), rel=1e-12)
    assert val == pytest.approx(9.5836, abs=5e-4)


def test_coupling_envelope_monotone_and_linear_limit():
    t = np.linspace(0.0, 2.0, 41)
    env = coupling_envelope(0.7, 1.5, 0.2, 64, t)
    assert np.all(np.diff(env) > 0)
    # rate -> 0 degenerates to amp * t
    lin = coupling_envelope(0.5, -0.5, 0.2, 64, t)
    np.testing.assert_allclose(lin, 3.0 * 0.5 * 0.2 * 8.0 * t, rtol=1e-12)


def test_envelope_violation_detection_and_claim_window():
    times = np.linspace(0.0, 1.0, 11)
    env = coupling_envelope(1.0, 1.0, 0.1, 100, times)
    below = CouplingStats(env * 0.5, 0.0, np.zeros(11))
    assert not envelope_violated(below, times, 1.0, 1.0, 0.1, 100)
    above = CouplingStats(env + 0.1, 0.0, np.zeros(11))
    assert envelope_violated(above, times, 1.0, 1.0, 0.1, 100)
    # once l_t leaves the 3 rho sqrt(N) tube the bound is no longer claimed
    l_t = np.zeros(11)
    l_t[4:] = 10.0 * 0.1 * 10.0
    late = CouplingStats(np.where(np.arange(11) >= 5, env + 1.0, 0.0), 0.0, l_t)
    assert not envelope_violated(late, times, 1.0, 1.0, 0.1, 100)


def test_weak_error_halves_with_step():
    """Euler bias against the exact discrete OU recursion shrinks like h.

    Both recursions consume the identical addressed increments, so the
    Monte Carlo noise in the mean difference is O(h/sqrt(N)) and the
    deterministic O(h) bias dominates.
    """
    ou = custom_potential(
        lambda x: 0.5 * x**2, lambda x: x, lambda x: 1.0 + 0.0 * x, 50.0
    )
    init = point_mass(1.0, 50.0)

    def mean_bias(substeps):
        p = ModelParams(20_000, 0.0, 50.0, 1.0, 10, substeps, 23)
        h = p.grid_step
        euler = simulate_full(p, ou, None, init, replica=0).values[:, -1]
        z = BrownianStream(p.master_seed, 0).increments(
            p.n_particles, p.n_steps, h
        ) / math.sqrt(h)
        x = np.full(p.n_particles, 1.0)
        decay = math.exp(-h)
        noise = math.sqrt((1.0 - math.exp(-2.0 * h)) / 2.0)
        for g in range(p.n_steps):
            x = x * decay + noise * z[:, g]
        return float(np.mean(euler - x))

    coarse = mean_bias(1)
    fine = mean_bias(2)
    assert abs(coarse) > 1e-3
    assert 1.7 < abs(coarse / fine) < 2.4
