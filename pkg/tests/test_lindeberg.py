"""Comparison-bound tests: constants, closed forms, enumeration, certificates."""

import math

import numpy as np
import pytest
from scipy import integrate

from spinlab.disorder import CENTERED_EXPONENTIAL, GAUSSIAN, RADEMACHER, CustomSampler
from spinlab.lindeberg import (
    C0,
    GAUSSIAN_THIRD_ABS_MOMENT,
    QuadraticForm,
    certificate_suite,
    expectation_exact_discrete,
    expectation_mc,
    gaussian_expectation_exact,
    gaussian_mc_check,
    h_eval,
    lindeberg_bound,
    random_instance,
)


def test_c0_value_and_variational_characterization():
    # 6 C0 = sup_r e^{-r^2/2} (3 r + r^3); the maximizer is r = sqrt(3)
    r = np.linspace(0.0, 6.0, 2_000_001)
    sup = np.max(np.exp(-0.5 * r * r) * (3.0 * r + r**3))
    assert C0 == pytest.approx(sup / 6.0, rel=1e-10)
    assert C0 == pytest.approx(0.436585, abs=1e-6)


def test_h_eval_vector_and_batch():
    q = QuadraticForm(np.eye(2), np.zeros(2))
    assert h_eval(q, np.array([1.0, 1.0])) == pytest.approx(1.0, rel=1e-15)
    batch = np.array([[1.0, 1.0], [2.0, 0.0], [0.0, 0.0]])
    np.testing.assert_allclose(h_eval(q, batch), [1.0, 2.0, 0.0], rtol=1e-15)
    shifted = QuadraticForm(np.eye(2), np.array([1.0, 0.0]))
    assert h_eval(shifted, np.zeros(2)) == pytest.approx(0.5, rel=1e-15)


def test_quadratic_form_validates_shapes():
    with pytest.raises(ValueError):
        QuadraticForm(np.zeros(3), np.zeros(3))
    with pytest.raises(ValueError):
        QuadraticForm(np.zeros((2, 3)), np.zeros(3))
    with pytest.raises(ValueError):
        QuadraticForm(np.full((2, 2), np.nan), np.zeros(2))
    with pytest.raises(ValueError):
        h_eval(QuadraticForm(np.eye(2), np.zeros(2)), np.zeros(3))


def test_bound_single_unit_column():
    # one unit column: C0 (E|J|^3 + E|Z|^3) = C0 (1 + sqrt(8/pi))
    q = QuadraticForm(np.array([[1.0]]), np.zeros(1))
    expected = C0 * (1.0 + math.sqrt(8.0 / math.pi))
    assert lindeberg_bound(q, RADEMACHER) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(1.13327, abs=5e-6)


def test_bound_scales_as_three_halves_power():
    q1 = QuadraticForm(np.array([[0.3, -0.2], [0.1, 0.4]]), np.zeros(2))
    q2 = QuadraticForm(2.0 * q1.x_mat, np.zeros(2))
    b1 = lindeberg_bound(q1, GAUSSIAN)
    assert lindeberg_bound(q2, GAUSSIAN) == pytest.approx(8.0 * b1, rel=1e-12)


def test_bound_requires_declared_third_moment():
    bare = CustomSampler("bare", lambda count, gen: gen.standard_normal(count))
    with pytest.raises(ValueError):
        lindeberg_bound(QuadraticForm(np.eye(2), np.zeros(2)), bare)


def test_gaussian_exact_unit_instance():
    # X = [[1]], b = 0: E exp(-Z^2/2) = 1/sqrt(2)
    q = QuadraticForm(np.array([[1.0]]), np.zeros(1))
    g = gaussian_expectation_exact(q)
    assert g.value == pytest.approx(1.0 / math.sqrt(2.0), rel=1e-14)
    assert g.lower == pytest.approx(g.value, rel=1e-14)


def test_gaussian_exact_shifted_instance():
    # X = [[1]], b = 1: value e^{-1/4}/sqrt(2), lower e^{-1/2}/sqrt(2)
    q = QuadraticForm(np.array([[1.0]]), np.ones(1))
    g = gaussian_expectation_exact(q)
    assert g.value == pytest.approx(math.exp(-0.25) / math.sqrt(2.0), rel=1e-14)
    assert g.lower == pytest.approx(math.exp(-0.5) / math.sqrt(2.0), rel=1e-14)
    assert g.value >= g.lower


def test_gaussian_exact_zero_matrix_meets_lower_bound():
    q = QuadraticForm(np.zeros((1, 3)), np.array([0.7]))
    g = gaussian_expectation_exact(q)
    assert g.value == pytest.approx(math.exp(-0.5 * 0.49), rel=1e-14)
    assert g.value == pytest.approx(g.lower, rel=1e-14)


@pytest.mark.parametrize("x,b", [(0.8, 0.0), (1.3, -0.6), (0.2, 2.0)])
def test_gaussian_exact_matches_quadrature(x, b):
    q = QuadraticForm(np.array([[x]]), np.array([b]))
    oracle, _ = integrate.quad(
        lambda z: math.exp(-0.5 * (x * z - b) ** 2)
        * math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi),
        -np.inf, np.inf,
    )
    assert gaussian_expectation_exact(q).value == pytest.approx(oracle, rel=1e-10)


def test_discrete_exact_small_instances():
    q0 = QuadraticForm(np.array([[1.0]]), np.zeros(1))
    assert expectation_exact_discrete(q0) == pytest.approx(math.exp(-0.5), rel=1e-14)
    q1 = QuadraticForm(np.array([[1.0]]), np.ones(1))
    assert expectation_exact_discrete(q1) == pytest.approx(
        0.5 * (1.0 + math.exp(-2.0)), rel=1e-14
    )
    assert 0.5 * (1.0 + math.exp(-2.0)) == pytest.approx(0.567668, abs=5e-7)
    # two unit columns, b = 0: signs sum to -2, 0, 2 with weights 1/4, 1/2, 1/4
    q2 = QuadraticForm(np.array([[1.0, 1.0]]), np.zeros(1))
    assert expectation_exact_discrete(q2) == pytest.approx(
        0.5 + 0.5 * math.exp(-2.0), rel=1e-14
    )


def test_discrete_exact_guards():
    with pytest.raises(ValueError):
        expectation_exact_discrete(
            QuadraticForm(np.zeros((1, 21)), np.zeros(1)), RADEMACHER
        )
    with pytest.raises(ValueError):
        expectation_exact_discrete(
            QuadraticForm(np.eye(2), np.zeros(2)), GAUSSIAN
        )


def test_exact_routes_invariant_under_column_symmetries():
    # column permutations and sign flips leave X X^T and both laws invariant
    q = random_instance(5, 3)
    perm = np.random.default_rng(2).permutation(q.n)
    flips = np.where(np.arange(q.n) % 2 == 0, -1.0, 1.0)
    q_sym = QuadraticForm(q.x_mat[:, perm] * flips, q.b_vec)
    assert gaussian_expectation_exact(q_sym).value == pytest.approx(
        gaussian_expectation_exact(q).value, rel=1e-12
    )
    assert expectation_exact_discrete(q_sym) == pytest.approx(
        expectation_exact_discrete(q), rel=1e-12
    )


def test_sylvester_determinant_identity_on_instances():
    for idx in (0, 4, 9):
        q = random_instance(11, idx)
        lhs = np.linalg.det(np.eye(q.kappa) + q.x_mat @ q.x_mat.T)
        rhs = np.linalg.det(np.eye(q.n) + q.x_mat.T @ q.x_mat)
        assert lhs == pytest.approx(rhs, rel=1e-12)


def test_mc_matches_closed_form_and_enumeration():
    q = random_instance(17, 2)
    est, se = expectation_mc(q, GAUSSIAN, 200_000, seed=1)
    assert abs(est - gaussian_expectation_exact(q).value) < 4.0 * se
    est_r, se_r = expectation_mc(q, RADEMACHER, 200_000, seed=2)
    assert abs(est_r - expectation_exact_discrete(q)) < 4.0 * se_r


def test_mc_zero_matrix_has_zero_stderr():
    q = QuadraticForm(np.zeros((2, 3)), np.array([1.0, -0.5]))
    est, se = expectation_mc(q, GAUSSIAN, 2000, seed=0)
    assert est == pytest.approx(math.exp(-h_eval(q, np.zeros(3))), rel=1e-12)
    # degenerate integrand: stderr is zero up to cancellation noise
    assert se < 1e-9


def test_mc_is_deterministic_and_guards_sample_count():
    q = random_instance(3, 0)
    a = expectation_mc(q, CENTERED_EXPONENTIAL, 50_000, seed=9)
    b = expectation_mc(q, CENTERED_EXPONENTIAL, 50_000, seed=9)
    assert a == b
    with pytest.raises(ValueError):
        expectation_mc(q, GAUSSIAN, 999, seed=0)


def test_random_instance_shapes_scaling_and_determinism():
    for idx in range(20):
        q = random_instance(42, idx, kappa_max=3, n_max=12, beta=1.5,
                            horizon=2.0, s_bound=2.0)
        assert 1 <= q.kappa <= 3 and 1 <= q.n <= 12
        cap = 1.5 * math.sqrt(2.0 / (q.n * q.kappa)) * 2.0
        assert np.max(np.abs(q.x_mat)) <= cap
    q1 = random_instance(42, 7)
    q2 = random_instance(42, 7)
    np.testing.assert_array_equal(q1.x_mat, q2.x_mat)
    np.testing.assert_array_equal(q1.b_vec, q2.b_vec)
    assert not np.array_equal(q1.x_mat, random_instance(43, 7).x_mat)


def test_certificate_suite_small_run_all_pass():
    rows = certificate_suite(n_instances=40, master_seed=6)
    assert len(rows) == 40
    assert all(r.passed for r in rows)
    assert all(r.slack >= -1e-10 for r in rows)
    assert all(r.lower_ok for r in rows)
    again = certificate_suite(n_instances=40, master_seed=6)
    assert rows == again


def test_gaussian_mc_check_small_run():
    rows = gaussian_mc_check(n_instances=3, n_samples=50_000, master_seed=4)
    assert all(r.passed for r in rows)
    assert all(r.z_score <= 4.0 for r in rows)
