"""Entry laws, matrix sampling, operator norms, and condition diagnostics."""

import math

import numpy as np
import pytest
import scipy.integrate as integrate
import scipy.stats as stats

from spinlab.disorder import (
    CENTERED_EXPONENTIAL,
    GAUSSIAN,
    RADEMACHER,
    CustomSampler,
    DisorderMatrix,
    condition_diagnostics,
    operator_norm,
    operator_norm_report,
    sample_matrix,
    validate_law,
)

# Quadrature oracle for E|Exp(1) - 1|^3; the closed form it matches is
# 12/e - 2.
_THIRD_CEXP_ORACLE = integrate.quad(
    lambda x: abs(x - 1.0) ** 3 * math.exp(-x), 0, np.inf
)[0]


def test_builtin_moment_declarations():
    assert GAUSSIAN.mean == 0.0 and GAUSSIAN.variance == 1.0
    assert RADEMACHER.mean == 0.0 and RADEMACHER.variance == 1.0
    assert CENTERED_EXPONENTIAL.mean == 0.0 and CENTERED_EXPONENTIAL.variance == 1.0
    assert GAUSSIAN.third_abs_moment == pytest.approx(math.sqrt(8 / math.pi), rel=1e-15)
    assert RADEMACHER.third_abs_moment == 1.0


def test_cexp_third_moment_matches_quadrature_oracle():
    closed = 12.0 / math.e - 2.0
    assert CENTERED_EXPONENTIAL.third_abs_moment == pytest.approx(closed, rel=1e-12)
    assert closed == pytest.approx(_THIRD_CEXP_ORACLE, rel=1e-9)


def test_mgf_analytic_forms():
    for theta in (0.1, 0.5, 0.9, -0.7):
        assert RADEMACHER.mgf(theta) == pytest.approx(math.cosh(theta), rel=1e-14)
        assert GAUSSIAN.mgf(theta) == pytest.approx(
            math.exp(theta**2 / 2), rel=1e-14
        )
        assert CENTERED_EXPONENTIAL.mgf(theta) == pytest.approx(
            math.exp(-theta) / (1 - theta), rel=1e-14
        )
    assert CENTERED_EXPONENTIAL.mgf(1.0) == math.inf
    assert CENTERED_EXPONENTIAL.mgf(1.5) == math.inf


def test_mgf_matches_quadrature_for_cexp():
    theta = 0.4
    oracle = integrate.quad(
        lambda x: math.exp(theta * (x - 1.0) - x), 0, np.inf
    )[0]
    assert CENTERED_EXPONENTIAL.mgf(theta) == pytest.approx(oracle, rel=1e-9)


def test_exp_abs_moment_against_quadrature():
    eps = 0.3
    gauss_oracle = integrate.quad(
        lambda x: math.exp(eps * abs(x)) * math.exp(-x * x / 2)
        / math.sqrt(2 * math.pi),
        -np.inf,
        np.inf,
    )[0]
    assert GAUSSIAN.exp_abs_moment(eps) == pytest.approx(gauss_oracle, rel=1e-9)
    cexp_oracle = integrate.quad(
        lambda x: math.exp(eps * abs(x - 1.0) - x), 0, np.inf
    )[0]
    assert CENTERED_EXPONENTIAL.exp_abs_moment(eps) == pytest.approx(
        cexp_oracle, rel=1e-9
    )
    assert RADEMACHER.exp_abs_moment(eps) == pytest.approx(math.exp(eps), rel=1e-14)


def test_rademacher_matrix_support():
    mat = sample_matrix(RADEMACHER, 2, seed=77)
    assert set(np.unique(mat.entries)) <= {-1.0, 1.0}


def test_gaussian_matrix_sample_moments():
    mat = sample_matrix(GAUSSIAN, 200, seed=2024)
    assert abs(mat.entries.mean()) < 4 / 200 * 4
    assert abs(mat.entries.var() - 1.0) < 0.05


def test_matrix_determinism():
    a = sample_matrix(GAUSSIAN, 31, seed=5)
    b = sample_matrix(GAUSSIAN, 31, seed=5)
    np.testing.assert_array_equal(a.entries, b.entries)
    c = sample_matrix(GAUSSIAN, 31, seed=6)
    assert not np.array_equal(a.entries, c.entries)


def test_matrix_entries_counter_addressed():
    # entry (i, j) depends only on (law, seed, i, j): a larger matrix with
    # the same seed extends the smaller one
    small = sample_matrix(GAUSSIAN, 5, seed=123).entries
    large = sample_matrix(GAUSSIAN, 9, seed=123).entries
    np.testing.assert_array_equal(large[:5, :5], small)


def test_scaled_view():
    mat = sample_matrix(RADEMACHER, 16, seed=1)
    np.testing.assert_allclose(
        mat.scaled(0.5), 0.5 / 4.0 * mat.entries, rtol=1e-15
    )


def test_operator_norm_identity_and_zero():
    n = 12
    eye = DisorderMatrix(math.sqrt(n) * np.eye(n), GAUSSIAN, seed=0)
    assert operator_norm(eye, beta=1.0, tol=1e-12) == pytest.approx(1.0, abs=1e-9)
    zero = DisorderMatrix(np.zeros((n, n)), GAUSSIAN, seed=0)
    assert operator_norm(zero, beta=1.0, tol=1e-12) == 0.0


def test_operator_norm_against_dense_svd():
    for n in (3, 8, 17, 33, 64):
        for seed in (0, 1):
            mat = sample_matrix(GAUSSIAN, n, seed=seed)
            report = operator_norm_report(mat, beta=1.3, tol=1e-10)
            oracle = np.linalg.svd(1.3 / math.sqrt(n) * mat.entries,
                                   compute_uv=False)[0]
            assert abs(report.value - oracle) <= 1e-10 * (1 + oracle) * 10
            assert report.lower <= oracle * (1 + 1e-12)
            assert report.upper >= oracle * (1 - 1e-12)


def test_operator_norm_report_brackets_value():
    mat = sample_matrix(RADEMACHER, 40, seed=9)
    rep = operator_norm_report(mat, beta=1.0, tol=1e-8)
    assert rep.lower <= rep.value <= rep.upper
    assert rep.iterations > 0


def test_validate_builtins_pass_without_sampling():
    for law in (GAUSSIAN, RADEMACHER):
        report = validate_law(law)
        assert report.passed and not report.empirical_only
        assert report.failures == ()
    report = validate_law(CENTERED_EXPONENTIAL)
    assert report.passed
    assert report.third_abs_moment == pytest.approx(12 / math.e - 2, rel=1e-12)


def test_validate_custom_with_good_declared_moments():
    def sampler(count, gen):
        return gen.standard_normal(count)

    law = CustomSampler("mygauss", sampler, mean=0.0, variance=1.0,
                        third_abs_moment=math.sqrt(8 / math.pi))
    report = validate_law(law, n_draws=200_000, seed=4)
    assert report.passed


def test_validate_custom_catches_wrong_declared_variance():
    def sampler(count, gen):
        return 2.0 * gen.standard_normal(count)

    law = CustomSampler("wide", sampler, mean=0.0, variance=1.0)
    report = validate_law(law, n_draws=200_000, seed=4)
    assert not report.passed
    assert any("variance" in f for f in report.failures)


def test_validate_cauchy_fails_by_divergence():
    def sampler(count, gen):
        return stats.cauchy.rvs(size=count, random_state=gen)

    law = CustomSampler("cauchy", sampler)
    report = validate_law(law, n_draws=400_000, seed=11)
    assert not report.passed
    assert report.empirical_only


def test_condition_diagnostics_rademacher():
    diag = condition_diagnostics(RADEMACHER, 100, gamma=2.25, eps=1.0,
                                 seeds=(0, 1))
    # sup log cosh(theta)/theta^2 <= 1/2, approached at theta -> 0
    assert diag.mgf_sup <= 0.5 + 1e-12
    assert diag.third_moment_scaled == pytest.approx(100 ** (-0.25), rel=1e-12)


def test_condition_diagnostics_gaussian_mgf_exact_half():
    diag = condition_diagnostics(GAUSSIAN, 10, eps=1.0, seeds=(0,))
    assert diag.mgf_sup == pytest.approx(0.5, rel=1e-12)


def test_condition_diagnostics_third_moment_decreasing_in_n():
    vals = [
        condition_diagnostics(RADEMACHER, n, gamma=2.25, seeds=(0,)).third_moment_scaled
        for n in (10, 40, 160)
    ]
    assert vals[0] > vals[1] > vals[2]


def test_condition_diagnostics_rejects_bad_gamma():
    with pytest.raises(ValueError):
        condition_diagnostics(RADEMACHER, 10, gamma=2.6)
    with pytest.raises(ValueError):
        condition_diagnostics(RADEMACHER, 10, gamma=1.9)


def test_custom_sampler_missing_mgf_marked_unavailable():
    def sampler(count, gen):
        return gen.uniform(-1.8, 1.8, count)

    law = CustomSampler("u", sampler, mean=0.0, variance=1.08)
    diag = condition_diagnostics(law, 10, seeds=(0,))
    assert diag.mgf_sup is None
