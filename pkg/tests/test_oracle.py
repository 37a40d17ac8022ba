import numpy as np
import pytest
from scipy import stats

from bkt.covariance import estimate_sigma
from bkt.errors import ConfigError, CovarianceSingularError
from bkt.kernel import witness_state
from bkt.likelihood import loglik_alt, loglik_null, r_matrix
from bkt.oracle import (
    _check_likelihood,
    _random_instance,
    dense_gauss_logpdf,
    dense_w,
    dense_w_loops,
    run_oracle_suite,
    vec,
)
from bkt.runner import run_check


def test_kron_and_loop_assembly_agree(rng):
    sigma = rng.standard_normal((3, 3))
    r = rng.standard_normal((3, 3))
    np.testing.assert_array_equal(dense_w(sigma, r, 4).w, dense_w_loops(sigma, r, 4).w)


def test_vec_stacks_columns():
    g = np.array([[1.0, 2.0], [3.0, 4.0]])
    np.testing.assert_array_equal(vec(g), [1.0, 3.0, 2.0, 4.0])


def test_dense_logpdf_matches_scipy(rng):
    a = rng.standard_normal((4, 4))
    cov = a @ a.T + np.eye(4)
    v, mean = rng.standard_normal(4), rng.standard_normal(4)
    expected = stats.multivariate_normal(mean=mean, cov=cov).logpdf(v)
    assert dense_gauss_logpdf(v, mean, cov) == pytest.approx(expected, rel=1e-12)


def test_dense_logpdf_rejects_singular():
    with pytest.raises(CovarianceSingularError):
        dense_gauss_logpdf(np.zeros(2), np.zeros(2), np.zeros((2, 2)))


def test_dense_size_limit():
    with pytest.raises(ConfigError):
        dense_w(np.eye(65), np.eye(65), 64)


def test_suite_passes_on_efficient_implementation():
    report = run_oracle_suite(instances=40, seed=1)
    failed = [(r.name, r.max_error) for r in report.results if not r.passed]
    assert report.passed, failed
    names = {r.name for r in report.results}
    assert {"loglik_null vs dense", "loglik_alt vs dense", "kron_logdet vs dense",
            "kron_quadform vs dense", "remark_quadform vs kron_quadform"} <= names


def test_suite_reports_both_label_conventions():
    notes = run_oracle_suite(instances=5, seed=0).notes
    assert notes["p_h1_adopted"] + notes["p_h1_literal"] == pytest.approx(1.0)
    assert np.isfinite(notes["log_bf"])


def test_suite_detects_perturbed_likelihood():
    report = run_oracle_suite(instances=20, seed=2, perturbation=1e-3)
    failed = {r.name for r in report.results if not r.passed}
    assert {"loglik_null vs dense", "loglik_alt vs dense"} <= failed


def test_check_exit_codes():
    assert run_check(instances=20, seed=0)[0] == 0
    code, report = run_check(instances=20, seed=0, perturbation=1e-3)
    assert code != 0
    assert not report.passed


def test_likelihood_instances_have_more_rows_than_eval_points():
    rng = np.random.default_rng(5)
    for _ in range(50):
        data, z, p = _random_instance(rng)
        assert z.s + 2 <= data.n <= 10
        assert 2 * data.dim <= z.s <= 6
        assert 0.05 <= p.theta <= 20.0


def test_likelihood_check_uses_pipeline_matrices():
    """比較は estimate_sigma と r_matrix そのままの行列で行う (底上げしない)"""
    seen = []

    def null(data, z, p, sigma, **kwargs):
        expected = estimate_sigma(witness_state(data, z, p), data.n, sigma.method).sigma
        np.testing.assert_array_equal(sigma.sigma, expected)
        seen.append("null")
        return loglik_null(data, z, p, sigma, **kwargs)

    def alt(data, z, p, sigma, r, **kwargs):
        np.testing.assert_array_equal(r, r_matrix(z, p))
        seen.append("alt")
        return loglik_alt(data, z, p, sigma, r, **kwargs)

    results = _check_likelihood(np.random.default_rng(3), 30, 0.0, null, alt)
    assert seen.count("null") == seen.count("alt") == 30
    assert all(r.passed for r in results), [(r.name, r.max_error) for r in results]
