import numpy as np
import pytest

from bkt.covariance import RIDGE_SCALE, estimate_sigma, psd_repair, ridge_for, sigma_method1, sigma_method2
from bkt.errors import InputError
from bkt.kernel import witness_state
from bkt.models import CovEstimate, EvalPoints, KernelParam, PairedDataset, SigmaMethod


@pytest.fixture
def state(shifted_1d, eval_points_1d):
    return witness_state(shifted_1d, eval_points_1d, KernelParam(0.7))


def _centering(n):
    return np.eye(n) - np.ones((n, n)) / n


def test_method2_is_biased_sample_covariance_of_g(state):
    cov = sigma_method2(state, state.n)
    np.testing.assert_allclose(cov.sigma, np.cov(state.g, bias=True), atol=1e-14)
    assert cov.method is SigmaMethod.METHOD2


def test_method1_matches_explicit_centering_matrix(state):
    h = _centering(state.n)
    expected = (state.k_zx @ h @ state.k_zx.T + state.k_zy @ h @ state.k_zy.T) / state.n
    np.testing.assert_allclose(sigma_method1(state, state.n).sigma, expected, atol=1e-13)


def test_methods_differ_by_cross_terms(state):
    n = state.n
    h = _centering(n)
    cross = (state.k_zx @ h @ state.k_zy.T + state.k_zy @ h @ state.k_zx.T) / n
    diff = sigma_method1(state, n).sigma - sigma_method2(state, n).sigma
    np.testing.assert_allclose(diff, cross, atol=1e-13)


def test_method2_is_psd(rng):
    for _ in range(10):
        n = int(rng.integers(2, 15))
        data = PairedDataset(x=rng.standard_normal((n, 2)), y=rng.standard_normal((n, 2)))
        st = witness_state(data, EvalPoints(z=rng.standard_normal((8, 2))), KernelParam(1.0))
        sigma = sigma_method2(st, n).sigma
        np.testing.assert_array_equal(sigma, sigma.T)
        assert np.linalg.eigvalsh(sigma)[0] >= -1e-12


def test_covariance_needs_two_rows():
    data = PairedDataset(x=[[0.0]], y=[[1.0]])
    st = witness_state(data, EvalPoints(z=[[0.0], [1.0]]), KernelParam(1.0))
    with pytest.raises(InputError):
        sigma_method2(st, 1)
    with pytest.raises(InputError):
        sigma_method1(st, 1)


def test_covariance_rejects_wrong_n(state):
    with pytest.raises(InputError):
        sigma_method2(state, state.n + 1)


class TestPsdRepair:
    """ridge による正定値化"""

    def test_identity_gets_minimal_ridge(self):
        fixed = psd_repair(np.eye(3))
        # λ_min = 1 > 0, trace/s = 1
        assert fixed.ridge_added == pytest.approx(RIDGE_SCALE)
        np.testing.assert_allclose(fixed.sigma, (1.0 + RIDGE_SCALE) * np.eye(3))

    def test_indefinite_matrix_is_shifted(self):
        fixed = psd_repair(np.diag([1.0, -1.0]))
        # trace = 0 なので単位は 1: ε = 1 + 1e-8
        assert fixed.ridge_added == pytest.approx(1.0 + RIDGE_SCALE)
        assert np.linalg.eigvalsh(fixed.sigma)[0] > 0
        np.linalg.cholesky(fixed.sigma)

    def test_zero_matrix_becomes_positive_definite(self):
        fixed = psd_repair(np.zeros((4, 4)))
        np.testing.assert_allclose(fixed.sigma, RIDGE_SCALE * np.eye(4))

    def test_ridge_accumulates_and_keeps_method(self):
        first = CovEstimate(sigma=np.eye(2), method=SigmaMethod.METHOD1, ridge_added=0.5)
        fixed = psd_repair(first)
        assert fixed.method is SigmaMethod.METHOD1
        assert fixed.ridge_added == pytest.approx(0.5 + RIDGE_SCALE)

    def test_rejects_non_symmetric(self):
        with pytest.raises(InputError):
            psd_repair(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_rejects_non_square(self):
        with pytest.raises(InputError):
            psd_repair(np.zeros((2, 3)))


def test_estimate_sigma_accepts_integer_method(state):
    by_int = estimate_sigma(state, state.n, 1)
    by_enum = estimate_sigma(state, state.n, SigmaMethod.METHOD1)
    np.testing.assert_array_equal(by_int.sigma, by_enum.sigma)
    assert by_int.ridge_added > 0
    np.linalg.cholesky(by_int.sigma)


def test_methods_converge_for_independent_samples():
    """X ⟂ Y なら交差項は消えていき、2 つの推定は n とともに近づく"""
    rng = np.random.default_rng(21)
    z = EvalPoints(z=np.linspace(-2.0, 2.0, 10)[:, None])
    p = KernelParam(1.0)
    gaps = []
    for n in (100, 1000, 10000):
        per_draw = []
        for _ in range(8):
            data = PairedDataset(x=rng.standard_normal((n, 1)), y=rng.standard_normal((n, 1)) + 0.5)
            state = witness_state(data, z, p)
            s1 = sigma_method1(state, n).sigma
            s2 = sigma_method2(state, n).sigma
            per_draw.append(np.linalg.norm(s1 - s2) / np.linalg.norm(s2))
        gaps.append(np.mean(per_draw))
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 0.2 * gaps[0]


def test_ridge_for():
    assert ridge_for(1.0, 4.0, 2) == pytest.approx(RIDGE_SCALE * 2.0)
    assert ridge_for(-0.5, 4.0, 2) == pytest.approx(0.5 + RIDGE_SCALE * 2.0)
    assert ridge_for(0.0, 0.0, 3) == RIDGE_SCALE
