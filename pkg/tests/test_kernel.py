import math

import numpy as np
import pytest

from bkt.errors import ConfigError, DegenerateDataError, InputError, ParameterError
from bkt.kernel import (
    gaussian_kernel,
    gram,
    median_heuristic,
    r_kernel,
    subsample_eval_points,
    witness_state,
)
from bkt.models import EvalPoints, KernelParam, PairedDataset
from bkt.oracle import quad_r_kernel


# ── gaussian_kernel / r_kernel ──

def test_gaussian_kernel_zero_distance():
    assert gaussian_kernel([0.3, -1.2], [0.3, -1.2], KernelParam(1.0)) == 1.0


def test_gaussian_kernel_hand_values():
    # ||a - b||^2 = 1, 2θ = 1
    assert gaussian_kernel([1.0], [0.0], KernelParam(0.5)) == pytest.approx(math.exp(-1.0))
    # ||a - b||^2 = 2, 2θ = 2
    assert gaussian_kernel([1.0, 1.0], [0.0, 0.0], KernelParam(1.0)) == pytest.approx(math.exp(-1.0))


def test_gaussian_kernel_symmetric(rng):
    for _ in range(20):
        a, b = rng.standard_normal(3), rng.standard_normal(3)
        p = KernelParam(rng.uniform(0.1, 5.0))
        assert gaussian_kernel(a, b, p) == gaussian_kernel(b, a, p)
        assert 0.0 < gaussian_kernel(a, b, p) <= 1.0


def test_kernel_rejects_dimension_mismatch():
    with pytest.raises(InputError):
        gaussian_kernel([0.0, 1.0], [0.0], KernelParam(1.0))
    with pytest.raises(InputError):
        r_kernel([0.0, 1.0], [0.0], KernelParam(1.0))


@pytest.mark.parametrize("theta", [0.0, -1.0, float("nan"), float("inf")])
def test_kernel_param_rejects_bad_theta(theta):
    with pytest.raises(ParameterError):
        KernelParam(theta)


def test_r_kernel_hand_values():
    p = KernelParam(1.0)
    assert r_kernel([0.0], [0.0], p) == pytest.approx(math.sqrt(math.pi))
    assert r_kernel([1.0], [0.0], p) == pytest.approx(math.sqrt(math.pi) * math.exp(-0.25))
    # (πθ)^{D/2} with D = 2
    assert r_kernel([0.5, 0.5], [0.5, 0.5], p) == pytest.approx(math.pi)


def test_r_kernel_matches_convolution_quadrature(rng):
    for _ in range(10):
        a, b = rng.normal(0.0, 2.0, size=2)
        p = KernelParam(rng.uniform(0.1, 10.0))
        expected = quad_r_kernel(float(a), float(b), p)
        assert r_kernel([a], [b], p) == pytest.approx(expected, rel=1e-6)


# ── gram ──

def test_gram_single_row():
    np.testing.assert_allclose(gram([[2.0]], [[2.0]], KernelParam(1.0)), [[1.0]])


def test_gram_entrywise():
    k = gram([[0.0], [1.0]], [[0.0]], KernelParam(0.5))
    np.testing.assert_allclose(k, [[1.0], [math.exp(-1.0)]])


def test_r_gram_of_repeated_point():
    r = gram(np.ones((3, 1)), np.ones((3, 1)), KernelParam(1.0), which="r")
    np.testing.assert_allclose(r, np.full((3, 3), math.sqrt(math.pi)))


@pytest.mark.parametrize("which", ["k", "r"])
def test_gram_is_psd(rng, which):
    for _ in range(10):
        a = rng.standard_normal((int(rng.integers(2, 21)), 2))
        m = gram(a, a, KernelParam(rng.uniform(0.1, 5.0)), which=which)
        np.testing.assert_allclose(m, m.T)
        assert np.linalg.eigvalsh(m)[0] >= -1e-8 * np.trace(m)


def test_gram_rejects_mismatch_and_unknown_kernel():
    with pytest.raises(InputError):
        gram(np.zeros((2, 1)), np.zeros((2, 2)), KernelParam(1.0))
    with pytest.raises(InputError):
        gram(np.zeros((2, 1)), np.zeros((2, 1)), KernelParam(1.0), which="laplace")


# ── median_heuristic ──

def test_median_heuristic_pooled_three_values():
    # プール {0, 1, 2, 2}: ||a-b||^2/2 = {0.5, 2, 2, 0.5, 0.5, 0} → 中央値 0.5
    data = PairedDataset(x=[[0.0], [1.0]], y=[[2.0], [2.0]])
    assert median_heuristic(data).theta == pytest.approx(0.5)


def test_median_heuristic_single_pair():
    data = PairedDataset(x=[[0.0]], y=[[2.0]])
    assert median_heuristic(data).theta == pytest.approx(2.0)


def test_median_heuristic_all_identical():
    data = PairedDataset(x=np.ones((3, 2)), y=np.ones((3, 2)))
    with pytest.raises(DegenerateDataError):
        median_heuristic(data)


def test_median_heuristic_mostly_duplicates_uses_positive_distances():
    # 15 組中 10 組が距離 0。正の距離 (すべて 1/2) の中央値を使う
    data = PairedDataset(x=[[0.0], [0.0], [0.0]], y=[[0.0], [0.0], [1.0]])
    assert median_heuristic(data).theta == pytest.approx(0.5)


def test_median_heuristic_scales_quadratically(shifted_1d):
    base = median_heuristic(shifted_1d).theta
    scaled = PairedDataset(x=3.0 * shifted_1d.x, y=3.0 * shifted_1d.y)
    assert median_heuristic(scaled).theta == pytest.approx(9.0 * base)


# ── subsample_eval_points ──

def test_subsample_full_coverage_is_pooled_data(shifted_1d):
    z = subsample_eval_points(shifted_1d, 2 * shifted_1d.n, seed=1)
    np.testing.assert_allclose(np.sort(z.z.ravel()), np.sort(shifted_1d.pooled().ravel()))


def test_subsample_is_deterministic(shifted_1d):
    a = subsample_eval_points(shifted_1d, 10, seed=11)
    b = subsample_eval_points(shifted_1d, 10, seed=11)
    np.testing.assert_array_equal(a.z, b.z)


def test_subsample_half_from_each_sample():
    rng = np.random.default_rng(0)
    data = PairedDataset(x=rng.standard_normal((100, 2)), y=rng.standard_normal((100, 2)))
    z = subsample_eval_points(data, 4, seed=7)
    ix, iy = z.source_indices
    assert len(ix) == 2 and len(set(ix.tolist())) == 2
    assert len(iy) == 2 and len(set(iy.tolist())) == 2
    np.testing.assert_array_equal(z.z[:2], data.x[ix])
    np.testing.assert_array_equal(z.z[2:], data.y[iy])


@pytest.mark.parametrize("s", [3, 0, 62])
def test_subsample_rejects_bad_s(shifted_1d, s):
    with pytest.raises(ConfigError):
        subsample_eval_points(shifted_1d, s, seed=0)


# ── witness_state ──

def test_witness_identical_samples_is_zero(rng):
    x = rng.standard_normal((8, 2))
    data = PairedDataset(x=x, y=x)
    state = witness_state(data, EvalPoints(z=rng.standard_normal((4, 2))), KernelParam(1.0))
    np.testing.assert_array_equal(state.delta, np.zeros(4))
    np.testing.assert_array_equal(state.g, np.zeros((4, 8)))


def test_witness_hand_value():
    data = PairedDataset(x=[[0.0]], y=[[1.0]])
    state = witness_state(data, EvalPoints(z=[[0.0]]), KernelParam(0.5))
    np.testing.assert_allclose(state.delta, [1.0 - math.exp(-1.0)])


def test_witness_delta_is_row_mean_of_g(shifted_1d, eval_points_1d):
    state = witness_state(shifted_1d, eval_points_1d, KernelParam(0.8))
    np.testing.assert_allclose(state.delta, state.g.mean(axis=1), atol=1e-15)
    np.testing.assert_allclose(state.g, state.k_zx - state.k_zy)
    assert state.g.shape == (eval_points_1d.s, shifted_1d.n)


def test_witness_swap_negates(shifted_1d, eval_points_1d):
    p = KernelParam(1.3)
    state = witness_state(shifted_1d, eval_points_1d, p)
    swapped = witness_state(shifted_1d.swapped(), eval_points_1d, p)
    np.testing.assert_array_equal(swapped.delta, -state.delta)
    np.testing.assert_array_equal(swapped.g, -state.g)


def test_witness_rejects_dimension_mismatch(shifted_1d):
    with pytest.raises(InputError):
        witness_state(shifted_1d, EvalPoints(z=np.zeros((2, 2))), KernelParam(1.0))
