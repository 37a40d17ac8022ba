import math

import numpy as np
import pytest
from scipy import stats

from bkt.errors import ConfigError, NumericalError
from bkt.inference import ChainConfig, DualAveraging, HMCKernel, ThetaPosterior, hmc_update, leapfrog, sample_chain
from bkt.inference.hmc import STEP_MIN, find_reasonable_step, hamiltonian
from bkt.inference.target import U_BOUND, ThetaEvaluation, log_target_theta
from bkt.models import Hypothesis


class StandardNormal:
    def log_density(self, u):
        return -0.5 * u * u

    def grad(self, u):
        return -u


class BrokenGradient(StandardNormal):
    def grad(self, u):
        return math.nan


class NarrowNormal:
    """N(0, 1e-6)"""
    scale = 1e-3

    def log_density(self, u):
        return -0.5 * (u / self.scale) ** 2

    def grad(self, u):
        return -u / self.scale**2


def _batch_se(samples, batches=40):
    means = np.asarray(samples).reshape(batches, -1).mean(axis=1)
    return means.std(ddof=1) / math.sqrt(batches)


# ── リープフロッグ ──

def test_leapfrog_conserves_energy():
    target = StandardNormal()
    u0, r0 = 0.7, -1.1
    u1, r1 = leapfrog(u0, r0, target.grad, 1e-3, 200)
    assert abs(hamiltonian(target, u1, r1) - hamiltonian(target, u0, r0)) < 1e-4


def test_leapfrog_is_reversible():
    target = StandardNormal()
    u1, r1 = leapfrog(0.3, 0.9, target.grad, 0.1, 15)
    u2, r2 = leapfrog(u1, -r1, target.grad, 0.1, 15)
    assert u2 == pytest.approx(0.3, abs=1e-12)
    assert -r2 == pytest.approx(0.9, abs=1e-12)


def test_non_finite_gradient_is_rejected(rng):
    step = hmc_update(0.5, BrokenGradient(), 0.1, 5, rng)
    assert not step.accepted
    assert step.nonfinite
    assert step.u == 0.5


def test_hmc_update_needs_a_leapfrog_step(rng):
    with pytest.raises(ConfigError):
        hmc_update(0.0, StandardNormal(), 0.1, 0, rng)


def test_tiny_steps_are_accepted(rng):
    step = hmc_update(0.2, StandardNormal(), 1e-4, 3, rng)
    assert step.accepted
    assert step.accept_prob == pytest.approx(1.0, abs=1e-6)


# ── 初期ステップ幅の探索 ──

def test_step_search_shrinks_for_a_narrow_target(rng):
    step = find_reasonable_step(0.0, NarrowNormal(), 0.25, rng)
    assert 1e-5 < step < 5e-2


def test_step_search_grows_for_a_flat_target(rng):
    flat = NarrowNormal()
    flat.scale = 1e3
    assert find_reasonable_step(0.0, flat, 0.25, rng) > 1.0


def test_step_search_stops_at_the_lower_bound(rng):
    step = find_reasonable_step(0.5, BrokenGradient(), 0.25, rng)
    assert STEP_MIN <= step < 2 * STEP_MIN


def test_kernel_restarts_adaptation_from_found_step(rng):
    kernel = HMCKernel(ChainConfig(m_tilde=2, burnin=1))
    step = kernel.initialize_step(0.0, NarrowNormal(), rng)
    assert kernel.step_size == step
    assert kernel.adapter.mu == pytest.approx(math.log(10.0 * step))
    assert kernel.adapter.count == 0


# ── デュアルアベレージング ──

def test_dual_averaging_without_updates_keeps_initial_step():
    assert DualAveraging(0.25).final_step == pytest.approx(0.25)


def test_dual_averaging_moves_toward_target():
    grow = DualAveraging(0.25)
    shrink = DualAveraging(0.25)
    for _ in range(50):
        grow.update(1.0)
        shrink.update(0.0)
    assert grow.final_step > 0.25
    assert shrink.final_step < 0.25


def test_kernel_freezes_step_after_adaptation(rng):
    cfg = ChainConfig(m_tilde=2, burnin=1, leapfrog_steps=3)
    kernel = HMCKernel(cfg)
    u = 0.0
    for _ in range(20):
        u = kernel.transition(u, StandardNormal(), rng, adapt=True)
    kernel.finish_adaptation()
    frozen = kernel.step_size
    assert frozen == kernel.adapter.final_step
    for _ in range(10):
        u = kernel.transition(u, StandardNormal(), rng, adapt=True)
    assert kernel.step_size == frozen
    assert kernel.adapter.count == 20
    assert kernel.transitions == 30


def test_standard_normal_moments():
    cfg = ChainConfig(m_tilde=2, burnin=1, leapfrog_steps=3)
    samples, kernel = sample_chain(StandardNormal(), 0.0, 8000, cfg, np.random.default_rng(11), warmup=500)
    se = _batch_se(samples)
    assert abs(samples.mean()) < 4 * se + 1e-3
    assert samples.var() == pytest.approx(1.0, abs=0.15)
    assert 0.4 < kernel.acceptance_rate <= 1.0
    assert kernel.nonfinite == 0


def test_chain_is_deterministic():
    cfg = ChainConfig(m_tilde=2, burnin=1, leapfrog_steps=4)
    a, _ = sample_chain(StandardNormal(), 0.5, 200, cfg, np.random.default_rng(3), warmup=50)
    b, _ = sample_chain(StandardNormal(), 0.5, 200, cfg, np.random.default_rng(3), warmup=50)
    np.testing.assert_array_equal(a, b)


# ── θ のターゲット ──

class TestThetaPosterior:
    def test_prior_density_on_log_scale(self):
        post = ThetaPosterior.prior_only()
        for u in (-2.0, 0.0, 1.5):
            theta = math.exp(u)
            # Gamma(2, rate 2) = scipy の scale 0.5
            expected = stats.gamma.logpdf(theta, a=2.0, scale=0.5) + u
            assert post.log_density(u, Hypothesis.H0) == pytest.approx(expected, rel=1e-12)

    def test_gradient_on_log_scale(self):
        post = ThetaPosterior.prior_only()
        for u in (-1.0, 0.0, 0.8):
            # d/du [2u - 2e^u] = 2 - 2e^u
            assert post.grad(u, Hypothesis.H1) == pytest.approx(2.0 - 2.0 * math.exp(u), abs=1e-6)

    def test_outside_support(self):
        post = ThetaPosterior.prior_only()
        assert post.log_target(0.0, Hypothesis.H0) == -math.inf
        assert post.log_target(-1.0, Hypothesis.H0) == -math.inf
        assert post.log_density(math.inf, Hypothesis.H0) == -math.inf

    def test_log_scale_is_boxed(self):
        post = ThetaPosterior.prior_only()
        for u in (-U_BOUND - 1.0, U_BOUND + 1.0, -4e32):
            assert post.log_density(u, Hypothesis.H0) == -math.inf
            assert math.isnan(post.grad(u, Hypothesis.H0))
        assert math.isfinite(post.grad(-U_BOUND, Hypothesis.H0))

    def test_gradient_at_vanishing_theta_is_nan(self, shifted_1d, eval_points_1d):
        post = ThetaPosterior(shifted_1d, eval_points_1d)
        for theta in (0.0, -1.0, math.inf, math.exp(-4e32)):
            assert math.isnan(post.grad_theta(theta, Hypothesis.H1))

    def test_numerical_failure_becomes_minus_infinity(self):
        def failing(theta, model):
            raise NumericalError("TEST", "boom")

        post = ThetaPosterior(None, None, loglik=failing)
        assert post.log_target(1.0, Hypothesis.H1) == -math.inf
        with pytest.raises(NumericalError):
            post.evaluate(1.0)

    def test_analytic_gradient_override(self):
        post = ThetaPosterior(None, None, loglik=lambda t, m: 0.0, gradient=lambda t, m: 3.0)
        # θ · 3 + 1 at θ = e
        assert post.grad(1.0, Hypothesis.H0) == pytest.approx(3.0 * math.e + 1.0)

    def test_evaluation_is_cached(self):
        calls = []

        def loglik(theta, model):
            calls.append((theta, model))
            return -theta

        post = ThetaPosterior(None, None, loglik=loglik)
        post.log_target(2.0, Hypothesis.H0)
        post.log_target(2.0, Hypothesis.H1)
        assert len(calls) == 2  # 両モデル 1 回ずつ
        post.clear_cache()
        post.log_target(2.0, Hypothesis.H0)
        assert len(calls) == 4

    def test_requires_data_without_override(self):
        with pytest.raises(ValueError):
            ThetaPosterior(None, None)

    def test_data_target_matches_functional_form(self, shifted_1d, eval_points_1d):
        post = ThetaPosterior(shifted_1d, eval_points_1d)
        for model in Hypothesis:
            assert post.log_target(1.3, model) == pytest.approx(
                log_target_theta(1.3, model, shifted_1d, eval_points_1d))
        ev = post.evaluate(1.3)
        assert ev.log_bf == pytest.approx(ev.null - ev.alt)
        # ヤコビアン項は両モデルに同じだけ入る
        diff = post.log_target(1.3, Hypothesis.H0) - post.log_target(1.3, Hypothesis.H1)
        assert diff == pytest.approx(ev.log_bf)


def test_evaluation_record():
    ev = ThetaEvaluation(theta=1.0, null=-3.0, alt=-5.0, log_vol=1.5)
    assert ev.log_bf == 2.0
    assert ev.loglik(Hypothesis.H0) == -1.5
    assert ev.loglik(Hypothesis.H1) == -3.5


@pytest.mark.slow
def test_prior_recovery():
    """尤度を定数にすると連鎖は Gamma(2, 2) を再現する"""
    cfg = ChainConfig(m_tilde=2, burnin=1, leapfrog_steps=10)
    target = ThetaPosterior.prior_only().target(Hypothesis.H0)
    samples, _ = sample_chain(target, 0.0, 100_000, cfg, np.random.default_rng(2024), warmup=2000)
    theta = np.exp(samples[::10])
    assert theta.mean() == pytest.approx(1.0, abs=0.03)
    ks = stats.kstest(theta, stats.gamma(a=2.0, scale=0.5).cdf).statistic
    assert ks < 0.02
