"""M ∈ {H0, H1} と θ の HMC-within-Gibbs

1 スイープ: p(θ | M, D) に対して ñ 回の HMC 遷移 → BF_θ を計算 →
M を P(H1 | θ, D) = odds / (odds + BF_θ) のベルヌーイで更新する。
"""

import logging
import math

import numpy as np

from ..errors import InputError
from ..kernel import median_heuristic
from ..models import EvalPoints, Hypothesis, PairedDataset
from .bayes import posterior_h1
from .hmc import HMCKernel
from .models import ChainConfig, ChainOutput
from .target import ThetaPosterior

logger = logging.getLogger(__name__)


def draw_hypothesis(log_bf: float, prior_odds: float, rng: np.random.Generator) -> Hypothesis:
    """H0 を確率 BF / (odds + BF), H1 をその残りで選ぶ"""
    return Hypothesis.H1 if rng.random() < posterior_h1(log_bf, prior_odds) else Hypothesis.H0


def gibbs_run(
    data: PairedDataset,
    z: EvalPoints,
    cfg: ChainConfig,
    posterior: ThetaPosterior = None,
) -> ChainOutput:
    """Gibbs 連鎖を回して保持サンプルと P(H1 | D) の推定値を返す

    θ の初期値はメディアンヒューリスティック。初期ステップ幅はそこでの倍々探索で決める。
    burn-in 中のスイープでは先頭 warmup_inner 回の HMC 遷移でステップ幅を適応させ、burn-in 後は固定する。

    Raises:
        DegenerateGeometryError: 初期 θ で J^T J が特異 (clamp_jacobian=False の場合)
    """
    if data.n < 2:
        raise InputError("TOO_FEW_ROWS", f"gibbs_run needs n >= 2, got {data.n}")
    if posterior is None:
        posterior = ThetaPosterior.from_config(data, z, cfg)
    rng = np.random.default_rng(cfg.seed)

    theta0 = median_heuristic(data).theta
    u = math.log(theta0)
    ev = posterior.evaluate(theta0)
    model = draw_hypothesis(ev.log_bf, cfg.prior_odds, rng)
    logger.info("chain start: theta0=%.4g log_bf=%.4g M0=%s", theta0, ev.log_bf, model)

    kernel = HMCKernel(cfg)
    if cfg.find_initial_step:
        kernel.initialize_step(u, posterior.target(model), rng)
    initial_step = kernel.step_size
    retained = cfg.retained
    thetas = np.empty(retained)
    labels = np.empty(retained, dtype=np.int64)
    log_bfs = np.empty(retained)
    iterations = np.empty(retained, dtype=np.int64)
    k = 0
    report_every = max(1, cfg.m_tilde // 10)

    for it in range(cfg.m_tilde):
        if it == cfg.burnin:
            kernel.finish_adaptation()
        adapting = it < cfg.burnin
        target = posterior.target(model)
        for j in range(cfg.n_tilde):
            u = kernel.transition(u, target, rng, adapt=adapting and j < cfg.warmup_inner)

        theta = math.exp(u)
        ev = posterior.evaluate(theta)
        model = draw_hypothesis(ev.log_bf, cfg.prior_odds, rng)

        if it >= cfg.burnin and (it - cfg.burnin) % cfg.thin == 0:
            thetas[k] = theta
            labels[k] = model.value
            log_bfs[k] = ev.log_bf
            iterations[k] = it
            k += 1
        if (it + 1) % report_every == 0:
            logger.info("sweep %d/%d: theta=%.4g M=%s step=%.3g", it + 1, cfg.m_tilde, theta, model, kernel.step_size)

    p_h1 = float(labels.mean()) if retained else math.nan
    return ChainOutput(
        theta_samples=thetas,
        m_samples=labels,
        p_h1=p_h1,
        acceptance_rate=kernel.acceptance_rate,
        log_bf_trace=log_bfs,
        iterations=iterations,
        step_size=kernel.step_size,
        nonfinite_rejections=kernel.nonfinite,
        diagnostics={
            "theta0": theta0,
            "transitions": kernel.transitions,
            "adaptation_updates": kernel.adapter.count,
            "initial_step": initial_step,
        },
    )
