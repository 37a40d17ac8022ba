"""固定 θ の Bayes 因子, 事後モデル確率, θ のグリッド探索"""

import logging
import math
import re
from typing import Iterable, Optional, Union

import numpy as np
from scipy.linalg import cho_solve
from scipy.special import expit

from ..covariance import estimate_sigma
from ..errors import ConfigError, InputError
from ..kernel import witness_state
from ..likelihood import LOG_2PI, chol_logdet, cholesky, loglik_alt, loglik_null, r_matrix
from ..models import CovEstimate, EvalPoints, KernelParam, PairedDataset, SigmaMethod, WitnessState
from .models import BayesFactor

logger = logging.getLogger(__name__)

GRID_PATTERN = re.compile(r"^\s*([^:]+):([^:]+):(\d+)\s*$")


def _gauss_logpdf_zero_mean(v: np.ndarray, cov: np.ndarray, name: str) -> float:
    factor = cholesky(cov, name)
    quad = float(v @ cho_solve(factor, v))
    return -0.5 * v.size * LOG_2PI - 0.5 * chol_logdet(factor) - 0.5 * quad


def bayes_factor_fixed_theta(delta, sigma, r, n: int) -> BayesFactor:
    """log BF = log N(Δ; 0, Σ/n) - log N(Δ; 0, R + Σ/n)

    Args:
        delta: WitnessState (θ もここから取る)
        sigma: CovEstimate または s×s 行列
        r: R_θ (s×s)
        n: 観測数
    """
    if not isinstance(delta, WitnessState):
        raise InputError("BAD_ARGUMENT", "delta must be a WitnessState")
    sig = sigma.sigma if isinstance(sigma, CovEstimate) else np.asarray(sigma, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    s = delta.s
    if sig.shape != (s, s) or r.shape != (s, s):
        raise InputError("SHAPE_MISMATCH", f"sigma {sig.shape}, R {r.shape} for s={s}")
    if n < 1:
        raise InputError("TOO_FEW_ROWS", f"n must be >= 1, got {n}")

    cov0 = sig / n
    lp0 = _gauss_logpdf_zero_mean(delta.delta, cov0, "sigma / n")
    lp1 = _gauss_logpdf_zero_mean(delta.delta, r + cov0, "R + sigma / n")
    return BayesFactor(log_bf=lp0 - lp1, theta=delta.theta)


def compute_bayes_factor(
    data: PairedDataset,
    z: EvalPoints,
    p: KernelParam,
    method=SigmaMethod.METHOD2,
) -> BayesFactor:
    """データから Δ, Σ_θ, R_θ を計算して BF_θ を返す"""
    state = witness_state(data, z, p)
    sigma = estimate_sigma(state, data.n, method)
    return bayes_factor_fixed_theta(state, sigma, r_matrix(z, p), data.n)


def pseudo_bayes_factor(
    data: PairedDataset,
    z: EvalPoints,
    p: KernelParam,
    method=SigmaMethod.METHOD2,
) -> BayesFactor:
    """G_θ 全体の周辺擬似尤度の比 p(D | H0, θ) / p(D | H1, θ)

    ヤコビアン項は両モデルで共通なので含めない。Gibbs のラベル更新と同じ量。
    """
    state = witness_state(data, z, p)
    sigma = estimate_sigma(state, data.n, method)
    null = loglik_null(data, z, p, sigma, state=state, with_jacobian=False)
    alt = loglik_alt(data, z, p, sigma, state=state, with_jacobian=False)
    return BayesFactor(log_bf=null.value - alt.value, theta=p)


def posterior_h1(bf: Union[BayesFactor, float], prior_odds: float = 1.0) -> float:
    """P(H1 | D) = odds / (odds + BF)  (odds = P(H1) / P(H0))"""
    if prior_odds <= 0 or not math.isfinite(prior_odds):
        raise ConfigError("BAD_PRIOR_ODDS", f"prior_odds must be positive, got {prior_odds}")
    log_bf = bf.log_bf if isinstance(bf, BayesFactor) else float(bf)
    return float(expit(math.log(prior_odds) - log_bf))


def theta_grid(lo: float, hi: float, count: int) -> np.ndarray:
    """[lo, hi] を count 点で等間隔に分割する"""
    lo, hi, count = float(lo), float(hi), int(count)
    if count < 1:
        raise ConfigError("BAD_GRID", f"grid count must be >= 1, got {count}")
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo <= 0 or hi < lo:
        raise ConfigError("BAD_GRID", f"grid bounds must satisfy 0 < lo <= hi, got {lo}:{hi}")
    if count == 1:
        return np.array([lo])
    return np.linspace(lo, hi, count)


def parse_theta_grid(text: str) -> np.ndarray:
    """"lo:hi:count" 形式の文字列をグリッドに変換する"""
    m = GRID_PATTERN.match(text)
    if not m:
        raise ConfigError("BAD_GRID", f"expected lo:hi:count, got {text!r}")
    try:
        lo, hi = float(m.group(1)), float(m.group(2))
    except ValueError as e:
        raise ConfigError("BAD_GRID", f"non-numeric grid bound in {text!r}") from e
    return theta_grid(lo, hi, int(m.group(3)))


def _validated_grid(grid: Iterable[float]) -> list[KernelParam]:
    values = [float(t) for t in np.atleast_1d(np.asarray(list(grid), dtype=np.float64))]
    if not values:
        raise ConfigError("EMPTY_GRID", "theta grid is empty")
    return [KernelParam(t) for t in sorted(values)]


def grid_search_theta(
    data: PairedDataset,
    z: EvalPoints,
    grid: Iterable[float],
    method=SigmaMethod.METHOD2,
) -> tuple[KernelParam, BayesFactor]:
    """log BF_θ を最小にするグリッド点を返す。同値なら小さい θ を優先する。"""
    return select_min(bayes_factors_on_grid(data, z, grid, method))


def bayes_factors_on_grid(
    data: PairedDataset,
    z: EvalPoints,
    grid: Iterable[float],
    method=SigmaMethod.METHOD2,
) -> list[BayesFactor]:
    """グリッド上の固定 θ Bayes 因子 (θ 昇順)"""
    out = []
    for p in _validated_grid(grid):
        bf = compute_bayes_factor(data, z, p, method)
        logger.debug("theta=%.6g log_bf=%.6g", p.theta, bf.log_bf)
        out.append(bf)
    return out


def select_min(bfs: list[BayesFactor]) -> tuple[KernelParam, BayesFactor]:
    """θ 昇順の列から最小の log BF を選ぶ (先勝ち)"""
    best: Optional[BayesFactor] = None
    for bf in bfs:
        if best is None or bf.log_bf < best.log_bf:
            best = bf
    return best.theta, best


def bayes_factor_curve(
    data: PairedDataset,
    z: EvalPoints,
    grid: Iterable[float],
    method=SigmaMethod.METHOD2,
) -> list[BayesFactor]:
    """グリッド上の擬似尤度 Bayes 因子 (θ 昇順)"""
    return [pseudo_bayes_factor(data, z, p, method) for p in _validated_grid(grid)]


def conditional_h1_curve(
    data: PairedDataset,
    z: EvalPoints,
    theta_grid: Iterable[float],
    method=SigmaMethod.METHOD2,
) -> list[tuple[float, float]]:
    """(θ, 1 / (1 + BF_θ)) の列"""
    return [(bf.theta.theta, posterior_h1(bf)) for bf in bayes_factor_curve(data, z, theta_grid, method)]
