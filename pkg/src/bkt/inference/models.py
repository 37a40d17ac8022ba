"""推論モジュールのデータモデル定義"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from ..errors import ConfigError, NumericalError
from ..models import Hypothesis, KernelParam, SigmaMethod

QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)


@dataclass(frozen=True)
class BayesFactor:
    """BF_θ = P(Δ | H0, θ) / P(Δ | H1, θ) を対数で保持する"""
    log_bf: float
    theta: KernelParam

    def __post_init__(self):
        if not math.isfinite(self.log_bf):
            raise NumericalError("NON_FINITE_BF", f"log Bayes factor is not finite at theta={self.theta.theta}")

    @property
    def p_h0(self) -> float:
        """等事前確率での P(H0 | Δ, θ) = 1 / (1 + exp(-log BF))"""
        return float(expit(self.log_bf))

    @property
    def log10_bf(self) -> float:
        return self.log_bf / math.log(10.0)


@dataclass(frozen=True)
class ChainConfig:
    """HMC-within-Gibbs の設定

    n_tilde 回の HMC 遷移のうち先頭 warmup_inner 回で (burn-in 中のみ) ステップ幅を適応させる。
    """
    m_tilde: int = 2000          # Gibbs の外側反復
    n_tilde: int = 9             # 1 スイープあたりの HMC 遷移
    warmup_inner: int = 3        # うち適応に使う遷移
    burnin: int = 500
    thin: int = 2
    seed: int = 0
    prior_shape: float = 2.0
    prior_rate: float = 2.0      # Gamma(2, 2) は rate 表記 (平均 1)
    leapfrog_steps: int = 10
    init_step_size: float = 0.25
    find_initial_step: bool = True  # 開始点で init_step_size から倍々探索する
    target_accept: float = 0.65
    prior_odds: float = 1.0      # P(H1) / P(H0)
    sigma_method: SigmaMethod = SigmaMethod.METHOD2
    clamp_jacobian: bool = False

    def __post_init__(self):
        object.__setattr__(self, "sigma_method", SigmaMethod.parse(self.sigma_method))
        checks = [
            (self.m_tilde > self.burnin >= 0, "m_tilde must exceed burnin (burnin >= 0)"),
            (self.thin >= 1, "thin must be >= 1"),
            (self.n_tilde >= 1, "n_tilde must be >= 1"),
            (0 <= self.warmup_inner <= self.n_tilde, "warmup_inner must be within [0, n_tilde]"),
            (self.leapfrog_steps >= 1, "leapfrog_steps must be >= 1"),
            (self.init_step_size > 0, "init_step_size must be positive"),
            (self.prior_shape > 0 and self.prior_rate > 0, "gamma prior parameters must be positive"),
            (0.0 < self.target_accept < 1.0, "target_accept must be in (0, 1)"),
            (self.prior_odds > 0 and math.isfinite(self.prior_odds), "prior_odds must be positive"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError("BAD_CHAIN_CONFIG", message)

    @property
    def retained(self) -> int:
        """burn-in と間引き後に残るサンプル数"""
        return len(range(self.burnin, self.m_tilde, self.thin))

    def to_dict(self) -> dict:
        return {
            "m_tilde": self.m_tilde,
            "n_tilde": self.n_tilde,
            "warmup_inner": self.warmup_inner,
            "burnin": self.burnin,
            "thin": self.thin,
            "seed": self.seed,
            "prior": {"family": "gamma", "shape": self.prior_shape, "rate": self.prior_rate},
            "leapfrog_steps": self.leapfrog_steps,
            "init_step_size": self.init_step_size,
            "find_initial_step": self.find_initial_step,
            "target_accept": self.target_accept,
            "prior_odds": self.prior_odds,
            "sigma_method": self.sigma_method.value,
            "clamp_jacobian": self.clamp_jacobian,
        }


@dataclass
class ChainOutput:
    """Gibbs 連鎖の出力 (burn-in・間引き後)"""
    theta_samples: np.ndarray
    m_samples: np.ndarray         # 0 = H0, 1 = H1
    p_h1: float
    acceptance_rate: float
    log_bf_trace: np.ndarray
    iterations: np.ndarray        # 保持した外側反復の番号
    step_size: float = float("nan")
    nonfinite_rejections: int = 0
    diagnostics: dict = field(default_factory=dict)

    def theta_by_model(self) -> dict[Hypothesis, np.ndarray]:
        """ラベルごとの θ | M, D サンプル"""
        return {h: self.theta_samples[self.m_samples == h.value] for h in Hypothesis}

    def theta_quantiles(self, samples=None) -> dict[str, float]:
        samples = self.theta_samples if samples is None else samples
        if len(samples) == 0:
            return {}
        values = np.quantile(samples, QUANTILES)
        return {f"q{int(round(q * 100)):02d}": float(v) for q, v in zip(QUANTILES, values)}
