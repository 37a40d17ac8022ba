"""θ の条件付き事後 p(θ | M, D) ∝ p(D | θ, M) p(θ)

HMC は u = log θ 上で動かすので、密度には変数変換の項 +u を加える。
勾配は θ 上の中心差分から連鎖律で求める (解析勾配を差し込むこともできる)。
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

from scipy.special import gammaln

from ..errors import NumericalError
from ..models import EvalPoints, Hypothesis, PairedDataset, SigmaMethod
from .workspace import ThetaWorkspace

logger = logging.getLogger(__name__)

FD_SCALE = 1e-5
CACHE_SIZE = 16
U_BOUND = 30.0  # |log θ| の上限。外側は密度 0 として扱う

LogLikFn = Callable[[float, Hypothesis], float]
GradFn = Callable[[float, Hypothesis], float]


@dataclass(frozen=True)
class ThetaEvaluation:
    """1 つの θ での両モデルの対数擬似尤度 (ヤコビアン項は別に持つ)"""
    theta: float
    null: float
    alt: float
    log_vol: float = 0.0

    @property
    def log_bf(self) -> float:
        return self.null - self.alt

    def loglik(self, model: Hypothesis) -> float:
        base = self.null if model is Hypothesis.H0 else self.alt
        return base + self.log_vol


class ThetaPosterior:
    """p(θ | M, D) の対数密度と勾配

    Args:
        loglik: (θ, M) -> 対数尤度 を差し替える (事前分布だけを試すときは定数を返す関数)
        gradient: (θ, M) -> d log p(θ | M, D) / dθ の解析勾配
    """

    def __init__(
        self,
        data: Optional[PairedDataset],
        z: Optional[EvalPoints],
        *,
        method=SigmaMethod.METHOD2,
        prior_shape: float = 2.0,
        prior_rate: float = 2.0,
        clamp_jacobian: bool = False,
        loglik: Optional[LogLikFn] = None,
        gradient: Optional[GradFn] = None,
    ):
        if loglik is None and (data is None or z is None):
            raise ValueError("data and z are required unless a loglik override is given")
        self.data = data
        self.z = z
        self.method = SigmaMethod.parse(method)
        self.prior_shape = float(prior_shape)
        self.prior_rate = float(prior_rate)
        self.clamp_jacobian = clamp_jacobian
        self._loglik = loglik
        self._gradient = gradient
        self._log_norm = self.prior_shape * math.log(self.prior_rate) - float(gammaln(self.prior_shape))
        self._cache: dict[float, ThetaEvaluation] = {}
        self._workspace: Optional[ThetaWorkspace] = None

    @classmethod
    def prior_only(cls, prior_shape: float = 2.0, prior_rate: float = 2.0) -> "ThetaPosterior":
        """尤度を定数にした事後 (= 事前分布)"""
        return cls(None, None, prior_shape=prior_shape, prior_rate=prior_rate,
                   loglik=lambda theta, model: 0.0)

    @classmethod
    def from_config(cls, data: PairedDataset, z: EvalPoints, cfg) -> "ThetaPosterior":
        return cls(data, z, method=cfg.sigma_method, prior_shape=cfg.prior_shape,
                   prior_rate=cfg.prior_rate, clamp_jacobian=cfg.clamp_jacobian)

    def clear_cache(self):
        self._cache.clear()

    def log_prior(self, theta: float) -> float:
        """Gamma(shape, rate) の対数密度"""
        if not (theta > 0 and math.isfinite(theta)):
            return -math.inf
        return self._log_norm + (self.prior_shape - 1.0) * math.log(theta) - self.prior_rate * theta

    def evaluate(self, theta: float) -> ThetaEvaluation:
        """θ での両モデルの対数擬似尤度。例外はそのまま送出する。"""
        theta = float(theta)
        hit = self._cache.get(theta)
        if hit is not None:
            return hit

        if self._loglik is not None:
            ev = ThetaEvaluation(theta, self._loglik(theta, Hypothesis.H0), self._loglik(theta, Hypothesis.H1))
        else:
            if self._workspace is None:
                self._workspace = ThetaWorkspace(self.data, self.z, self.method, self.clamp_jacobian)
            ev = ThetaEvaluation(theta, *self._workspace.evaluate(theta))

        if len(self._cache) >= CACHE_SIZE:
            self._cache.pop(next(iter(self._cache)))
        self._cache[theta] = ev
        return ev

    def log_target(self, theta: float, model: Hypothesis) -> float:
        """log p(D | θ, M) + log p(θ)。θ ≤ 0 や数値的な失敗では -inf。"""
        theta = float(theta)
        prior = self.log_prior(theta)
        if prior == -math.inf:
            return -math.inf
        try:
            value = self.evaluate(theta).loglik(model) + prior
        except NumericalError as e:
            logger.debug("log target at theta=%.4g is undefined: %s", theta, e)
            return -math.inf
        return value if math.isfinite(value) else -math.inf

    def log_density(self, u: float, model: Hypothesis) -> float:
        """u = log θ 上の対数密度 (変数変換の +u を含む)"""
        if not (math.isfinite(u) and abs(u) <= U_BOUND):
            return -math.inf
        theta = math.exp(u)
        value = self.log_target(theta, model)
        return value + u if value > -math.inf else -math.inf

    def grad_theta(self, theta: float, model: Hypothesis) -> float:
        """d log p(θ | M, D) / dθ。θ や差分幅が正でなければ nan。"""
        if self._gradient is not None:
            return float(self._gradient(theta, model))
        if not (theta > 0 and math.isfinite(theta)):
            return math.nan
        h = min(FD_SCALE * max(1.0, theta), 0.5 * theta)
        if not h > 0:
            return math.nan
        upper = self.log_target(theta + h, model)
        lower = self.log_target(theta - h, model)
        return (upper - lower) / (2.0 * h)

    def grad(self, u: float, model: Hypothesis) -> float:
        """d/du [log p(e^u | M, D) + u] = θ · d log p / dθ + 1"""
        if not (math.isfinite(u) and abs(u) <= U_BOUND):
            return math.nan
        theta = math.exp(u)
        return theta * self.grad_theta(theta, model) + 1.0

    def target(self, model: Hypothesis) -> "ConditionalTarget":
        return ConditionalTarget(self, model)


@dataclass(frozen=True)
class ConditionalTarget:
    """モデルラベルを固定した u 上のターゲット (HMC に渡す)"""
    posterior: ThetaPosterior
    model: Hypothesis

    def log_density(self, u: float) -> float:
        return self.posterior.log_density(u, self.model)

    def grad(self, u: float) -> float:
        return self.posterior.grad(u, self.model)

    def begin_trajectory(self):
        self.posterior.clear_cache()


def log_target_theta(
    theta: float,
    model: Hypothesis,
    data: PairedDataset,
    z: EvalPoints,
    *,
    method=SigmaMethod.METHOD2,
    prior_shape: float = 2.0,
    prior_rate: float = 2.0,
    clamp_jacobian: bool = False,
) -> float:
    """log p(D | θ, M) + log Gamma(θ; shape, rate)"""
    posterior = ThetaPosterior(data, z, method=method, prior_shape=prior_shape,
                               prior_rate=prior_rate, clamp_jacobian=clamp_jacobian)
    return posterior.log_target(theta, model)
