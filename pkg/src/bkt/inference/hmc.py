"""1 次元ターゲット用のハミルトニアン・モンテカルロ

ターゲットは log_density(u) と grad(u) を持つオブジェクト。
質量 1 のガウス運動量、リープフロッグ積分、Metropolis 受理判定。
初期ステップ幅は 1 歩の受理率から探し、その後デュアルアベレージングで適応させる。
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Protocol

import numpy as np

from ..errors import ConfigError
from .models import ChainConfig

logger = logging.getLogger(__name__)

STEP_MIN = 1e-8
STEP_MAX = 1e2


class Target(Protocol):
    def log_density(self, u: float) -> float: ...

    def grad(self, u: float) -> float: ...


def leapfrog(u: float, r: float, grad: Callable[[float], float], step: float, n_steps: int) -> tuple[float, float]:
    """n_steps 回のリープフロッグ (半歩-全歩-半歩)"""
    r = r + 0.5 * step * grad(u)
    for i in range(n_steps):
        u = u + step * r
        g = grad(u)
        if not math.isfinite(g):
            return u, math.nan
        r = r + (step if i < n_steps - 1 else 0.5 * step) * g
    return u, r


def hamiltonian(target: Target, u: float, r: float) -> float:
    return -target.log_density(u) + 0.5 * r * r


class DualAveraging:
    """ステップ幅のデュアルアベレージング (目標受理率 delta)"""

    def __init__(self, init_step: float, delta: float = 0.65, gamma: float = 0.05,
                 t0: float = 10.0, kappa: float = 0.75):
        self.delta = delta
        self.gamma = gamma
        self.t0 = t0
        self.kappa = kappa
        self.mu = math.log(10.0 * init_step)
        self.log_step = math.log(init_step)
        self.log_step_bar = 0.0
        self.h_bar = 0.0
        self.count = 0

    @property
    def step(self) -> float:
        return math.exp(self.log_step)

    @property
    def final_step(self) -> float:
        return math.exp(self.log_step_bar) if self.count else self.step

    def update(self, accept_prob: float) -> float:
        self.count += 1
        m = self.count
        w = 1.0 / (m + self.t0)
        self.h_bar = (1.0 - w) * self.h_bar + w * (self.delta - accept_prob)
        self.log_step = self.mu - math.sqrt(m) / self.gamma * self.h_bar
        eta = m ** (-self.kappa)
        self.log_step_bar = eta * self.log_step + (1.0 - eta) * self.log_step_bar
        return self.step


@dataclass(frozen=True)
class HMCStep:
    u: float
    accepted: bool
    accept_prob: float
    nonfinite: bool = False


def hmc_update(u: float, target: Target, step_size: float, n_steps: int, rng: np.random.Generator) -> HMCStep:
    """HMC 遷移を 1 回行う。エネルギーが有限でない提案は棄却する。"""
    if n_steps < 1:
        raise ConfigError("BAD_CHAIN_CONFIG", "leapfrog steps must be >= 1")
    r0 = float(rng.standard_normal())
    log_u = math.log(rng.random())

    h0 = hamiltonian(target, u, r0)
    if not math.isfinite(h0):
        return HMCStep(u, False, 0.0, nonfinite=True)

    u_new, r_new = leapfrog(u, r0, target.grad, step_size, n_steps)
    h1 = hamiltonian(target, u_new, r_new) if math.isfinite(r_new) else math.inf
    if not math.isfinite(h1):
        return HMCStep(u, False, 0.0, nonfinite=True)

    log_ratio = h0 - h1
    accept_prob = 1.0 if log_ratio >= 0 else math.exp(log_ratio)
    if log_u < log_ratio:
        return HMCStep(u_new, True, accept_prob)
    return HMCStep(u, False, accept_prob)


def _one_step_accept(target: Target, u: float, r0: float, h0: float, step: float) -> float:
    u1, r1 = leapfrog(u, r0, target.grad, step, 1)
    h1 = hamiltonian(target, u1, r1) if math.isfinite(r1) else math.inf
    if not math.isfinite(h1):
        return 0.0
    return math.exp(min(0.0, h0 - h1))


def find_reasonable_step(
    u: float,
    target: Target,
    step_size: float,
    rng: np.random.Generator,
    target_accept: float = 0.5,
    max_doublings: int = 60,
) -> float:
    """1 歩のリープフロッグの受理確率が target_accept をまたぐまでステップ幅を倍々/半々にする。

    初期点のエネルギーが有限でなければ step_size をそのまま返す。
    """
    r0 = float(rng.standard_normal())
    h0 = hamiltonian(target, u, r0)
    if not math.isfinite(h0):
        return step_size

    step = float(step_size)
    direction = 1.0 if _one_step_accept(target, u, r0, h0, step) > target_accept else -1.0
    for _ in range(max_doublings):
        candidate = step * 2.0 ** direction
        if not STEP_MIN <= candidate <= STEP_MAX:
            break
        step = candidate
        alpha = _one_step_accept(target, u, r0, h0, step)
        if (direction > 0) != (alpha > target_accept):
            break
    return step


class HMCKernel:
    """ステップ幅の適応状態と受理統計を持つ HMC 遷移核"""

    def __init__(self, cfg: ChainConfig):
        self.cfg = cfg
        self.adapter = DualAveraging(cfg.init_step_size, delta=cfg.target_accept)
        self.step_size = cfg.init_step_size
        self.adapting = True
        self.transitions = 0
        self.accepted = 0
        self.nonfinite = 0
        self._stats_from_adaptation_end = (0, 0)

    def initialize_step(self, u: float, target: Target, rng: np.random.Generator) -> float:
        """u での 1 歩の受理率を手がかりに初期ステップ幅を決め、適応をそこから始め直す"""
        if hasattr(target, "begin_trajectory"):
            target.begin_trajectory()
        step = find_reasonable_step(u, target, self.step_size, rng)
        self.step_size = step
        self.adapter = DualAveraging(step, delta=self.cfg.target_accept)
        logger.debug("initial step size %.4g at u=%.4g", step, u)
        return step

    def transition(self, u: float, target: Target, rng: np.random.Generator, adapt: bool = False) -> float:
        if hasattr(target, "begin_trajectory"):
            target.begin_trajectory()
        result = hmc_update(u, target, self.step_size, self.cfg.leapfrog_steps, rng)
        self.transitions += 1
        self.accepted += int(result.accepted)
        if result.nonfinite:
            self.nonfinite += 1
            logger.debug("rejected proposal with non-finite energy at u=%.4g", u)
        if adapt and self.adapting:
            self.step_size = self.adapter.update(result.accept_prob)
        return result.u

    def finish_adaptation(self):
        """適応を止め、平均化したステップ幅に固定する"""
        if not self.adapting:
            return
        self.adapting = False
        self.step_size = self.adapter.final_step
        self._stats_from_adaptation_end = (self.transitions, self.accepted)
        logger.info("step size fixed at %.4g after %d adaptation updates", self.step_size, self.adapter.count)

    @property
    def acceptance_rate(self) -> float:
        """適応終了後の受理率 (適応中なら全体)"""
        t0, a0 = self._stats_from_adaptation_end
        transitions, accepted = self.transitions - t0, self.accepted - a0
        if transitions == 0:
            transitions, accepted = self.transitions, self.accepted
        return accepted / transitions if transitions else math.nan


def sample_chain(
    target: Target,
    u0: float,
    draws: int,
    cfg: ChainConfig,
    rng: np.random.Generator,
    warmup: Optional[int] = None,
) -> tuple[np.ndarray, HMCKernel]:
    """単独の HMC 連鎖。先頭 warmup 回で適応し、その後 draws 個を返す。"""
    warmup = cfg.burnin if warmup is None else int(warmup)
    kernel = HMCKernel(cfg)
    u = float(u0)
    if cfg.find_initial_step:
        kernel.initialize_step(u, target, rng)
    for _ in range(warmup):
        u = kernel.transition(u, target, rng, adapt=True)
    kernel.finish_adaptation()

    samples = np.empty(int(draws))
    for i in range(int(draws)):
        u = kernel.transition(u, target, rng)
        samples[i] = u
    return samples, kernel
