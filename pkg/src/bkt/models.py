"""bkt データモデル定義

カーネル・共分散・ヤコビアン・尤度の各モジュールが共有する型。
配列は生成時に float64 へ変換し、書き込み不可にしておく。
"""

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InputError, ParameterError


def _frozen_array(value, ndim: int, name: str) -> np.ndarray:
    arr = np.array(value, dtype=np.float64)
    if ndim == 2 and arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != ndim:
        raise InputError("BAD_SHAPE", f"{name} must be {ndim}-D, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


class Hypothesis(enum.Enum):
    """仮説ラベル M"""
    H0 = 0
    H1 = 1

    def __str__(self) -> str:
        return self.name


class SigmaMethod(enum.Enum):
    """Σ_θ の推定方法"""
    METHOD1 = 1  # X ⟂ Y を仮定し交差項を落とす
    METHOD2 = 2  # g_θ(X, Y) の経験共分散 (1/n) G H G^T

    @classmethod
    def parse(cls, value) -> "SigmaMethod":
        if isinstance(value, cls):
            return value
        return cls(int(value))


@dataclass(frozen=True)
class KernelParam:
    """ガウス RBF カーネルの二乗長さスケール θ (Σ̃_θ = θI)"""
    theta: float

    def __post_init__(self):
        theta = float(self.theta)
        if not math.isfinite(theta) or theta <= 0:
            raise ParameterError("BAD_THETA", f"theta must be positive and finite, got {self.theta}")
        object.__setattr__(self, "theta", theta)


@dataclass(frozen=True)
class PairedDataset:
    """対になった観測 {(x_i, y_i)}: x, y はともに n×D"""
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = _frozen_array(self.x, 2, "x")
        y = _frozen_array(self.y, 2, "y")
        if x.shape != y.shape:
            raise InputError("SHAPE_MISMATCH", f"x{x.shape} and y{y.shape} differ")
        if x.shape[0] < 1:
            raise InputError("EMPTY", "dataset has no rows")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise InputError("NON_FINITE", "dataset contains NaN or Inf")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    def pooled(self) -> np.ndarray:
        """{x_1..x_n, y_1..y_n} を 2n×D で返す"""
        return np.vstack([self.x, self.y])

    def swapped(self) -> "PairedDataset":
        return PairedDataset(x=self.y, y=self.x)


@dataclass(frozen=True)
class EvalPoints:
    """評価点 (inducing points) z: s×D"""
    z: np.ndarray
    source_indices: Optional[tuple[np.ndarray, np.ndarray]] = None  # (x 行, y 行)

    def __post_init__(self):
        z = _frozen_array(self.z, 2, "z")
        if z.shape[0] < 1:
            raise InputError("EMPTY", "no evaluation points")
        object.__setattr__(self, "z", z)

    @property
    def s(self) -> int:
        return self.z.shape[0]

    @property
    def dim(self) -> int:
        return self.z.shape[1]


@dataclass(frozen=True)
class WitnessState:
    """固定した θ での証人ベクトル Δ と G_θ, グラム行列ブロック"""
    delta: np.ndarray   # 長さ s
    g: np.ndarray       # s×n, g = k_zx - k_zy
    k_zx: np.ndarray    # s×n
    k_zy: np.ndarray    # s×n
    theta: KernelParam

    @property
    def s(self) -> int:
        return self.g.shape[0]

    @property
    def n(self) -> int:
        return self.g.shape[1]


@dataclass(frozen=True)
class CovEstimate:
    """g_θ(X, Y) の共分散 Σ_θ (Δ の共分散は Σ_θ / n)"""
    sigma: np.ndarray
    method: SigmaMethod
    ridge_added: float = 0.0

    @property
    def s(self) -> int:
        return self.sigma.shape[0]


@dataclass(frozen=True)
class JacobianBlocks:
    """1 組 (x_i, y_i) の J^T J を構成する D×D ブロック"""
    jxtjx: np.ndarray
    jxtjy: np.ndarray
    jytjy: np.ndarray
    n_eval: Optional[int] = None  # s (分かっていれば階数チェックに使う)

    @property
    def dim(self) -> int:
        return self.jxtjx.shape[0]

    def assemble(self) -> np.ndarray:
        """2D×2D の J^T J を組み立てる"""
        return np.block([
            [self.jxtjx, self.jxtjy],
            [self.jxtjy.T, self.jytjy],
        ])


@dataclass(frozen=True)
class LogLik:
    """対数周辺擬似尤度 (正規化定数込み)"""
    value: float
    model: Hypothesis
    path: str  # "naive" | "efficient" | "remark"
    jacobian: float = 0.0  # 含まれる log-volume 項
    extras: dict = field(default_factory=dict, compare=False)
