"""ガウス RBF カーネルとその自己畳み込み r_θ, グラム行列, 証人ベクトル

k_θ(a, b) = exp(-||a - b||^2 / (2θ))
r_θ(a, b) = (πθ)^{D/2} exp(-||a - b||^2 / (4θ))   (ν = R^D 上のルベーグ測度)
"""

import logging
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .errors import ConfigError, DegenerateDataError, InputError
from .models import EvalPoints, KernelParam, PairedDataset, WitnessState

logger = logging.getLogger(__name__)

KERNELS = ("k", "r")


def _as_vector(a, name: str) -> np.ndarray:
    v = np.atleast_1d(np.asarray(a, dtype=np.float64))
    if v.ndim != 1:
        raise InputError("BAD_SHAPE", f"{name} must be a vector, got shape {v.shape}")
    return v


def _sqdist(a: np.ndarray, b: np.ndarray) -> float:
    if a.shape != b.shape:
        raise InputError("DIM_MISMATCH", f"vectors of dimension {a.size} and {b.size}")
    diff = a - b
    return float(diff @ diff)


def gaussian_kernel(a, b, p: KernelParam) -> float:
    """k_θ(a, b) = exp(-||a - b||^2 / (2θ))"""
    a = _as_vector(a, "a")
    b = _as_vector(b, "b")
    return float(np.exp(-_sqdist(a, b) / (2.0 * p.theta)))


def r_kernel(a, b, p: KernelParam, dim: Optional[int] = None) -> float:
    """r_θ(a, b) = π^{D/2} θ^{D/2} exp(-||a - b||^2 / (4θ))

    Args:
        dim: 次元 D。省略時はベクトルの長さ。
    """
    a = _as_vector(a, "a")
    b = _as_vector(b, "b")
    d = a.size if dim is None else int(dim)
    return float((np.pi * p.theta) ** (d / 2.0) * np.exp(-_sqdist(a, b) / (4.0 * p.theta)))


def gram(A, B, p: KernelParam, which: str = "k") -> np.ndarray:
    """A (m×D) と B (p×D) の各行の組に k または r を適用した m×p 行列"""
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    if A.shape[1] != B.shape[1]:
        raise InputError("DIM_MISMATCH", f"row dimensions {A.shape[1]} and {B.shape[1]}")
    if which not in KERNELS:
        raise InputError("BAD_KERNEL", f"which must be one of {KERNELS}, got {which!r}")

    sq = cdist(A, B, "sqeuclidean")
    if which == "k":
        return np.exp(-sq / (2.0 * p.theta))
    scale = (np.pi * p.theta) ** (A.shape[1] / 2.0)
    return scale * np.exp(-sq / (4.0 * p.theta))


def gram_blocks(data: PairedDataset, z: EvalPoints, p: KernelParam) -> tuple[np.ndarray, np.ndarray]:
    """K_zx, K_zy (ともに s×n)"""
    if z.dim != data.dim:
        raise InputError("DIM_MISMATCH", f"eval points D={z.dim}, data D={data.dim}")
    return gram(z.z, data.x, p), gram(z.z, data.y, p)


def median_heuristic(data: PairedDataset) -> KernelParam:
    """プール標本の全ペアについて ||a - b||^2 / 2 の中央値を θ とする。

    中央値のペアでカーネル値は exp(-1) になる。

    Raises:
        DegenerateDataError: 全点が一致する場合
    """
    halved = pdist(data.pooled(), "sqeuclidean") / 2.0
    if halved.size == 0 or not np.any(halved > 0):
        raise DegenerateDataError("ALL_IDENTICAL", "median heuristic needs at least two distinct points")

    theta = float(np.median(halved))
    if theta <= 0:
        # 重複点が過半数の場合は正の距離だけで中央値を取る
        theta = float(np.median(halved[halved > 0]))
        logger.warning("median of pairwise distances is zero; using median of positive distances (%.4g)", theta)
    return KernelParam(theta)


def subsample_eval_points(data: PairedDataset, s: int, seed) -> EvalPoints:
    """x から s/2 行, y から s/2 行を非復元抽出して評価点にする。

    Raises:
        ConfigError: s が奇数、または s/2 > n
    """
    s = int(s)
    if s < 2 or s % 2:
        raise ConfigError("BAD_S", f"s must be a positive even number, got {s}")
    half = s // 2
    if half > data.n:
        raise ConfigError("BAD_S", f"s/2={half} exceeds n={data.n}")

    rng = np.random.default_rng(seed)
    ix = np.sort(rng.choice(data.n, size=half, replace=False))
    iy = np.sort(rng.choice(data.n, size=half, replace=False))
    z = np.vstack([data.x[ix], data.y[iy]])
    return EvalPoints(z=z, source_indices=(ix, iy))


def witness_state(data: PairedDataset, z: EvalPoints, p: KernelParam) -> WitnessState:
    """Δ_j = (1/n) Σ_i [k(x_i, z_j) - k(y_i, z_j)] と G_θ を計算する"""
    k_zx, k_zy = gram_blocks(data, z, p)
    g = k_zx - k_zy
    for arr in (k_zx, k_zy, g):
        arr.setflags(write=False)
    delta = g.mean(axis=1)
    delta.setflags(write=False)
    return WitnessState(delta=delta, g=g, k_zx=k_zx, k_zy=k_zy, theta=p)
