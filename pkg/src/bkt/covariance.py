"""特徴差ベクトル g_θ(X, Y) の共分散 Σ_θ の推定

Method 1: Σ = (1/n)(K_zx H K_xz + K_zy H K_yz)    X ⟂ Y を仮定
Method 2: Σ = (1/n) G H G^T                       独立性を仮定しない (デフォルト)

H = I - (1/n)11^T は中心化行列。H は明示的に作らず、行平均を引いて適用する。
"""

import logging

import numpy as np

from .errors import InputError
from .models import CovEstimate, SigmaMethod, WitnessState

logger = logging.getLogger(__name__)

RIDGE_SCALE = 1e-8
SYMMETRY_TOL = 1e-10


def _centered(m: np.ndarray) -> np.ndarray:
    """M H (各行から行平均を引く)"""
    return m - m.mean(axis=1, keepdims=True)


def _check_n(state: WitnessState, n: int) -> int:
    n = int(n)
    if n < 2:
        raise InputError("TOO_FEW_ROWS", f"covariance estimation needs n >= 2, got {n}")
    if state.n != n:
        raise InputError("SHAPE_MISMATCH", f"G has {state.n} columns, n={n}")
    return n


def _symmetrize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


def sigma_method1(state: WitnessState, n: int) -> CovEstimate:
    """Method 1: (1/n)(K_zx H K_xz + K_zy H K_yz)。交差項は落とす。"""
    n = _check_n(state, n)
    cx = _centered(state.k_zx)
    cy = _centered(state.k_zy)
    sigma = _symmetrize(cx @ cx.T + cy @ cy.T) / n
    return CovEstimate(sigma=sigma, method=SigmaMethod.METHOD1)


def sigma_method2(state: WitnessState, n: int) -> CovEstimate:
    """Method 2: (1/n) G H G^T。中心化した外積なので構成上 PSD。"""
    n = _check_n(state, n)
    gc = _centered(state.g)
    sigma = _symmetrize(gc @ gc.T) / n
    return CovEstimate(sigma=sigma, method=SigmaMethod.METHOD2)


def ridge_for(lam_min: float, trace: float, s: int) -> float:
    """max(0, -λ_min) + 1e-8 · (trace / s)。trace が 0 以下なら trace/s の代わりに 1。"""
    unit = trace / s if trace > 0 else 1.0
    return max(0.0, -lam_min) + RIDGE_SCALE * unit


def psd_repair(sigma, method: SigmaMethod = SigmaMethod.METHOD2) -> CovEstimate:
    """ε I を加えて Cholesky 分解が通るようにする。

    ε は ridge_for で決める。

    Args:
        sigma: 対称行列、または CovEstimate (method と既存の ridge を引き継ぐ)

    Raises:
        InputError: 正方でない、または非対称
    """
    ridge_before = 0.0
    if isinstance(sigma, CovEstimate):
        method = sigma.method
        ridge_before = sigma.ridge_added
        sigma = sigma.sigma
    m = np.array(sigma, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InputError("NOT_SQUARE", f"expected a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if not np.allclose(m, m.T, rtol=0.0, atol=SYMMETRY_TOL * scale):
        raise InputError("NOT_SYMMETRIC", "covariance matrix is not symmetric")

    m = _symmetrize(m)
    s = m.shape[0]
    lam_min = float(np.linalg.eigvalsh(m)[0])
    ridge = ridge_for(lam_min, float(np.trace(m)), s)
    if lam_min < 0:
        logger.debug("psd_repair: lambda_min=%.3e, ridge=%.3e", lam_min, ridge)
    m[np.diag_indices(s)] += ridge
    return CovEstimate(sigma=m, method=method, ridge_added=ridge_before + ridge)


def estimate_sigma(state: WitnessState, n: int, method=SigmaMethod.METHOD2) -> CovEstimate:
    """指定した方法で Σ_θ を推定し、ridge で修復して返す"""
    method = SigmaMethod.parse(method)
    if method is SigmaMethod.METHOD1:
        raw = sigma_method1(state, n)
    else:
        raw = sigma_method2(state, n)
    return psd_repair(raw)
