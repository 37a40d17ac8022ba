"""帰無・対立モデルの対数周辺擬似尤度 (Kronecker 構造を使う効率版)

対立モデル: vec(G) ~ N(0, W),  W = 11^T ⊗ R + I_n ⊗ Σ
帰無モデル: vec(G) ~ N(0, I_n ⊗ Σ)
どちらも Π vol(J_i) を掛け、-(ns/2) log 2π の正規化定数を含める。
(ns)×(ns) 行列は作らない。1 回の評価は O(s^3 + s^2 n + D^2 s n)。
"""

import logging
import math
from typing import Optional

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .covariance import psd_repair
from .errors import CovarianceSingularError, InputError
from .jacobian import total_log_vol
from .kernel import gram, witness_state
from .models import (
    CovEstimate,
    EvalPoints,
    Hypothesis,
    KernelParam,
    LogLik,
    PairedDataset,
    SigmaMethod,
    WitnessState,
)

logger = logging.getLogger(__name__)

LOG_2PI = math.log(2.0 * math.pi)
PATHS = ("auto", "efficient", "remark")


def _matrix(m) -> np.ndarray:
    if isinstance(m, CovEstimate):
        return m.sigma
    return np.asarray(m, dtype=np.float64)


def cholesky(m, name: str = "matrix"):
    """下三角 Cholesky 因子 (cho_factor 形式)。失敗したら psd_repair を 1 回だけ試す。

    Raises:
        CovarianceSingularError: 修復後も分解できない場合
    """
    m = _matrix(m)
    try:
        return cho_factor(m, lower=True)
    except (LinAlgError, ValueError):
        pass

    logger.warning("cholesky of %s failed; retrying after psd_repair", name)
    try:
        repaired = psd_repair(m).sigma
        return cho_factor(repaired, lower=True)
    except (LinAlgError, ValueError, InputError) as e:
        raise CovarianceSingularError("CHOLESKY_FAILED", f"{name}: {e}") from e


def chol_logdet(factor) -> float:
    c, _ = factor
    return 2.0 * float(np.sum(np.log(np.diag(c))))


def _centered(g: np.ndarray) -> np.ndarray:
    """G H"""
    return g - g.mean(axis=1, keepdims=True)


def r_matrix(z: EvalPoints, p: KernelParam) -> np.ndarray:
    """[R_θ]_ij = r_θ(z_i, z_j)"""
    r = gram(z.z, z.z, p, which="r")
    return 0.5 * (r + r.T)


def kron_logdet(sigma, r, n: int) -> float:
    """log det(11^T ⊗ R + I ⊗ Σ) = log det(Σ + nR) + (n-1) log det Σ"""
    sigma = _matrix(sigma)
    r = np.asarray(r, dtype=np.float64)
    ld_sum = chol_logdet(cholesky(sigma + n * r, "sigma + n R"))
    if n == 1:
        return ld_sum
    return ld_sum + (n - 1) * chol_logdet(cholesky(sigma, "sigma"))


def kron_quadform(g, sigma, r, n: int) -> float:
    """vec(G)^T W^{-1} vec(G) = Tr((Σ+nR)^{-1} G G^T + ((1/n)ΣR^{-1}Σ + Σ)^{-1} G H G^T)

    第 2 項の逆行列は n (Σ+nR)^{-1} R Σ^{-1} と等しいので、R の逆行列は作らない。
    """
    g = np.asarray(g, dtype=np.float64)
    sigma = _matrix(sigma)
    r = np.asarray(r, dtype=np.float64)
    a = cholesky(sigma + n * r, "sigma + n R")
    first = float(np.sum(g * cho_solve(a, g)))
    if n == 1:
        return first  # H = 0

    gc = _centered(g)
    u = cho_solve(cholesky(sigma, "sigma"), gc)
    v = cho_solve(a, r @ u)
    return first + n * float(np.sum(gc * v))


def remark_quadform(g, r, n: int) -> float:
    """Σ = (1/n) G H G^T のときの二次形式: Tr(n (G H G^T + n^2 R)^{-1} (G G^T + n^2 R))"""
    if n < 2:
        raise InputError("TOO_FEW_ROWS", "remark path needs n >= 2 (centering of one column is zero)")
    g = np.asarray(g, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    gc = _centered(g)
    n2r = (n * n) * r
    b = cholesky(gc @ gc.T + n2r, "G H G^T + n^2 R")
    return n * float(np.trace(cho_solve(b, g @ g.T + n2r)))


def _prepare(data: PairedDataset, z: EvalPoints, p: KernelParam, sigma: CovEstimate,
             state: Optional[WitnessState]) -> WitnessState:
    if state is None:
        state = witness_state(data, z, p)
    if sigma.sigma.shape != (state.s, state.s):
        raise InputError("SHAPE_MISMATCH", f"sigma {sigma.sigma.shape} for s={state.s}")
    return state


def _jacobian_term(data, z, p, with_jacobian: bool, clamp_jacobian: bool) -> float:
    if not with_jacobian:
        return 0.0
    return total_log_vol(data, z, p, clamp=clamp_jacobian)


def loglik_null(
    data: PairedDataset,
    z: EvalPoints,
    p: KernelParam,
    sigma: CovEstimate,
    *,
    state: Optional[WitnessState] = None,
    with_jacobian: bool = True,
    clamp_jacobian: bool = False,
) -> LogLik:
    """帰無モデル: -(ns/2)log2π - (n/2) log det Σ - ½ Tr(Σ^{-1} G G^T) + Σ log vol(J_i)"""
    state = _prepare(data, z, p, sigma, state)
    n, s = state.n, state.s
    factor = cholesky(sigma.sigma, "sigma")
    logdet = n * chol_logdet(factor)
    quad = float(np.sum(state.g * cho_solve(factor, state.g)))
    jac = _jacobian_term(data, z, p, with_jacobian, clamp_jacobian)
    value = -0.5 * n * s * LOG_2PI - 0.5 * logdet - 0.5 * quad + jac
    return LogLik(
        value=value,
        model=Hypothesis.H0,
        path="efficient",
        jacobian=jac,
        extras={"logdet": logdet, "quadform": quad},
    )


def loglik_alt(
    data: PairedDataset,
    z: EvalPoints,
    p: KernelParam,
    sigma: CovEstimate,
    r: Optional[np.ndarray] = None,
    *,
    state: Optional[WitnessState] = None,
    path: str = "auto",
    with_jacobian: bool = True,
    clamp_jacobian: bool = False,
) -> LogLik:
    """対立モデル: -(ns/2)log2π - ½ log det W - ½ vec(G)^T W^{-1} vec(G) + Σ log vol(J_i)

    Args:
        path: "efficient" は一般形、"remark" は Σ = (1/n)GHG^T の簡約形。
              "auto" は一般形で分解に失敗し、かつ Method 2 のときだけ簡約形に切り替える。
    """
    if path not in PATHS:
        raise InputError("BAD_PATH", f"path must be one of {PATHS}, got {path!r}")
    state = _prepare(data, z, p, sigma, state)
    if r is None:
        r = r_matrix(z, p)
    n, s = state.n, state.s

    if path == "remark" and sigma.method is not SigmaMethod.METHOD2:
        raise InputError("BAD_PATH", "remark path requires a Method 2 covariance estimate")

    logdet = kron_logdet(sigma, r, n)
    used = "remark" if path == "remark" else "efficient"
    if used == "remark":
        quad = remark_quadform(state.g, r, n)
    else:
        try:
            quad = kron_quadform(state.g, sigma, r, n)
        except CovarianceSingularError:
            if path != "auto" or sigma.method is not SigmaMethod.METHOD2:
                raise
            logger.warning("general quadratic form failed at theta=%.4g; using remark path", p.theta)
            quad = remark_quadform(state.g, r, n)
            used = "remark"

    jac = _jacobian_term(data, z, p, with_jacobian, clamp_jacobian)
    value = -0.5 * n * s * LOG_2PI - 0.5 * logdet - 0.5 * quad + jac
    return LogLik(
        value=value,
        model=Hypothesis.H1,
        path=used,
        jacobian=jac,
        extras={"logdet": logdet, "quadform": quad},
    )
