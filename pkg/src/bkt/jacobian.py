"""変数変換 (x, y) ↦ g_θ(x, y) のヤコビアンと log-volume 項

J_θ(x_i, y_i) = [J_x | J_y] は s×2D。
  [J_x]_{jm} = ∂k(x_i, z_j)/∂x_m  = -k(x_i, z_j)(x_im - z_jm)/θ
  [J_y]_{jm} = -∂k(y_i, z_j)/∂y_m =  k(y_i, z_j)(y_im - z_jm)/θ
log vol = ½ log det(J^T J)。J^T J は D×D ブロック 3 つから組み立てる。
全ペアを n×s×D の配列でまとめて計算する。
"""

import logging

import numpy as np

from .errors import DegenerateGeometryError, InputError
from .models import EvalPoints, JacobianBlocks, KernelParam, PairedDataset

logger = logging.getLogger(__name__)

CLAMP_SCALE = 1e-12


def _jacobian_factors(x: np.ndarray, y: np.ndarray, z: np.ndarray, theta: float):
    """J_x, J_y を n×s×D で返す"""
    dx = x[:, None, :] - z[None, :, :]
    dy = y[:, None, :] - z[None, :, :]
    kx = np.exp(-np.sum(dx * dx, axis=-1) / (2.0 * theta))
    ky = np.exp(-np.sum(dy * dy, axis=-1) / (2.0 * theta))
    jx = -(kx[..., None] * dx) / theta
    jy = (ky[..., None] * dy) / theta
    return jx, jy


def jtj_batch(jx: np.ndarray, jy: np.ndarray) -> np.ndarray:
    """n×s×D の J_x, J_y から n×2D×2D の J^T J を組み立てる"""
    a = np.einsum("nsu,nsv->nuv", jx, jx)
    b = np.einsum("nsu,nsv->nuv", jx, jy)
    c = np.einsum("nsu,nsv->nuv", jy, jy)
    top = np.concatenate([a, b], axis=2)
    bottom = np.concatenate([np.transpose(b, (0, 2, 1)), c], axis=2)
    return np.concatenate([top, bottom], axis=1)


def _floor(trace: np.ndarray) -> np.ndarray:
    return np.where(trace > 0, CLAMP_SCALE * trace, np.finfo(np.float64).tiny)


def half_logdets(jtj: np.ndarray, clamp: bool) -> np.ndarray:
    """n×2D×2D の各行列について ½ log det を返す"""
    jtj = 0.5 * (jtj + np.transpose(jtj, (0, 2, 1)))
    lam = np.linalg.eigvalsh(jtj)
    floor = _floor(np.trace(jtj, axis1=1, axis2=2))
    bad = lam[:, 0] <= floor
    if np.any(bad):
        first = int(np.argmax(bad))
        if not clamp:
            raise DegenerateGeometryError(
                "SINGULAR_JTJ",
                "J^T J is numerically singular",
                lambda_min=float(lam[first, 0]),
                pair_index=first,
            )
        logger.warning("clamping %d degenerate J^T J matrices (first pair %d)", int(bad.sum()), first)
        lam = np.maximum(lam, floor[:, None])
    return 0.5 * np.sum(np.log(lam), axis=1)


def jacobian_gram(x_i, y_i, z: EvalPoints, p: KernelParam) -> JacobianBlocks:
    """1 組の観測について J_x^T J_x, J_x^T J_y, J_y^T J_y を返す"""
    x_i = np.atleast_1d(np.asarray(x_i, dtype=np.float64))
    y_i = np.atleast_1d(np.asarray(y_i, dtype=np.float64))
    if x_i.shape != y_i.shape or x_i.size != z.dim:
        raise InputError("DIM_MISMATCH", f"x_i{x_i.shape}, y_i{y_i.shape}, z D={z.dim}")
    jx, jy = _jacobian_factors(x_i[None, :], y_i[None, :], z.z, p.theta)
    jx, jy = jx[0], jy[0]
    return JacobianBlocks(
        jxtjx=jx.T @ jx,
        jxtjy=jx.T @ jy,
        jytjy=jy.T @ jy,
        n_eval=z.s,
    )


def log_vol(blocks: JacobianBlocks, clamp: bool = False) -> float:
    """½ log det(J^T J)

    Args:
        clamp: True なら 1e-12·trace 未満の固有値を切り上げる (警告ログ)。

    Raises:
        DegenerateGeometryError: J^T J が特異 (s < 2D の場合を含む)
    """
    d = blocks.dim
    if blocks.n_eval is not None and blocks.n_eval < 2 * d and not clamp:
        raise DegenerateGeometryError(
            "RANK_DEFICIENT",
            f"s={blocks.n_eval} < 2D={2 * d}, J^T J cannot be full rank",
        )
    return float(half_logdets(blocks.assemble()[None, :, :], clamp)[0])


def require_full_rank(s: int, dim: int, clamp: bool = False):
    """s < 2D では J^T J が正則になりえない (clamp するなら通す)"""
    if s < 2 * dim and not clamp:
        raise DegenerateGeometryError("RANK_DEFICIENT", f"s={s} < 2D={2 * dim}, J^T J cannot be full rank")


def log_vols(data: PairedDataset, z: EvalPoints, p: KernelParam, clamp: bool = False) -> np.ndarray:
    """全ペアの ½ log det(J_i^T J_i) を長さ n の配列で返す"""
    if z.dim != data.dim:
        raise InputError("DIM_MISMATCH", f"eval points D={z.dim}, data D={data.dim}")
    require_full_rank(z.s, data.dim, clamp)
    return half_logdets(jtj_batch(*_jacobian_factors(data.x, data.y, z.z, p.theta)), clamp)


def total_log_vol(data: PairedDataset, z: EvalPoints, p: KernelParam, clamp: bool = False) -> float:
    """Σ_i ½ log det(J_i^T J_i)。添字順に加算する。"""
    return float(np.sum(log_vols(data, z, p, clamp)))
