"""θ によらない量を前計算しておき、1 つの θ での評価を速くする作業領域

距離行列 (z-x, z-y, z-z) と差分配列 x_i - z_j, y_i - z_j はデータと評価点だけで決まる。
θ ごとには exp を取り直し、Σ_θ の固有分解 1 回を ridge の決定・log det・Σ^{-1} の適用で使い回す。
結果は loglik_null / loglik_alt (efficient) と total_log_vol の組み合わせと一致する。
"""

import logging

import numpy as np
from scipy.linalg import cho_solve
from scipy.spatial.distance import cdist

from ..covariance import ridge_for, sigma_method1, sigma_method2
from ..errors import CovarianceSingularError, InputError
from ..jacobian import half_logdets, jtj_batch, require_full_rank
from ..likelihood import LOG_2PI, chol_logdet, cholesky
from ..models import EvalPoints, KernelParam, PairedDataset, SigmaMethod, WitnessState

logger = logging.getLogger(__name__)


class ThetaWorkspace:
    """データと評価点を固定したときの θ 評価器

    Args:
        data: 観測ペア
        z: 評価点
        method: Σ_θ の推定方法
        clamp_jacobian: J^T J の特異値を切り上げるか
    """

    def __init__(self, data: PairedDataset, z: EvalPoints, method=SigmaMethod.METHOD2,
                 clamp_jacobian: bool = False):
        if z.dim != data.dim:
            raise InputError("DIM_MISMATCH", f"eval points D={z.dim}, data D={data.dim}")
        if data.n < 2:
            raise InputError("TOO_FEW_ROWS", f"covariance estimation needs n >= 2, got {data.n}")
        self.n = data.n
        self.s = z.s
        self.dim = data.dim
        self.method = SigmaMethod.parse(method)
        self.clamp_jacobian = clamp_jacobian

        self._sq_zx = cdist(z.z, data.x, "sqeuclidean")
        self._sq_zy = cdist(z.z, data.y, "sqeuclidean")
        self._sq_zz = cdist(z.z, z.z, "sqeuclidean")
        self._dx = data.x[:, None, :] - z.z[None, :, :]
        self._dy = data.y[:, None, :] - z.z[None, :, :]
        self._const = -0.5 * self.n * self.s * LOG_2PI

    def _state(self, theta: float) -> WitnessState:
        k_zx = np.exp(-self._sq_zx / (2.0 * theta))
        k_zy = np.exp(-self._sq_zy / (2.0 * theta))
        g = k_zx - k_zy
        return WitnessState(delta=g.mean(axis=1), g=g, k_zx=k_zx, k_zy=k_zy, theta=KernelParam(theta))

    def _raw_sigma(self, state: WitnessState) -> np.ndarray:
        if self.method is SigmaMethod.METHOD1:
            return sigma_method1(state, self.n).sigma
        return sigma_method2(state, self.n).sigma

    def _r(self, theta: float) -> np.ndarray:
        r = (np.pi * theta) ** (self.dim / 2.0) * np.exp(-self._sq_zz / (4.0 * theta))
        return 0.5 * (r + r.T)

    def log_vol(self, state: WitnessState) -> float:
        """Σ_i ½ log det(J_i^T J_i)"""
        require_full_rank(self.s, self.dim, self.clamp_jacobian)
        theta = state.theta.theta
        jx = -(state.k_zx.T[..., None] * self._dx) / theta
        jy = (state.k_zy.T[..., None] * self._dy) / theta
        return float(np.sum(half_logdets(jtj_batch(jx, jy), self.clamp_jacobian)))

    def evaluate(self, theta: float) -> tuple[float, float, float]:
        """(帰無の対数尤度, 対立の対数尤度, Σ log vol) を返す。尤度にヤコビアン項は含めない。

        Raises:
            ParameterError: θ ≤ 0 または非有限
            CovarianceSingularError: 修復後の Σ_θ や Σ_θ + nR_θ が分解できない
            DegenerateGeometryError: J^T J が特異
        """
        state = self._state(float(theta))
        theta = state.theta.theta
        n, s = self.n, self.s

        raw = self._raw_sigma(state)
        lam, vecs = np.linalg.eigh(raw)
        ridge = ridge_for(float(lam[0]), float(np.trace(raw)), s)
        lam = lam + ridge
        if not (np.all(np.isfinite(lam)) and lam[0] > 0):
            raise CovarianceSingularError("CHOLESKY_FAILED", f"sigma has eigenvalue {lam[0]:.3e} at theta={theta:.4g}")
        logdet_sigma = float(np.sum(np.log(lam)))

        def sigma_solve(m: np.ndarray) -> np.ndarray:
            return vecs @ ((vecs.T @ m) / lam[:, None])

        g = state.g
        null = self._const - 0.5 * n * logdet_sigma - 0.5 * float(np.sum(g * sigma_solve(g)))

        r = self._r(theta)
        sigma = raw + ridge * np.eye(s)
        a = cholesky(sigma + n * r, "sigma + n R")
        logdet = chol_logdet(a) + (n - 1) * logdet_sigma
        quad = float(np.sum(g * cho_solve(a, g)))
        gc = g - g.mean(axis=1, keepdims=True)
        quad += n * float(np.sum(gc * cho_solve(a, r @ sigma_solve(gc))))
        alt = self._const - 0.5 * logdet - 0.5 * quad

        return null, alt, self.log_vol(state)
