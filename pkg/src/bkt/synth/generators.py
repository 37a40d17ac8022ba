"""シナリオごとの乱数生成。同じ ScenarioSpec からは常に同じデータを返す。"""

import logging
import math

import numpy as np
from scipy import stats

from ..models import PairedDataset
from .models import BLOB_CENTERS, BLOB_SHIFT, Moments, ScenarioSpec

logger = logging.getLogger(__name__)


def rotated_covariance(eps: float, angle: float = math.pi / 2) -> np.ndarray:
    """Q S_ε Q^T  (Q = [[cos, sin], [-sin, cos]], S_ε = diag(ε, 1))"""
    c, s = math.cos(angle), math.sin(angle)
    q = np.array([[c, s], [-s, c]])
    return q @ np.diag([float(eps), 1.0]) @ q.T


def _normal(rng, n, mean, cov) -> np.ndarray:
    mean = np.atleast_1d(np.asarray(mean, dtype=np.float64))
    chol = np.linalg.cholesky(np.asarray(cov, dtype=np.float64))
    return mean + rng.standard_normal((n, mean.size)) @ chol.T


def _gauss1d(p: dict, n: int, rng) -> tuple[np.ndarray, np.ndarray]:
    dim = int(p.get("dim", 1))
    x = p.get("mean_x", 0.0) + math.sqrt(p.get("var_x", 1.0)) * rng.standard_normal((n, dim))
    y = p.get("mean_y", 0.0) + math.sqrt(p.get("var_y", 1.0)) * rng.standard_normal((n, dim))
    return x, y


def _laplace1d(p: dict, n: int, rng):
    x = p.get("mean_x", 0.0) + math.sqrt(p.get("var_x", 1.0)) * rng.standard_normal((n, 1))
    y = rng.laplace(p.get("loc_y", 0.0), p["scale_y"], size=(n, 1))
    return x, y


def _copula(p: dict, n: int, rng):
    """相関 ρ の 2 変量正規 → Φ → 各周辺の逆 CDF (x は正規, y はラプラス)"""
    rho = float(p.get("rho", 0.5))
    a = rng.standard_normal((n, 2))
    z1 = a[:, 0]
    z2 = rho * a[:, 0] + math.sqrt(1.0 - rho * rho) * a[:, 1]

    x_dist = stats.norm(loc=p.get("mean_x", 0.0), scale=math.sqrt(p.get("var_x", 1.0)))
    y_dist = stats.laplace(loc=p.get("loc_y", 0.0), scale=p["scale_y"])
    # 上側は生存関数で逆変換して Φ(z) → 1 の丸めを避ける
    x = np.where(z1 < 0, x_dist.ppf(stats.norm.cdf(z1)), x_dist.isf(stats.norm.sf(z1)))
    y = np.where(z2 < 0, y_dist.ppf(stats.norm.cdf(z2)), y_dist.isf(stats.norm.sf(z2)))
    return x[:, None], y[:, None]


def _mixture_draw(components, n: int, rng) -> np.ndarray:
    weights = np.array([w for w, _, _ in components], dtype=np.float64)
    means = np.array([m for _, m, _ in components], dtype=np.float64)
    sds = np.sqrt(np.array([v for _, _, v in components], dtype=np.float64))
    idx = rng.choice(len(components), size=n, p=weights / weights.sum())
    return (means[idx] + sds[idx] * rng.standard_normal(n))[:, None]


def _mixture1d(p: dict, n: int, rng):
    x = _mixture_draw(p["x"], n, rng)
    y = _mixture_draw(p["y"], n, rng)
    return x, y


def _gauss2d_rot(p: dict, n: int, rng):
    angle = p.get("angle", math.pi / 2)
    x = _normal(rng, n, p.get("mean_x", (10.0, 10.0)), np.eye(2))
    y = _normal(rng, n, p.get("mean_y", (10.0, 10.0)), rotated_covariance(p.get("eps", 1.0), angle))
    return x, y


def _blobs2x2(p: dict, n: int, rng):
    """各ブロブから同数ずつ。行の対応に構造が残らないよう x, y を別々に並べ替える。"""
    centers = np.asarray(p.get("centers", BLOB_CENTERS), dtype=np.float64)
    shift = np.asarray(p.get("shift", BLOB_SHIFT), dtype=np.float64)
    angle = p.get("angle", math.pi / 2)
    cov_x = rotated_covariance(p.get("eps_x", 1.0), angle)
    cov_y = rotated_covariance(p.get("eps_y", 1.0), angle)
    per = n // len(centers)

    x = np.vstack([_normal(rng, per, c, cov_x) for c in centers])
    y = np.vstack([_normal(rng, per, c + shift, cov_y) for c in centers])
    return x[rng.permutation(n)], y[rng.permutation(n)]


def _padded(p: dict, n: int, rng):
    x, y = _blobs2x2(p, n, rng)
    pad = int(p.get("pad", 0))
    if pad == 0:
        return x, y
    return (np.hstack([x, rng.standard_normal((n, pad))]),
            np.hstack([y, rng.standard_normal((n, pad))]))


_GENERATORS = {
    "gauss1d": _gauss1d,
    "laplace1d": _laplace1d,
    "copula_corr": _copula,
    "mixture1d": _mixture1d,
    "gauss2d_rot": _gauss2d_rot,
    "blobs2x2": _blobs2x2,
    "padded": _padded,
}


def gen(spec: ScenarioSpec) -> PairedDataset:
    """シナリオからデータセットを生成する"""
    rng = np.random.default_rng(spec.seed)
    x, y = _GENERATORS[spec.family](spec.params, spec.n, rng)
    logger.debug("generated %s: n=%d D=%d seed=%s", spec.family, x.shape[0], x.shape[1], spec.seed)
    return PairedDataset(x=x, y=y)


def empirical_moments(data: PairedDataset) -> Moments:
    return Moments(
        mean_x=data.x.mean(axis=0),
        var_x=data.x.var(axis=0),
        mean_y=data.y.mean(axis=0),
        var_y=data.y.var(axis=0),
    )
