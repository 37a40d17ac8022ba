"""総当たりの参照実装 (テストと `bkt check` 専用)

W_θ を密行列で組み立て、多変量正規の対数密度・ヤコビアンを直接評価する。
効率版との一致を確認するためのもので、速度は考慮しない。
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate
from scipy.linalg import LinAlgError, cholesky, solve_triangular

from .covariance import estimate_sigma, psd_repair
from .errors import ConfigError, CovarianceSingularError, InputError
from .inference.bayes import pseudo_bayes_factor
from .kernel import gaussian_kernel, median_heuristic, r_kernel, subsample_eval_points, witness_state
from .likelihood import (
    LOG_2PI,
    kron_logdet,
    kron_quadform,
    loglik_alt,
    loglik_null,
    r_matrix,
    remark_quadform,
)
from .jacobian import jacobian_gram, total_log_vol
from .models import (
    CovEstimate,
    EvalPoints,
    Hypothesis,
    KernelParam,
    LogLik,
    PairedDataset,
    SigmaMethod,
)

logger = logging.getLogger(__name__)

MAX_DENSE = 4096  # n·s の上限


@dataclass(frozen=True)
class DenseW:
    """W = 11^T ⊗ R + I_n ⊗ Σ ((ns)×(ns))"""
    w: np.ndarray
    n: int
    s: int


def _guard(n: int, s: int):
    if n * s > MAX_DENSE:
        raise ConfigError("ORACLE_TOO_LARGE", f"n*s={n * s} exceeds the dense limit {MAX_DENSE}")


def dense_w(sigma, r, n: int) -> DenseW:
    """W を np.kron で組み立てる"""
    sigma = sigma.sigma if isinstance(sigma, CovEstimate) else np.asarray(sigma, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    s = sigma.shape[0]
    _guard(n, s)
    w = np.kron(np.ones((n, n)), r) + np.kron(np.eye(n), sigma)
    return DenseW(w=w, n=n, s=s)


def dense_w_loops(sigma, r, n: int) -> DenseW:
    """W を添字ループで組み立てる (dense_w の検算用)"""
    sigma = sigma.sigma if isinstance(sigma, CovEstimate) else np.asarray(sigma, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    s = sigma.shape[0]
    _guard(n, s)
    w = np.zeros((n * s, n * s))
    for bi in range(n):
        for bj in range(n):
            for a in range(s):
                for b in range(s):
                    value = r[a, b]
                    if bi == bj:
                        value += sigma[a, b]
                    w[bi * s + a, bj * s + b] = value
    return DenseW(w=w, n=n, s=s)


def vec(g: np.ndarray) -> np.ndarray:
    """列を縦に積む vec(G)"""
    return np.asarray(g, dtype=np.float64).ravel(order="F")


def dense_gauss_logpdf(v, mean, cov) -> float:
    """log N(v; mean, cov) を密な Cholesky で評価する

    Raises:
        CovarianceSingularError: cov が正定値でない
    """
    v = np.atleast_1d(np.asarray(v, dtype=np.float64))
    mean = np.atleast_1d(np.asarray(mean, dtype=np.float64))
    cov = np.atleast_2d(np.asarray(cov, dtype=np.float64))
    if cov.shape != (v.size, v.size) or mean.shape != v.shape:
        raise InputError("SHAPE_MISMATCH", f"v{v.shape}, mean{mean.shape}, cov{cov.shape}")
    try:
        c = cholesky(cov, lower=True)
    except LinAlgError as e:
        raise CovarianceSingularError("DENSE_SINGULAR", str(e)) from e
    alpha = solve_triangular(c, v - mean, lower=True)
    logdet = 2.0 * float(np.sum(np.log(np.diag(c))))
    return -0.5 * v.size * LOG_2PI - 0.5 * logdet - 0.5 * float(alpha @ alpha)


def dense_jacobian(x_i, y_i, z: EvalPoints, p: KernelParam) -> np.ndarray:
    """J_θ(x_i, y_i) (s×2D) を要素ごとに組み立てる"""
    x_i = np.atleast_1d(np.asarray(x_i, dtype=np.float64))
    y_i = np.atleast_1d(np.asarray(y_i, dtype=np.float64))
    d = x_i.size
    jac = np.zeros((z.s, 2 * d))
    for j in range(z.s):
        zj = z.z[j]
        kx = gaussian_kernel(x_i, zj, p)
        ky = gaussian_kernel(y_i, zj, p)
        for m in range(d):
            jac[j, m] = -kx * (x_i[m] - zj[m]) / p.theta
            jac[j, d + m] = ky * (y_i[m] - zj[m]) / p.theta
    return jac


def finite_difference_jacobian(x_i, y_i, z: EvalPoints, p: KernelParam, h: float = 1e-6) -> np.ndarray:
    """g_θ(x, y) の中心差分ヤコビアン"""
    x_i = np.atleast_1d(np.asarray(x_i, dtype=np.float64))
    y_i = np.atleast_1d(np.asarray(y_i, dtype=np.float64))
    d = x_i.size
    point = np.concatenate([x_i, y_i])

    def g(v):
        return np.array([
            gaussian_kernel(v[:d], zj, p) - gaussian_kernel(v[d:], zj, p) for zj in z.z
        ])

    jac = np.zeros((z.s, 2 * d))
    for m in range(2 * d):
        step = np.zeros(2 * d)
        step[m] = h
        jac[:, m] = (g(point + step) - g(point - step)) / (2.0 * h)
    return jac


def dense_log_vol(data: PairedDataset, z: EvalPoints, p: KernelParam) -> float:
    """Σ_i ½ log det(J_i^T J_i) を密なヤコビアンから計算する"""
    total = 0.0
    for i in range(data.n):
        jac = dense_jacobian(data.x[i], data.y[i], z, p)
        sign, logdet = np.linalg.slogdet(jac.T @ jac)
        if sign <= 0:
            raise CovarianceSingularError("DENSE_SINGULAR", f"J^T J singular at pair {i}")
        total += 0.5 * logdet
    return total


def naive_loglik_null(data, z, p, sigma: CovEstimate, *, with_jacobian: bool = True) -> LogLik:
    """N(vec(G); 0, I_n ⊗ Σ) · Π vol(J_i) を密行列で評価する"""
    state = witness_state(data, z, p)
    _guard(state.n, state.s)
    cov = np.kron(np.eye(state.n), sigma.sigma)
    v = vec(state.g)
    value = dense_gauss_logpdf(v, np.zeros_like(v), cov)
    if with_jacobian:
        value += dense_log_vol(data, z, p)
    return LogLik(value=value, model=Hypothesis.H0, path="naive")


def naive_loglik_alt(data, z, p, sigma: CovEstimate, r=None, *, with_jacobian: bool = True) -> LogLik:
    """N(vec(G); 0, 11^T ⊗ R + I_n ⊗ Σ) · Π vol(J_i) を密行列で評価する"""
    state = witness_state(data, z, p)
    if r is None:
        r = r_matrix(z, p)
    w = dense_w(sigma, r, state.n).w
    v = vec(state.g)
    value = dense_gauss_logpdf(v, np.zeros_like(v), w)
    if with_jacobian:
        value += dense_log_vol(data, z, p)
    return LogLik(value=value, model=Hypothesis.H1, path="naive")


def quad_r_kernel(a: float, b: float, p: KernelParam) -> float:
    """D=1 で ∫ k_θ(a, u) k_θ(u, b) du を適応求積で求める"""
    def integrand(u):
        return gaussian_kernel([a], [u], p) * gaussian_kernel([u], [b], p)

    center = 0.5 * (a + b)
    width = 20.0 * math.sqrt(p.theta) + abs(a - b)
    value, _ = integrate.quad(integrand, center - width, center + width,
                              epsabs=0.0, epsrel=1e-10, limit=200, points=[a, b])
    return value


# ── 検査スイート ──

@dataclass
class CheckResult:
    """1 項目の検査結果"""
    name: str
    passed: bool
    instances: int
    max_error: float
    tolerance: float
    notes: str = ""


@dataclass
class OracleReport:
    results: list[CheckResult] = field(default_factory=list)
    notes: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / (1.0 + abs(b))


def _random_spd(rng: np.random.Generator, s: int) -> np.ndarray:
    a = rng.standard_normal((s, s))
    return a @ a.T + s * 0.1 * np.eye(s)


def _random_instance(rng: np.random.Generator, n_max: int = 10, s_max: int = 6, d_max: int = 3):
    """n ≥ s + 2 にして G H G^T が退化しないようにする。評価点はデータ行から取る。"""
    d = int(rng.integers(1, d_max + 1))
    s = 2 * int(rng.integers(d, max(d, s_max // 2) + 1))
    n = int(rng.integers(s + 2, max(s + 2, n_max) + 1))
    data = PairedDataset(x=rng.standard_normal((n, d)), y=rng.standard_normal((n, d)) + 0.5)
    z = subsample_eval_points(data, s, int(rng.integers(2**31)))
    p = KernelParam(float(rng.uniform(0.05, 20.0)))
    return data, z, p


def _check_likelihood(rng, instances, perturbation, efficient_null, efficient_alt) -> list[CheckResult]:
    worst_null = worst_alt = 0.0
    for k in range(instances):
        data, z, p = _random_instance(rng)
        method = SigmaMethod.METHOD1 if k % 2 else SigmaMethod.METHOD2
        sigma = estimate_sigma(witness_state(data, z, p), data.n, method)
        r = r_matrix(z, p)
        eff0 = efficient_null(data, z, p, sigma, with_jacobian=False).value * (1.0 + perturbation)
        eff1 = efficient_alt(data, z, p, sigma, r, path="efficient", with_jacobian=False).value * (1.0 + perturbation)
        dense0 = naive_loglik_null(data, z, p, sigma, with_jacobian=False).value
        dense1 = naive_loglik_alt(data, z, p, sigma, r, with_jacobian=False).value
        worst_null = max(worst_null, _rel(eff0, dense0))
        worst_alt = max(worst_alt, _rel(eff1, dense1))
    return [
        CheckResult("loglik_null vs dense", worst_null < 1e-8, instances, worst_null, 1e-8),
        CheckResult("loglik_alt vs dense", worst_alt < 1e-8, instances, worst_alt, 1e-8),
    ]


def _check_kronecker(rng, instances) -> list[CheckResult]:
    worst_det = worst_quad = 0.0
    for _ in range(instances):
        s = int(rng.integers(1, 7))
        n = int(rng.integers(1, 9))
        sigma = _random_spd(rng, s)
        r = _random_spd(rng, s)
        g = rng.standard_normal((s, n))
        w = dense_w(sigma, r, n).w
        _, dense_ld = np.linalg.slogdet(w)
        v = vec(g)
        dense_q = float(v @ np.linalg.solve(w, v))
        worst_det = max(worst_det, abs(kron_logdet(sigma, r, n) - dense_ld) / (1.0 + abs(dense_ld)))
        worst_quad = max(worst_quad, abs(kron_quadform(g, sigma, r, n) - dense_q) / (1.0 + abs(dense_q)))

    # det(W) = 9 for Σ = R = I_2, n = 2
    hand = abs(kron_logdet(np.eye(2), np.eye(2), 2) - math.log(9.0))
    return [
        CheckResult("kron_logdet vs dense", worst_det < 1e-9 and hand < 1e-12, instances, worst_det, 1e-9),
        CheckResult("kron_quadform vs dense", worst_quad < 1e-9, instances, worst_quad, 1e-9),
    ]


def _check_remark(rng, instances) -> CheckResult:
    worst = 0.0
    for _ in range(instances):
        s = int(rng.integers(1, 7))
        n = int(rng.integers(s + 3, s + 20))
        g = rng.standard_normal((s, n))
        gc = g - g.mean(axis=1, keepdims=True)
        sigma = psd_repair(gc @ gc.T / n)
        r = _random_spd(rng, s)
        general = kron_quadform(g, sigma, r, n)
        worst = max(worst, abs(remark_quadform(g, r, n) - general) / abs(general))
    return CheckResult("remark_quadform vs kron_quadform", worst < 1e-6, instances, worst, 1e-6)


def _check_jacobian(rng, instances) -> CheckResult:
    worst = 0.0
    for _ in range(instances):
        d = int(rng.integers(1, 4))
        s = int(rng.integers(1, 9))
        z = EvalPoints(z=rng.standard_normal((s, d)))
        p = KernelParam(float(rng.uniform(0.5, 5.0)))
        x_i, y_i = rng.standard_normal(d), rng.standard_normal(d)
        exact = dense_jacobian(x_i, y_i, z, p)
        fd = finite_difference_jacobian(x_i, y_i, z, p)
        scale = max(1e-3, float(np.max(np.abs(exact))))
        worst = max(worst, float(np.max(np.abs(exact - fd))) / scale)

        blocks = jacobian_gram(x_i, y_i, z, p)
        assembled = blocks.assemble()
        if not np.allclose(assembled, exact.T @ exact, rtol=0.0, atol=1e-10):
            worst = max(worst, 1.0)
    return CheckResult("jacobian vs finite differences", worst < 1e-5, instances, worst, 1e-5)


def _check_log_vol(rng, instances) -> CheckResult:
    """バッチ計算の Σ log vol(J_i) と密なヤコビアンの slogdet"""
    worst = 0.0
    for _ in range(instances):
        d = int(rng.integers(1, 4))
        s = int(rng.integers(2 * d + 2, 2 * d + 6))
        n = int(rng.integers(1, 6))
        data = PairedDataset(x=rng.standard_normal((n, d)), y=rng.standard_normal((n, d)) + 0.5)
        z = EvalPoints(z=rng.standard_normal((s, d)))
        p = KernelParam(float(rng.uniform(1.0, 5.0)))
        worst = max(worst, _rel(total_log_vol(data, z, p), dense_log_vol(data, z, p)))
    return CheckResult("log_vol vs dense", worst < 1e-8, instances, worst, 1e-8)


def _check_r_kernel(rng, instances) -> CheckResult:
    """D=1 の r_θ を求積と比べる"""
    worst = 0.0
    for _ in range(instances):
        a, b = rng.normal(0.0, 2.0, size=2)
        p = KernelParam(float(rng.uniform(0.05, 20.0)))
        worst = max(worst, _rel(r_kernel([a], [b], p), quad_r_kernel(float(a), float(b), p)))
    return CheckResult("r_kernel vs quadrature", worst < 1e-8, instances, worst, 1e-8)


def _h1_conventions(seed: int) -> dict[str, float]:
    """帰無データ上で 2 通りのラベル更新規則の P(H1 | θ) を並べる"""
    rng = np.random.default_rng(seed)
    data = PairedDataset(x=rng.standard_normal((200, 1)), y=rng.standard_normal((200, 1)))
    z = subsample_eval_points(data, 40, seed)
    bf = pseudo_bayes_factor(data, z, median_heuristic(data))
    adopted = 1.0 - bf.p_h0           # H0 を確率 BF/(1+BF) で選ぶ
    literal = bf.p_h0                 # H0 を確率 1/(1+BF) で選ぶ
    return {"log_bf": bf.log_bf, "p_h1_adopted": adopted, "p_h1_literal": literal}


def run_oracle_suite(
    instances: int = 1000,
    seed: int = 0,
    perturbation: float = 0.0,
    efficient_null: Callable[..., LogLik] = loglik_null,
    efficient_alt: Callable[..., LogLik] = loglik_alt,
    jacobian_instances: Optional[int] = None,
) -> OracleReport:
    """効率版と密な参照実装の一致をまとめて検査する

    Args:
        instances: 尤度・Kronecker 恒等式の乱数インスタンス数
        perturbation: 効率版の値に掛ける相対誤差 (変異検査用)
    """
    rng = np.random.default_rng(seed)
    report = OracleReport()
    report.results.extend(_check_likelihood(rng, instances, perturbation, efficient_null, efficient_alt))
    report.results.extend(_check_kronecker(rng, instances))
    report.results.append(_check_remark(rng, max(1, instances // 5)))
    report.results.append(_check_jacobian(rng, jacobian_instances or max(1, instances // 10)))
    report.results.append(_check_log_vol(rng, max(1, instances // 10)))
    report.results.append(_check_r_kernel(rng, max(1, instances // 50)))
    report.notes.update(_h1_conventions(seed))
    for result in report.results:
        logger.info("%s: passed=%s max_error=%.3e", result.name, result.passed, result.max_error)
    return report
