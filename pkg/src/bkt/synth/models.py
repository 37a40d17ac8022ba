"""合成データのシナリオ定義とプリセット"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import ConfigError

FAMILIES = ("gauss1d", "laplace1d", "copula_corr", "mixture1d", "gauss2d_rot", "blobs2x2", "padded")

BLOB_CENTERS = ((10.0, 10.0), (10.0, 30.0), (30.0, 10.0), (30.0, 30.0))
BLOB_SHIFT = (-1.0, -1.0)


@dataclass(frozen=True)
class ScenarioSpec:
    """生成するデータの族・パラメータ・サイズ・シード"""
    family: str
    params: dict = field(default_factory=dict)
    n: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError("BAD_FAMILY", f"family must be one of {FAMILIES}, got {self.family!r}")
        if int(self.n) < 1:
            raise ConfigError("BAD_N", f"n must be >= 1, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        _VALIDATORS[self.family](self.params, self.n)

    def with_size(self, n: int, seed: int) -> "ScenarioSpec":
        return replace(self, n=n, seed=seed)


@dataclass(frozen=True)
class Moments:
    """列ごとの平均と分散 (ddof=0)"""
    mean_x: np.ndarray
    var_x: np.ndarray
    mean_y: np.ndarray
    var_y: np.ndarray


def _require(ok: bool, message: str):
    if not ok:
        raise ConfigError("BAD_SCENARIO", message)


def _positive(params: dict, *keys: str):
    for key in keys:
        if key in params:
            value = float(params[key])
            _require(value > 0 and math.isfinite(value), f"{key} must be positive, got {params[key]}")


def _check_gauss1d(params: dict, n: int):
    _positive(params, "var_x", "var_y")
    _require(int(params.get("dim", 1)) >= 1, "dim must be >= 1")


def _check_laplace1d(params: dict, n: int):
    _positive(params, "var_x", "scale_y")


def _check_copula(params: dict, n: int):
    _check_laplace1d(params, n)
    rho = float(params.get("rho", 0.5))
    _require(-1.0 < rho < 1.0, f"rho must be in (-1, 1), got {rho}")


def _check_components(components, name: str):
    _require(len(components) >= 1, f"{name} needs at least one component")
    weights = [float(w) for w, _, _ in components]
    _require(all(w > 0 for w in weights), f"{name} weights must be positive")
    _require(abs(sum(weights) - 1.0) < 1e-9, f"{name} weights must sum to 1")
    _require(all(float(v) > 0 for _, _, v in components), f"{name} variances must be positive")


def _check_mixture(params: dict, n: int):
    _check_components(params.get("x", ()), "x")
    _check_components(params.get("y", ()), "y")


def _check_gauss2d(params: dict, n: int):
    _require(float(params.get("eps", 1.0)) >= 1.0, "eps must be >= 1")


def _check_blobs(params: dict, n: int):
    _require(float(params.get("eps_x", 1.0)) >= 1.0, "eps_x must be >= 1")
    _require(float(params.get("eps_y", 1.0)) >= 1.0, "eps_y must be >= 1")
    blobs = len(params.get("centers", BLOB_CENTERS))
    _require(n % blobs == 0, f"n={n} must be divisible by the number of blobs ({blobs})")


def _check_padded(params: dict, n: int):
    _check_blobs(params, n)
    _require(int(params.get("pad", 0)) >= 0, "pad dims must be >= 0")


_VALIDATORS = {
    "gauss1d": _check_gauss1d,
    "laplace1d": _check_laplace1d,
    "copula_corr": _check_copula,
    "mixture1d": _check_mixture,
    "gauss2d_rot": _check_gauss2d,
    "blobs2x2": _check_blobs,
    "padded": _check_padded,
}


# ── プリセット ──
# 名前 → (family, params)。x 側は特に断りがなければ N(0, 1)。

def _gauss(mean_y=0.0, var_y=1.0, dim=1):
    return ("gauss1d", {"mean_x": 0.0, "var_x": 1.0, "mean_y": mean_y, "var_y": var_y, "dim": dim})


def _mix(*y):
    return ("mixture1d", {"x": [(0.5, 0.0, 1.0), (0.5, 4.0, 1.0)], "y": list(y)})


def _rot(mean_y=(10.0, 10.0), eps=1.0):
    return ("gauss2d_rot", {"mean_x": (10.0, 10.0), "mean_y": mean_y, "eps": eps, "angle": math.pi / 2})


def _blobs(eps_y, shift=BLOB_SHIFT):
    return ("blobs2x2", {"centers": BLOB_CENTERS, "shift": shift, "eps_x": 1.0, "eps_y": eps_y, "angle": math.pi / 2})


def _padded(total_dim):
    params = _blobs(6.0)[1]
    return ("padded", {**params, "pad": total_dim - 2})


PRESETS: dict[str, tuple[str, dict]] = {
    "gauss_null": _gauss(),
    "gauss_mean1": _gauss(mean_y=1.0),
    "gauss_mean1.5": _gauss(mean_y=1.5),
    "gauss_mean2": _gauss(mean_y=2.0),
    "gauss_mean3": _gauss(mean_y=3.0),
    "gauss_var4": _gauss(var_y=4.0),
    "gauss_var9": _gauss(var_y=9.0),
    "laplace_sqrt_half": ("laplace1d", {"scale_y": math.sqrt(0.5)}),
    "laplace_1.5": ("laplace1d", {"scale_y": 1.5}),
    "laplace_0.4": ("laplace1d", {"scale_y": 0.4}),
    "copula_laplace_sqrt_half": ("copula_corr", {"scale_y": math.sqrt(0.5), "rho": 0.5}),
    "copula_laplace_1.5": ("copula_corr", {"scale_y": 1.5, "rho": 0.5}),
    "copula_laplace_0.4": ("copula_corr", {"scale_y": 0.4, "rho": 0.5}),
    "mix_null": _mix((0.5, 0.0, 1.0), (0.5, 4.0, 1.0)),
    "mix_0_4_var4": _mix((0.5, 0.0, 4.0), (0.5, 4.0, 4.0)),
    "mix_0_8": _mix((0.5, 0.0, 1.0), (0.5, 8.0, 1.0)),
    "mix_0_8_var4": _mix((0.5, 0.0, 4.0), (0.5, 8.0, 4.0)),
    "mix_2_6": _mix((0.5, 2.0, 1.0), (0.5, 6.0, 1.0)),
    "mix_2_8_var4": _mix((0.5, 2.0, 4.0), (0.5, 8.0, 4.0)),
    "mix_m4_8": _mix((0.5, -4.0, 1.0), (0.5, 8.0, 1.0)),
    "mix_m4_8_var4": _mix((0.5, -4.0, 4.0), (0.5, 8.0, 4.0)),
    "gauss2d_null": _rot(),
    "gauss2d_mean11.5": _rot(mean_y=(11.5, 11.5)),
    "gauss2d_mean12_10": _rot(mean_y=(12.0, 10.0)),
    **{f"gauss2d_eps{e}": _rot(eps=float(e)) for e in (2, 6, 10, 20)},
    "blobs_null": _blobs(1.0, shift=(0.0, 0.0)),
    **{f"blobs_eps{e}": _blobs(float(e)) for e in (1, 2, 6, 10, 20)},
    **{f"padded_d{d}": _padded(d) for d in range(3, 9)},
    **{f"mvn_null_d{d}": _gauss(dim=d) for d in (1, 3, 5)},
}


def preset(name: str, n: int = 200, seed: int = 0) -> ScenarioSpec:
    """プリセット名からシナリオを作る"""
    if name not in PRESETS:
        raise ConfigError("UNKNOWN_SCENARIO", f"unknown scenario {name!r}")
    family, params = PRESETS[name]
    return ScenarioSpec(family=family, params=dict(params), n=n, seed=seed)
