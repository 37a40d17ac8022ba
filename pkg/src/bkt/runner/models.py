"""実行設定と結果サマリーのデータモデル"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import ConfigError, InputError
from ..inference.models import ChainConfig

FORMAT_VERSION = 1


def derive_seed(*keys: int) -> int:
    """(seed, ...) から独立な 32bit シードを導く"""
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1, dtype=np.uint32)[0])


@dataclass(frozen=True)
class RunConfig:
    """test / bf 1 回分の設定"""
    verb: str
    input: Optional[Path] = None
    out: Path = Path("bkt_out")
    s: int = 40
    seed: int = 0
    chain: ChainConfig = field(default_factory=ChainConfig)
    theta: Optional[float] = None
    theta_grid: Optional[str] = None   # "lo:hi:count"
    format_version: int = FORMAT_VERSION

    def __post_init__(self):
        if self.s < 2 or self.s % 2:
            raise ConfigError("BAD_S", f"s must be a positive even number, got {self.s}")
        if self.theta is not None and self.theta_grid is not None:
            raise ConfigError("BAD_THETA_OPTIONS", "--theta and --theta-grid are mutually exclusive")
        if self.input is not None:
            object.__setattr__(self, "input", Path(self.input))
        object.__setattr__(self, "out", Path(self.out))

    def check_paths(self):
        """入力ファイルの存在を実行前に確かめる"""
        if self.input is None:
            raise ConfigError("NO_INPUT", "--input is required")
        if not self.input.is_file():
            raise InputError("NO_INPUT", f"input file not found: {self.input}")

    def to_dict(self) -> dict:
        return {
            "verb": self.verb,
            "input": str(self.input) if self.input is not None else None,
            "out": str(self.out),
            "s": self.s,
            "seed": self.seed,
            "chain": self.chain.to_dict(),
            "theta": self.theta,
            "theta_grid": self.theta_grid,
            "format_version": self.format_version,
        }


@dataclass(frozen=True)
class ExperimentConfig:
    """シナリオ × n × 反復 の実験グリッド"""
    scenarios: tuple[str, ...]
    ns: tuple[int, ...]
    replicates: int = 100
    seed: int = 0
    s: int = 40
    chain: ChainConfig = field(default_factory=ChainConfig)
    out: Path = Path("bkt_out")
    threads: int = 1
    format_version: int = FORMAT_VERSION

    def __post_init__(self):
        if not self.scenarios:
            raise ConfigError("NO_SCENARIO", "at least one --scenario is required")
        if not self.ns or any(n < 1 for n in self.ns):
            raise ConfigError("BAD_N", f"sample sizes must be positive, got {self.ns}")
        if self.replicates < 1:
            raise ConfigError("BAD_REPLICATES", f"replicates must be >= 1, got {self.replicates}")
        if self.s < 2 or self.s % 2:
            raise ConfigError("BAD_S", f"s must be a positive even number, got {self.s}")
        if self.threads < 1:
            raise ConfigError("BAD_THREADS", f"threads must be >= 1, got {self.threads}")
        object.__setattr__(self, "scenarios", tuple(self.scenarios))
        object.__setattr__(self, "ns", tuple(int(n) for n in self.ns))
        object.__setattr__(self, "out", Path(self.out))

    def to_dict(self) -> dict:
        # threads は結果に影響しないので含めない
        return {
            "verb": "experiment",
            "scenarios": list(self.scenarios),
            "ns": list(self.ns),
            "replicates": self.replicates,
            "seed": self.seed,
            "s": self.s,
            "chain": self.chain.to_dict(),
            "out": str(self.out),
            "format_version": self.format_version,
        }


@dataclass
class ResultSummary:
    """summary.json の内容。経過時間は timing.json に分けて書く。"""
    config: dict
    p_h1: float
    theta_quantiles: dict = field(default_factory=dict)
    theta_quantiles_by_model: dict = field(default_factory=dict)
    acceptance_rate: Optional[float] = None
    ridge: dict = field(default_factory=dict)
    theta: Optional[float] = None
    log_bf: Optional[float] = None
    log10_bf: Optional[float] = None
    extras: dict = field(default_factory=dict)
    wall_clock: float = 0.0
    format_version: int = FORMAT_VERSION

    def __post_init__(self):
        if not 0.0 <= self.p_h1 <= 1.0:
            raise ValueError(f"p_h1 must be in [0, 1], got {self.p_h1}")

    def to_dict(self) -> dict:
        body = {
            "format_version": self.format_version,
            "config": self.config,
            "p_h1": self.p_h1,
        }
        optional = {
            "theta_quantiles": self.theta_quantiles,
            "theta_quantiles_by_model": self.theta_quantiles_by_model,
            "acceptance_rate": self.acceptance_rate,
            "ridge": self.ridge,
            "theta": self.theta,
            "log_bf": self.log_bf,
            "log10_bf": self.log10_bf,
        }
        body.update({k: v for k, v in optional.items() if v not in (None, {})})
        body.update(self.extras)
        return body


def timing_record(config: dict, seconds: float) -> dict:
    """timing.json の内容"""
    return {
        "format_version": FORMAT_VERSION,
        "config": config,
        "wall_clock_seconds": round(seconds, 6),
    }
