"""CLI の各動詞の実行と成果物の入出力"""

from .check import run_check
from .csvio import read_paired_csv, write_json, write_paired_csv, write_rows_csv, write_samples_csv
from .experiment import run_experiment
from .models import ExperimentConfig, ResultSummary, RunConfig, derive_seed
from .runs import run_bf, run_test

__all__ = [
    "ExperimentConfig",
    "ResultSummary",
    "RunConfig",
    "derive_seed",
    "read_paired_csv",
    "run_bf",
    "run_check",
    "run_experiment",
    "run_test",
    "write_json",
    "write_paired_csv",
    "write_rows_csv",
    "write_samples_csv",
]
