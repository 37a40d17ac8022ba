"""bkt - Bayesian kernel two-sample testing toolkit"""

__version__ = "0.1.0"

from bkt.errors import BKTError
from bkt.inference import ChainConfig, compute_bayes_factor, gibbs_run, posterior_h1
from bkt.kernel import median_heuristic, subsample_eval_points, witness_state
from bkt.models import EvalPoints, Hypothesis, KernelParam, PairedDataset, SigmaMethod

__all__ = [
    "BKTError",
    "ChainConfig",
    "EvalPoints",
    "Hypothesis",
    "KernelParam",
    "PairedDataset",
    "SigmaMethod",
    "compute_bayes_factor",
    "gibbs_run",
    "median_heuristic",
    "posterior_h1",
    "subsample_eval_points",
    "witness_state",
]
