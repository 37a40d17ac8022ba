"""θ の事後推論と Bayes 因子"""

from .bayes import (
    bayes_factor_fixed_theta,
    compute_bayes_factor,
    conditional_h1_curve,
    grid_search_theta,
    posterior_h1,
    pseudo_bayes_factor,
    theta_grid,
)
from .gibbs import draw_hypothesis, gibbs_run
from .hmc import DualAveraging, HMCKernel, find_reasonable_step, hmc_update, leapfrog, sample_chain
from .models import BayesFactor, ChainConfig, ChainOutput, Hypothesis
from .target import ThetaPosterior, log_target_theta
from .workspace import ThetaWorkspace

__all__ = [
    "BayesFactor",
    "ChainConfig",
    "ChainOutput",
    "DualAveraging",
    "HMCKernel",
    "Hypothesis",
    "ThetaPosterior",
    "ThetaWorkspace",
    "bayes_factor_fixed_theta",
    "compute_bayes_factor",
    "conditional_h1_curve",
    "draw_hypothesis",
    "find_reasonable_step",
    "gibbs_run",
    "grid_search_theta",
    "hmc_update",
    "leapfrog",
    "log_target_theta",
    "posterior_h1",
    "pseudo_bayes_factor",
    "sample_chain",
    "theta_grid",
]
