"""Estimators certifying alpha-stable behaviour of the front position."""

from .moments import ensemble_from_segments, moment_scaling_test
from .poisson import poisson_interarrival_test
from .pvariation import levy_half_cdf, p_variation, pvariation_ks_test
from .stable import sample_alpha_stable, stable_motion
from .tails import mle_tail_fit, sign_ratio_beta
from .types import PVariationResult, StableEstimate

__all__ = [
    "PVariationResult",
    "StableEstimate",
    "ensemble_from_segments",
    "levy_half_cdf",
    "mle_tail_fit",
    "moment_scaling_test",
    "p_variation",
    "poisson_interarrival_test",
    "pvariation_ks_test",
    "sample_alpha_stable",
    "sign_ratio_beta",
    "stable_motion",
]
