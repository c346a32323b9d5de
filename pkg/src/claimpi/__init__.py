"""Finite-sample valid prediction intervals for nonnegative claims with predictors."""

from .conformal import plausibility, validity_threshold
from .distributions import GammaParams, ParetoIIParams, BernoulliParams, SeededRng, gamma_quantile
from .interval import PredictionInterval
from .intervals import (
    RegressionSample,
    constrained_interval,
    general_interval,
    point_predict,
    residualize,
    unsupervised_claim_interval,
)
from .order_statistics import empirical_quantile, two_sided_ranks, upper_rank
from .transform import parse, evaluate

__version__ = "0.1.0"
