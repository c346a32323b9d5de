"""Regression-setting prediction intervals built from residuals ``W = Y - h(X)``.

Because ``W_i = Y_i - h(X_i)`` is iid whenever the pairs are, any valid interval
``(L, U)`` for the next residual becomes an interval ``(L + h(x), U + h(x))``
for the next response. For nonnegative responses the one-sided order statistic
``W_(r)`` gives the bound, with a fallback on ``min(Y_(r), h(x))`` when
``W_(r) + h(x)`` is not positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ArityError, DataError
from .interval import PredictionInterval
from .order_statistics import as_sample, order_statistic, two_sided_interval, upper_rank
from .transform import TransformExpr, evaluate, evaluate_rows, require_nonnegative

__all__ = [
    "RegressionSample",
    "residualize",
    "general_interval",
    "constrained_interval",
    "unsupervised_claim_interval",
    "mean_residual",
    "point_predict",
]


@dataclass(frozen=True)
class RegressionSample:
    """Paired features (``n x p``) and responses (``n``)."""

    features: np.ndarray
    responses: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.responses, dtype=float).ravel()
        x = np.asarray(self.features, dtype=float)
        if x.size == 0:
            x = np.empty((y.size, 0))
        elif x.ndim == 1 and x.size == y.size:
            x = x.reshape(-1, 1)
        if x.ndim != 2 or x.shape[0] != y.size:
            raise DataError(f"features have {x.shape[0] if x.ndim else 0} rows but there are {y.size} responses")
        if y.size == 0:
            raise DataError("sample must contain at least one observation")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(x))):
            raise DataError("features and responses must be finite")
        object.__setattr__(self, "responses", y)
        object.__setattr__(self, "features", x)

    @property
    def n(self) -> int:
        return self.responses.size

    @property
    def p(self) -> int:
        return self.features.shape[1]

    def require_nonnegative_responses(self):
        if self.responses.min() < 0:
            row = int(np.flatnonzero(self.responses < 0)[0])
            raise DataError(f"response at row {row} is negative ({self.responses[row]:.6g})")


def _check_arity(sample, h):
    if h.width != sample.p:
        raise ArityError(f"transformation takes {h.width} variable(s) but the data has {sample.p} predictor(s)")


def _x_vector(x_new, p):
    x = np.asarray(x_new, dtype=float).ravel()
    if x.size != p:
        raise ArityError(f"x_new has {x.size} value(s), expected {p}")
    return x


def residualize(sample: RegressionSample, h: TransformExpr) -> np.ndarray:
    """``Y_i - h(X_i)`` for every row."""
    _check_arity(sample, h)
    return sample.responses - evaluate_rows(h, sample.features)


def general_interval(sample: RegressionSample, h: TransformExpr, x_new, alpha) -> PredictionInterval:
    """Open two-sided interval ``(W_(l) + h(x), W_(r) + h(x))``; responses may be any sign."""
    _check_arity(sample, h)
    w_interval = two_sided_interval(residualize(sample, h), alpha)
    hx = evaluate(h, _x_vector(x_new, sample.p))
    return PredictionInterval(w_interval.lower + hx, w_interval.upper + hx, True, True, float(alpha))


def _bound_without_response_floor(w_r, hx):
    """Intermediate form: falls back to ``h(x)`` itself, so it degenerates wherever h vanishes."""
    return w_r + hx if w_r + hx > 0 else hx


def constrained_interval(sample: RegressionSample, h: TransformExpr, x_new, alpha) -> PredictionInterval:
    """``[0, u]`` for a nonnegative response.

    With ``r = upper_rank(n, alpha)``::

        u = W_(r) + h(x)           if W_(r) + h(x) > 0      (branch "positive")
        u = min(Y_(r), h(x))       otherwise                (branch "fallback")

    The upper end is closed: coverage rests on the event ``W_{n+1} <= W_(r)``,
    which is what keeps the guarantee when responses have atoms. The bound is
    never tightened to ``min(Y_(r), W_(r) + h(x))`` in the positive branch; that
    would break validity.

    Raises
    ------
    DataError
        Negative response.
    NonnegativityError
        ``h`` is negative on a training row or on ``x_new``.
    """
    _check_arity(sample, h)
    sample.require_nonnegative_responses()
    x = _x_vector(x_new, sample.p)
    h_train = require_nonnegative(h, sample.features)
    hx = float(require_nonnegative(h, x.reshape(1, -1))[0])

    r = upper_rank(sample.n, alpha)
    w_r = order_statistic(sample.responses - h_train, r)
    if w_r + hx > 0:
        return PredictionInterval(0.0, w_r + hx, False, False, float(alpha), "positive")
    y_r = order_statistic(sample.responses, r)
    return PredictionInterval(0.0, min(y_r, hx), False, False, float(alpha), "fallback")


def unsupervised_claim_interval(responses, alpha) -> PredictionInterval:
    """``[0, Y_(r)]`` from the responses alone."""
    y = as_sample(responses)
    if y.min() < 0:
        raise DataError("responses must be nonnegative")
    r = upper_rank(y.size, alpha)
    return PredictionInterval(0.0, order_statistic(y, r), False, False, float(alpha))


def mean_residual(residuals) -> float:
    return math.fsum(residuals) / len(residuals)


def point_predict(
    sample: RegressionSample,
    h: TransformExpr,
    x_new,
    w_hat: float | Callable[[np.ndarray], float] | None = None,
) -> float:
    """``h(x_new) + w_hat``.

    ``w_hat`` may be a number, a callable applied to the residuals, or ``None``
    for the residual sample mean.
    """
    _check_arity(sample, h)
    hx = evaluate(h, _x_vector(x_new, sample.p))
    if w_hat is None:
        w_hat = mean_residual
    if callable(w_hat):
        w_hat = w_hat(residualize(sample, h))
    return hx + float(w_hat)
