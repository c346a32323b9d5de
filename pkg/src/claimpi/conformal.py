"""Conformal plausibility of a candidate response and its validity threshold.

Only the pointwise plausibility is exposed. Sweeping it over a grid of
candidate responses does not yield a region with a validity guarantee, so no
such helper is provided; use :mod:`claimpi.intervals` for exact intervals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Protocol

import numpy as np

from .errors import ParameterError
from .order_statistics import as_fraction

__all__ = [
    "NonConformityMeasure",
    "PlausibilityResult",
    "plausibility",
    "validity_threshold",
    "builtin_measure_abs_deviation",
    "AbsDeviationFromMean",
]


class NonConformityMeasure(Protocol):
    """Scores how badly ``(x, y)`` fits a bag of labelled pairs.

    Must be deterministic and depend on the bag only as a multiset.
    """

    def __call__(self, bag_features: np.ndarray, bag_responses: np.ndarray, x: np.ndarray, y: float) -> float: ...


class AbsDeviationFromMean:
    """``|y - mean(bag responses)|``; the mean is computed with ``math.fsum`` so it is order-free."""

    def __call__(self, bag_features, bag_responses, x, y):
        if len(bag_responses) == 0:
            raise ParameterError("non-conformity measure needs a nonempty bag")
        return abs(y - math.fsum(bag_responses) / len(bag_responses))

    def __repr__(self):
        return "AbsDeviationFromMean()"


def builtin_measure_abs_deviation() -> NonConformityMeasure:
    return AbsDeviationFromMean()


@dataclass(frozen=True)
class PlausibilityResult:
    plausibility: float
    threshold: float
    n: int
    alpha: float | None
    scores: tuple = ()

    @property
    def rejected(self) -> bool:
        """True when plausibility is at or below the threshold."""
        return self.plausibility <= self.threshold


def validity_threshold(n: int, alpha) -> float:
    """``floor((n+1) alpha) / (n+1)``."""
    if int(n) != n or n < 1:
        raise ParameterError(f"n must be a positive integer, got {n!r}")
    if not 0 < float(alpha) < 1:
        raise ParameterError(f"alpha must lie strictly inside (0, 1), got {alpha!r}")
    return float(Fraction(math.floor((n + 1) * as_fraction(alpha)), n + 1))


def plausibility(features, responses, x_new, y_candidate, measure: NonConformityMeasure | None = None, alpha=0.1):
    """Leave-one-out rank of the candidate's non-conformity score in the augmented bag.

    Parameters
    ----------
    features : array-like, shape (n, p)
        Observed features; ``p`` may be zero.
    responses : array-like, shape (n,)
    x_new : array-like, shape (p,)
    y_candidate : float
    measure : callable, optional
        Defaults to :class:`AbsDeviationFromMean`.
    alpha : float
        Only used to report the threshold.

    Returns
    -------
    PlausibilityResult
        ``plausibility`` is ``#{i : mu_i >= mu_{n+1}} / (n+1)``.
    """
    y = np.asarray(responses, dtype=float).ravel()
    n = y.size
    if n < 1:
        raise ParameterError("plausibility needs at least one observation")
    x = np.asarray(features, dtype=float)
    if x.size == 0:
        x = np.empty((n, 0))
    elif x.ndim == 1:
        x = x.reshape(n, -1)
    if x.shape[0] != n:
        raise ParameterError(f"features have {x.shape[0]} rows but there are {n} responses")
    x_aug = np.vstack([x, np.asarray(x_new, dtype=float).reshape(1, x.shape[1])])
    y_aug = np.append(y, float(y_candidate))
    measure = measure or AbsDeviationFromMean()

    keep = np.ones(n + 1, dtype=bool)
    scores = []
    for i in range(n + 1):
        keep[i] = False
        scores.append(float(measure(x_aug[keep], y_aug[keep], x_aug[i], y_aug[i])))
        keep[i] = True
    count = sum(1 for s in scores if s >= scores[-1])
    return PlausibilityResult(count / (n + 1), validity_threshold(n, alpha), n, float(alpha), tuple(scores))
