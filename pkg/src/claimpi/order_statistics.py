"""Order-statistic prediction intervals for an iid sample.

Rank arithmetic is done in exact rationals: ``alpha`` is read through its
shortest decimal representation, so ``alpha=0.1`` means exactly 1/10 and
boundary cases such as ``(n+1)(1-alpha)`` landing on an integer are not lost
to floating-point rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InfeasibleRanksError, ParameterError
from .interval import PredictionInterval

__all__ = [
    "RankPair",
    "as_fraction",
    "as_sample",
    "upper_rank",
    "order_statistic",
    "one_sided_upper_interval",
    "two_sided_ranks",
    "two_sided_interval",
    "empirical_quantile",
]


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    return Fraction(repr(float(value)))


def _check_alpha(alpha):
    if not 0 < float(alpha) < 1:
        raise ParameterError(f"alpha must lie strictly inside (0, 1), got {alpha!r}")


def _check_n(n):
    if int(n) != n or n < 1:
        raise ParameterError(f"sample size must be a positive integer, got {n!r}")


def as_sample(values) -> np.ndarray:
    """Validate and return a 1-d float array with at least one finite value."""
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise ParameterError("sample must contain at least one value")
    if not np.all(np.isfinite(arr)):
        raise ParameterError("sample values must be finite")
    return arr


@dataclass(frozen=True)
class RankPair:
    l: int
    r: int
    n: int
    alpha: float

    def __post_init__(self):
        if not 1 <= self.l < self.r <= self.n:
            raise ParameterError(f"ranks must satisfy 1 <= l < r <= n, got l={self.l}, r={self.r}, n={self.n}")
        if Fraction(self.r - self.l, self.n + 1) < 1 - as_fraction(self.alpha):
            raise ParameterError(f"ranks l={self.l}, r={self.r} do not reach coverage {1 - self.alpha} at n={self.n}")


def upper_rank(n: int, alpha) -> int:
    """``min(n, floor((n+1)(1-alpha)) + 1)``."""
    _check_n(n)
    _check_alpha(alpha)
    return min(n, math.floor((n + 1) * (1 - as_fraction(alpha))) + 1)


def order_statistic(values, k: int) -> float:
    """The ``k``-th smallest value (1-based), ties kept as a multiset."""
    arr = as_sample(values)
    if not 1 <= k <= arr.size:
        raise ParameterError(f"rank {k} outside 1..{arr.size}")
    return float(np.sort(arr, kind="stable")[k - 1])


def one_sided_upper_interval(values, alpha) -> PredictionInterval:
    """``(-inf, W_(r)]`` with ``r = upper_rank(n, alpha)``."""
    arr = as_sample(values)
    r = upper_rank(arr.size, alpha)
    return PredictionInterval(-math.inf, order_statistic(arr, r), True, False, float(alpha))


def two_sided_ranks(n: int, alpha) -> RankPair:
    """Symmetric ranks ``l = max(1, floor((n+1) alpha / 2))``, ``r = n + 1 - l``.

    Raises
    ------
    InfeasibleRanksError
        When ``(r - l) / (n + 1) >= 1 - alpha`` cannot hold for any admissible pair.
    """
    _check_n(n)
    _check_alpha(alpha)
    a = as_fraction(alpha)
    l = max(1, math.floor((n + 1) * a / 2))
    r = n + 1 - l
    if not (l < r and Fraction(r - l, n + 1) >= 1 - a):
        best = Fraction(n - 1, n + 1) if n >= 2 else Fraction(0)
        raise InfeasibleRanksError(
            f"n={n} is too small for a two-sided interval at alpha={alpha}: "
            f"best achievable (r-l)/(n+1) is {float(best):.4f} < {float(1 - a):.4f}"
        )
    return RankPair(l, r, n, float(alpha))


def two_sided_interval(values, alpha) -> PredictionInterval:
    """Open interval ``(W_(l), W_(r))`` from :func:`two_sided_ranks`."""
    arr = np.sort(as_sample(values), kind="stable")
    ranks = two_sided_ranks(arr.size, alpha)
    return PredictionInterval(float(arr[ranks.l - 1]), float(arr[ranks.r - 1]), True, True, float(alpha))


def empirical_quantile(values, p) -> float:
    """Inverse-ECDF quantile: the order statistic at rank ``ceil(p * n)`` (at least 1)."""
    if not 0 < float(p) < 1:
        raise ParameterError(f"p must lie strictly inside (0, 1), got {p!r}")
    arr = as_sample(values)
    k = max(1, math.ceil(as_fraction(p) * arr.size))
    return order_statistic(arr, k)
