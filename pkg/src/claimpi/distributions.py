"""Seeded random streams and the three distribution families used in the experiments.

Every sampler draws from a :class:`SeededRng`, whose output is a pure function of
``(master_seed, stream_id)``. Monte Carlo code opens one stream per replication so
results do not depend on how replications are scheduled across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, ParameterError

__all__ = [
    "GammaParams",
    "ParetoIIParams",
    "BernoulliParams",
    "SeededRng",
    "gamma_sample",
    "gamma_cdf",
    "gamma_quantile",
    "regularized_lower_gamma",
    "pareto2_sample",
    "pareto2_cdf",
    "bernoulli_sample",
]

_UINT64_MAX = 2**64 - 1
_TERM_TOL = 1e-14
_QUANTILE_TOL = 1e-10
_MAX_TERMS = 100_000
_FPMIN = 1e-300


def _check_positive(name, value):
    if not (isinstance(value, (int, float, np.integer, np.floating)) and math.isfinite(value) and value > 0):
        raise ParameterError(f"{name} must be a positive finite real, got {value!r}")


@dataclass(frozen=True)
class GammaParams:
    """Gamma law with density ``rate**shape / Gamma(shape) * x**(shape-1) * exp(-rate*x)``."""

    shape: float
    rate: float

    def __post_init__(self):
        _check_positive("shape", self.shape)
        _check_positive("rate", self.rate)

    @property
    def mean(self) -> float:
        return self.shape / self.rate


@dataclass(frozen=True)
class ParetoIIParams:
    """Pareto type II (Lomax) law with survival ``(theta / (theta + x))**beta``."""

    beta: float
    theta: float

    def __post_init__(self):
        _check_positive("beta", self.beta)
        _check_positive("theta", self.theta)


@dataclass(frozen=True)
class BernoulliParams:
    p: float

    def __post_init__(self):
        if not (isinstance(self.p, (int, float)) and 0.0 < self.p < 1.0):
            raise ParameterError(f"p must lie strictly inside (0, 1), got {self.p!r}")


class SeededRng:
    """A reproducible random stream keyed by ``(master_seed, stream_id)``.

    Streams with different ``stream_id`` are derived through numpy's
    ``SeedSequence`` spawn keys and are statistically independent.
    """

    def __init__(self, master_seed: int, stream_id: int = 0):
        for name, value in (("master_seed", master_seed), ("stream_id", stream_id)):
            if not isinstance(value, (int, np.integer)) or not 0 <= value <= _UINT64_MAX:
                raise ParameterError(f"{name} must be an unsigned 64-bit integer, got {value!r}")
        self.master_seed = int(master_seed)
        self.stream_id = int(stream_id)
        seq = np.random.SeedSequence(entropy=self.master_seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.PCG64(seq))

    def __repr__(self):
        return f"SeededRng(master_seed={self.master_seed}, stream_id={self.stream_id})"

    def random(self, size=None):
        """Uniform draws on [0, 1)."""
        return self.generator.random(size)

    def standard_normal(self, size=None):
        return self.generator.standard_normal(size)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self.generator.uniform(low, high, size)


# ---------------------------------------------------------------------------
# Gamma


def _standard_gamma(shape: float, rng: SeededRng, count: int) -> np.ndarray:
    """Marsaglia-Tsang squeeze/rejection; shapes below one go through the boosting identity."""
    if shape < 1.0:
        boosted = _standard_gamma(shape + 1.0, rng, count)
        u = rng.random(count)
        # G(a) = G(a+1) * U**(1/a); done in log space so tiny shapes stay finite
        with np.errstate(divide="ignore"):
            return np.exp(np.log(boosted) + np.log(u) / shape)

    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    out = np.empty(count)
    filled = 0
    while filled < count:
        need = count - filled
        batch = need + need // 4 + 8
        x = rng.standard_normal(batch)
        u = rng.random(batch)
        v = 1.0 + c * x
        positive = v > 0.0
        v = np.where(positive, v * v * v, 1.0)
        with np.errstate(divide="ignore"):
            accept = positive & (np.log(u) < 0.5 * x * x + d - d * v + d * np.log(v))
        taken = (d * v)[accept][:need]
        out[filled:filled + taken.size] = taken
        filled += taken.size
    return out


def gamma_sample(params: GammaParams, rng: SeededRng, size=None):
    """Draw from Gamma(shape, rate). Returns a float when ``size`` is None."""
    count = 1 if size is None else int(np.prod(size))
    draws = _standard_gamma(float(params.shape), rng, count) / params.rate
    if size is None:
        return float(draws[0])
    return draws.reshape(size)


def regularized_lower_gamma(a: float, x: float) -> float:
    """P(a, x) = gamma(a, x) / Gamma(a).

    Series expansion below ``x < a + 1``, modified-Lentz continued fraction for
    the upper tail otherwise.
    """
    if x <= 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    log_prefactor = -x + a * math.log(x) - math.lgamma(a)
    if x < a + 1.0:
        ap = a
        term = total = 1.0 / a
        for _ in range(_MAX_TERMS):
            ap += 1.0
            term *= x / ap
            total += term
            if abs(term) < abs(total) * _TERM_TOL:
                return min(1.0, total * math.exp(log_prefactor))
        raise ConvergenceError(f"incomplete gamma series did not converge (a={a}, x={x})")

    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_TERMS):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _TERM_TOL:
            return max(0.0, 1.0 - math.exp(log_prefactor) * h)
    raise ConvergenceError(f"incomplete gamma continued fraction did not converge (a={a}, x={x})")


def gamma_cdf(x: float, params: GammaParams) -> float:
    return regularized_lower_gamma(float(params.shape), params.rate * x)


def gamma_quantile(params: GammaParams, p: float) -> float:
    """Invert the Gamma CDF by bisection.

    Raises
    ------
    ConvergenceError
        If the bracket collapses without ``|F(x) - p| <= 1e-10``.
    """
    if not 0.0 < p < 1.0:
        raise ParameterError(f"p must lie strictly inside (0, 1), got {p!r}")
    lo = 0.0
    hi = max(1.0, float(params.shape)) / params.rate
    while gamma_cdf(hi, params) < p:
        lo = hi
        hi *= 2.0
        if math.isinf(hi):
            raise ConvergenceError(f"could not bracket the {p} quantile of {params}")

    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if gamma_cdf(mid, params) < p:
            lo = mid
        else:
            hi = mid

    best = min((lo, hi), key=lambda v: abs(gamma_cdf(v, params) - p))
    if abs(gamma_cdf(best, params) - p) > _QUANTILE_TOL:
        raise ConvergenceError(f"gamma quantile inversion missed tolerance for {params}, p={p}")
    return best


# ---------------------------------------------------------------------------
# Pareto II and Bernoulli


def pareto2_sample(params: ParetoIIParams, rng: SeededRng, size=None):
    """Inverse-transform draw ``theta * ((1 - U)**(-1/beta) - 1)``."""
    u = rng.random(size)
    draws = params.theta * np.expm1(-np.log1p(-u) / params.beta)
    return float(draws) if size is None else draws


def pareto2_cdf(x: float, params: ParetoIIParams) -> float:
    if x <= 0.0:
        return 0.0
    return 1.0 - (params.theta / (params.theta + x)) ** params.beta


def bernoulli_sample(params: BernoulliParams, rng: SeededRng, size=None):
    u = rng.random(size)
    draws = (u < params.p).astype(np.int64)
    return int(draws) if size is None else draws
