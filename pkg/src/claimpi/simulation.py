"""Monte Carlo coverage experiments for the nonnegative-response intervals.

Each replication draws ``n + 1`` pairs on its own random stream (stream id =
replication index), builds every interval from the first ``n`` pairs and the
last feature vector, and records whether the last response is covered and how
long the interval is. Results are gathered by replication index, so the report
is bit-identical for any number of workers.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from .distributions import (
    BernoulliParams,
    GammaParams,
    ParetoIIParams,
    SeededRng,
    bernoulli_sample,
    gamma_quantile,
    gamma_sample,
    pareto2_sample,
)
from .errors import ClaimPIError, ConfigError, ParameterError
from .intervals import RegressionSample, constrained_interval, unsupervised_claim_interval
from .order_statistics import as_fraction, empirical_quantile
from .transform import TransformExpr, evaluate_rows, parse

__all__ = [
    "DistSpec",
    "GeneratorSpec",
    "OracleSpec",
    "ExperimentConfig",
    "MethodResult",
    "ExperimentReport",
    "run_experiment",
    "oracle_upper",
    "report_table",
    "load_config",
    "example_config",
    "default_workers",
    "BASELINE",
    "NOISE_NAME",
]

BASELINE = "Y_(r)"
NOISE_NAME = "eps"
ORACLE_STREAM = 2**64 - 1
PILOT_STREAM = 2**64 - 2
PILOT_SIZE = 2000
LOW_PRECISION_REPS = 100
WORKERS_ENV = "CLAIMPI_WORKERS"

_FAMILY_PARAMS = {
    "gamma": ("shape", "rate"),
    "pareto2": ("beta", "theta"),
    "bernoulli": ("p",),
    "uniform": ("low", "high"),
    "constant": ("value",),
}


def _number(value, what):
    if isinstance(value, bool):
        raise ConfigError(f"{what}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError):
            pass
    raise ConfigError(f"{what}: expected a number or a ratio like '1/3', got {value!r}")


@dataclass(frozen=True)
class DistSpec:
    """One coordinate of the generator: a family, its parameters, and an optional sign flip."""

    family: str
    params: dict
    negate: bool = False

    def __post_init__(self):
        if self.family not in _FAMILY_PARAMS:
            raise ConfigError(f"unknown distribution family {self.family!r}; choose from {sorted(_FAMILY_PARAMS)}")
        missing = set(_FAMILY_PARAMS[self.family]) - set(self.params)
        if missing:
            raise ConfigError(f"{self.family} needs parameter(s) {sorted(missing)}")
        try:
            self._typed()
        except ParameterError as exc:
            raise ConfigError(str(exc)) from None
        if self.family == "uniform" and not self.params["low"] < self.params["high"]:
            raise ConfigError("uniform needs low < high")

    def _typed(self):
        p = self.params
        if self.family == "gamma":
            return GammaParams(p["shape"], p["rate"])
        if self.family == "pareto2":
            return ParetoIIParams(p["beta"], p["theta"])
        if self.family == "bernoulli":
            return BernoulliParams(p["p"])
        return None

    @classmethod
    def from_dict(cls, d, what="distribution"):
        if not isinstance(d, dict) or "family" not in d:
            raise ConfigError(f"{what}: expected an object with a 'family' key")
        family = d["family"]
        names = _FAMILY_PARAMS.get(family, ())
        params = {k: _number(d[k], f"{what}.{k}") for k in names if k in d}
        unknown = set(d) - set(names) - {"family", "negate"}
        if unknown:
            raise ConfigError(f"{what}: unknown key(s) {sorted(unknown)}")
        return cls(family, params, bool(d.get("negate", False)))

    def to_dict(self):
        d = {"family": self.family, **self.params}
        if self.negate:
            d["negate"] = True
        return d

    def sample(self, rng: SeededRng, size: int) -> np.ndarray:
        typed = self._typed()
        if self.family == "gamma":
            draws = gamma_sample(typed, rng, size)
        elif self.family == "pareto2":
            draws = pareto2_sample(typed, rng, size)
        elif self.family == "bernoulli":
            draws = bernoulli_sample(typed, rng, size).astype(float)
        elif self.family == "uniform":
            draws = rng.uniform(self.params["low"], self.params["high"], size)
        else:
            draws = np.full(size, self.params["value"])
        return -draws if self.negate else draws


@dataclass(frozen=True)
class GeneratorSpec:
    """``Y = f(X) + noise`` written as an expression over ``t1..tp`` and ``eps``."""

    predictors: tuple
    noise: DistSpec
    response: TransformExpr

    @property
    def p(self) -> int:
        return len(self.predictors)

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ConfigError("generator: expected an object")
        for key in ("predictors", "noise", "response"):
            if key not in d:
                raise ConfigError(f"generator: missing {key!r}")
        predictors = tuple(
            DistSpec.from_dict(item, f"generator.predictors[{i}]") for i, item in enumerate(d["predictors"])
        )
        noise = DistSpec.from_dict(d["noise"], "generator.noise")
        try:
            response = parse(d["response"], len(predictors), names=(NOISE_NAME,))
        except ClaimPIError as exc:
            raise ConfigError(f"generator.response: {exc}") from None
        return cls(predictors, noise, response)

    def to_dict(self):
        return {
            "predictors": [s.to_dict() for s in self.predictors],
            "noise": self.noise.to_dict(),
            "response": self.response.source,
        }

    def draw(self, rng: SeededRng, m: int):
        """Draw ``m`` pairs; predictors in declaration order, then the noise."""
        cols = [spec.sample(rng, m) for spec in self.predictors]
        cols.append(self.noise.sample(rng, m))
        inputs = np.column_stack(cols)
        y = evaluate_rows(self.response, inputs)
        if y.min() < 0:
            raise ConfigError(f"generator produced a negative response ({y.min():.6g}); Y must be nonnegative")
        return inputs[:, :-1], y


@dataclass(frozen=True)
class OracleSpec:
    """``closed_form`` uses a Gamma quantile; ``empirical`` a pilot sample of size ``m``."""

    kind: str
    gamma: GammaParams | None = None
    m: int = 0

    def __post_init__(self):
        if self.kind == "closed_form":
            if self.gamma is None:
                raise ConfigError("closed_form oracle needs Gamma parameters")
        elif self.kind == "empirical":
            if int(self.m) != self.m or self.m < 1:
                raise ConfigError(f"empirical oracle needs m >= 1, got {self.m!r}")
        else:
            raise ConfigError(f"oracle kind must be 'closed_form' or 'empirical', got {self.kind!r}")

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict) or "kind" not in d:
            raise ConfigError("oracle: expected an object with a 'kind' key")
        if d["kind"] == "closed_form":
            if d.get("family", "gamma") != "gamma":
                raise ConfigError("closed_form oracle supports the gamma family only")
            try:
                params = GammaParams(_number(d.get("shape"), "oracle.shape"), _number(d.get("rate"), "oracle.rate"))
            except ParameterError as exc:
                raise ConfigError(str(exc)) from None
            return cls("closed_form", gamma=params)
        return cls(d["kind"], m=d.get("m", 0))

    def to_dict(self):
        if self.kind == "closed_form":
            return {"kind": "closed_form", "family": "gamma", "shape": self.gamma.shape, "rate": self.gamma.rate}
        return {"kind": "empirical", "m": self.m}


@dataclass(frozen=True)
class ExperimentConfig:
    generator: GeneratorSpec
    n: int
    reps: int
    alpha: float
    transforms: tuple  # of (name, TransformExpr)
    oracle: OracleSpec
    master_seed: int = 0
    name: str = "experiment"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ConfigError(f"n must be a positive integer, got {self.n!r}")
        if int(self.reps) != self.reps or self.reps < 1:
            raise ConfigError(f"reps must be a positive integer, got {self.reps!r}")
        if not 0 < self.alpha < 1:
            raise ConfigError(f"alpha must lie strictly inside (0, 1), got {self.alpha!r}")
        if not isinstance(self.master_seed, int) or not 0 <= self.master_seed < 2**64:
            raise ConfigError(f"master_seed must be an unsigned 64-bit integer, got {self.master_seed!r}")
        names = [name for name, _ in self.transforms]
        if len(set(names)) != len(names) or BASELINE in names:
            raise ConfigError(f"transform names must be unique and differ from {BASELINE!r}")
        for name, expr in self.transforms:
            if expr.width != self.generator.p:
                raise ConfigError(f"transform {name!r} takes {expr.width} variable(s); generator has {self.generator.p}")

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ConfigError("config: expected a JSON object")
        known = {"name", "generator", "n", "reps", "alpha", "transforms", "oracle", "master_seed"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"config: unknown key(s) {sorted(unknown)}")
        for key in ("generator", "n", "reps", "alpha", "oracle"):
            if key not in d:
                raise ConfigError(f"config: missing {key!r}")
        generator = GeneratorSpec.from_dict(d["generator"])
        transforms = []
        for i, item in enumerate(d.get("transforms", [])):
            if not isinstance(item, dict) or "expr" not in item:
                raise ConfigError(f"transforms[{i}]: expected an object with 'name' and 'expr'")
            try:
                expr = parse(item["expr"], generator.p)
            except ClaimPIError as exc:
                raise ConfigError(f"transforms[{i}]: {exc}") from None
            transforms.append((str(item.get("name", f"h{i + 1}")), expr))
        return cls(
            generator=generator,
            n=d["n"],
            reps=d["reps"],
            alpha=_number(d["alpha"], "alpha"),
            transforms=tuple(transforms),
            oracle=OracleSpec.from_dict(d["oracle"]),
            master_seed=d.get("master_seed", 0),
            name=str(d.get("name", "experiment")),
        )

    def to_dict(self):
        return {
            "name": self.name,
            "n": self.n,
            "reps": self.reps,
            "alpha": self.alpha,
            "master_seed": self.master_seed,
            "generator": self.generator.to_dict(),
            "transforms": [{"name": name, "expr": expr.source} for name, expr in self.transforms],
            "oracle": self.oracle.to_dict(),
        }

    def replace(self, **changes):
        d = self.to_dict()
        d.update({k: v for k, v in changes.items() if v is not None})
        return ExperimentConfig.from_dict(d)

    @property
    def method_names(self):
        return (BASELINE,) + tuple(name for name, _ in self.transforms)


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    return ExperimentConfig.from_dict(data)


def example_config(number: int) -> ExperimentConfig:
    """One of the three shipped example experiments (1, 2 or 3)."""
    if number not in (1, 2, 3):
        raise ConfigError(f"no shipped example {number!r}; choose 1, 2 or 3")
    text = resources.files("claimpi.configs").joinpath(f"example{number}.json").read_text()
    return ExperimentConfig.from_dict(json.loads(text))


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


# ---------------------------------------------------------------------------
# Running


def oracle_upper(config: ExperimentConfig) -> float:
    """Upper end of the oracle interval ``[0, u_alpha)``: the true (1-alpha)-quantile of Y."""
    oracle = config.oracle
    if oracle.kind == "closed_form":
        return gamma_quantile(oracle.gamma, 1 - config.alpha)
    _, y = config.generator.draw(SeededRng(config.master_seed, ORACLE_STREAM), oracle.m)
    return empirical_quantile(y, 1 - as_fraction(config.alpha))


def _validate_generator(config):
    config.generator.draw(SeededRng(config.master_seed, PILOT_STREAM), PILOT_SIZE)


def _run_replications(config: ExperimentConfig, start: int, stop: int):
    k = 1 + len(config.transforms)
    covered = np.zeros((stop - start, k), dtype=bool)
    lengths = np.zeros((stop - start, k))
    degenerate = np.zeros((stop - start, k), dtype=bool)
    n = config.n
    for row, rep in enumerate(range(start, stop)):
        x, y = config.generator.draw(SeededRng(config.master_seed, rep), n + 1)
        sample = RegressionSample(x[:n], y[:n])
        intervals = [unsupervised_claim_interval(y[:n], config.alpha)]
        intervals += [constrained_interval(sample, h, x[n], config.alpha) for _, h in config.transforms]
        for j, interval in enumerate(intervals):
            covered[row, j] = interval.contains(y[n])
            lengths[row, j] = interval.length
            degenerate[row, j] = interval.degenerate
    return start, covered, lengths, degenerate


def _chunks(reps, workers):
    count = min(reps, max(1, workers * 4))
    edges = np.linspace(0, reps, count + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


@dataclass(frozen=True)
class MethodResult:
    name: str
    expr: str
    coverage: float
    coverage_se: float
    mean_length: float
    mean_length_se: float
    length_ratio: float
    length_ratio_se: float
    degenerate_count: int


@dataclass(frozen=True)
class ExperimentReport:
    name: str
    n: int
    reps: int
    alpha: float
    master_seed: int
    oracle_length: float
    methods: tuple
    lengths: np.ndarray = field(repr=False, compare=False, default=None)
    covered: np.ndarray = field(repr=False, compare=False, default=None)

    @property
    def low_precision(self) -> bool:
        return self.reps < LOW_PRECISION_REPS

    def method(self, name) -> MethodResult:
        for m in self.methods:
            if m.name == name:
                return m
        raise KeyError(name)


def run_experiment(config: ExperimentConfig, workers: int | None = None) -> ExperimentReport:
    """Run every replication and aggregate coverage and length per method."""
    workers = default_workers() if workers is None else max(1, int(workers))
    _validate_generator(config)
    oracle = oracle_upper(config)

    reps = config.reps
    k = 1 + len(config.transforms)
    covered = np.zeros((reps, k), dtype=bool)
    lengths = np.zeros((reps, k))
    degenerate = np.zeros((reps, k), dtype=bool)
    chunks = _chunks(reps, workers)
    if workers == 1 or len(chunks) == 1:
        parts = [_run_replications(config, a, b) for a, b in chunks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_replications, config, a, b) for a, b in chunks]
            parts = [f.result() for f in futures]
    for start, cov, lens, degen in parts:
        covered[start:start + len(cov)] = cov
        lengths[start:start + len(lens)] = lens
        degenerate[start:start + len(degen)] = degen

    exprs = ("0",) + tuple(expr.source for _, expr in config.transforms)
    methods = []
    for j, name in enumerate(config.method_names):
        cov = math.fsum(covered[:, j]) / reps
        mean_len = math.fsum(lengths[:, j]) / reps
        len_se = float(np.std(lengths[:, j], ddof=1) / math.sqrt(reps)) if reps > 1 else math.nan
        ratio = mean_len / oracle if oracle > 0 else math.nan
        methods.append(
            MethodResult(
                name=name,
                expr=exprs[j],
                coverage=cov,
                coverage_se=math.sqrt(cov * (1 - cov) / reps),
                mean_length=mean_len,
                mean_length_se=len_se,
                length_ratio=ratio,
                length_ratio_se=len_se / oracle if oracle > 0 else math.nan,
                degenerate_count=int(degenerate[:, j].sum()),
            )
        )
    return ExperimentReport(
        config.name, config.n, reps, config.alpha, config.master_seed, oracle, tuple(methods), lengths, covered
    )


# ---------------------------------------------------------------------------
# Reporting

_CSV_COLUMNS = (
    "method",
    "transform",
    "coverage",
    "coverage_se",
    "mean_length",
    "mean_length_se",
    "length_ratio",
    "length_ratio_se",
    "degenerate",
)


def _f(value, digits=6):
    return "nan" if math.isnan(value) else f"{value:.{digits}f}"


def report_table(report: ExperimentReport) -> tuple[str, str]:
    """Render the report as aligned text and as CSV."""
    rows = [
        (
            m.name,
            m.expr,
            f"{100 * m.coverage:.1f}%",
            _f(100 * m.coverage_se, 2),
            _f(m.length_ratio, 3),
            _f(m.length_ratio_se, 3),
            _f(m.mean_length, 4),
            str(m.degenerate_count),
        )
        for m in report.methods
    ]
    header = ("method", "transform", "coverage", "cov_se(pp)", "len/oracle", "ratio_se", "mean_len", "degenerate")
    widths = [max(len(header[i]), *(len(r[i]) for r in rows)) for i in range(len(header))]

    def line(cells):
        return "  ".join(c.ljust(w) if i < 2 else c.rjust(w) for i, (c, w) in enumerate(zip(cells, widths)))

    title = (
        f"{report.name}: n={report.n}, reps={report.reps}, alpha={report.alpha:g}, "
        f"seed={report.master_seed}, oracle length={report.oracle_length:.6f}"
    )
    text = [title, line(header), line(["-" * w for w in widths])]
    text += [line(r) for r in rows]
    if report.low_precision:
        text.append(f"WARNING: low precision, only {report.reps} replication(s)")

    csv_lines = [",".join(_CSV_COLUMNS)]
    for m in report.methods:
        csv_lines.append(
            ",".join(
                [
                    m.name,
                    '"' + m.expr.replace('"', '""') + '"',
                    _f(m.coverage, 10),
                    _f(m.coverage_se, 10),
                    _f(m.mean_length, 10),
                    _f(m.mean_length_se, 10),
                    _f(m.length_ratio, 10),
                    _f(m.length_ratio_se, 10),
                    str(m.degenerate_count),
                ]
            )
        )
    return "\n".join(text) + "\n", "\n".join(csv_lines) + "\n"
