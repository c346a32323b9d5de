"""CSV ingestion, preprocessing and summaries for claim data.

The automobile bodily injury file (``AutoBI.csv``, from Frees' *Regression
Modeling with Actuarial and Financial Applications*) is not redistributed;
point :func:`load_csv` at a local copy.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .intervals import RegressionSample, constrained_interval, unsupervised_claim_interval
from .order_statistics import as_fraction, empirical_quantile
from .transform import TransformExpr, require_nonnegative

__all__ = [
    "RawTable",
    "PreparedDataset",
    "Summary",
    "RealDataRow",
    "load_csv",
    "write_csv",
    "prepare",
    "summarize",
    "summarize_columns",
    "realdata_experiment",
    "format_summary",
    "AUTOBI_RESPONSE",
    "AUTOBI_PREDICTORS",
    "AUTOBI_TRANSFORM",
    "AUTOBI_ALPHAS",
    "DEFAULT_MISSING",
]

DEFAULT_MISSING = ("", ".")
AUTOBI_RESPONSE = "LOSS"
AUTOBI_PREDICTORS = ("CLMSEX", "MARITAL", "CLMINSUR", "SEATBELT", "CLMAGE")
AUTOBI_TRANSFORM = "log(1+t1+t2+t3+t4+t5)"
AUTOBI_ALPHAS = (0.10, 0.075, 0.05, 0.025)


@dataclass(frozen=True)
class RawTable:
    """Named numeric columns; ``None`` marks a missing cell."""

    header: tuple
    columns: dict

    def __post_init__(self):
        if len(set(self.header)) != len(self.header):
            raise DataError(f"duplicate column names in header {self.header}")
        lengths = {len(self.columns[name]) for name in self.header}
        if len(lengths) > 1:
            raise DataError("columns have different lengths")

    @property
    def n_rows(self) -> int:
        return len(self.columns[self.header[0]]) if self.header else 0

    def column(self, name) -> list:
        if name not in self.columns:
            raise DataError(f"unknown column {name!r}; available: {', '.join(self.header)}")
        return self.columns[name]

    @property
    def missing_count(self) -> int:
        return sum(v is None for col in self.columns.values() for v in col)


def _cell(token, markers, line, name):
    token = token.strip()
    if token in markers:
        return None
    try:
        value = float(token)
    except ValueError:
        raise DataError(f"line {line}, column {name!r}: non-numeric value {token!r}") from None
    if not math.isfinite(value):
        raise DataError(f"line {line}, column {name!r}: non-finite value {token!r}")
    return value


def load_csv(path, missing_markers=DEFAULT_MISSING) -> RawTable:
    """Read a comma-separated file with a header row.

    Raises
    ------
    DataError
        Unreadable file, empty file, a row whose length differs from the
        header, or a non-numeric cell that is not a missing marker.
    """
    markers = set(missing_markers)
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = tuple(h.strip() for h in next(reader))
            except StopIteration:
                raise DataError(f"{path}: file is empty") from None
            columns = {name: [] for name in header}
            if len(columns) != len(header):
                raise DataError(f"{path}: duplicate column names in header")
            for row in reader:
                if not row:
                    continue
                if len(row) != len(header):
                    raise DataError(
                        f"{path}: line {reader.line_num} has {len(row)} field(s), header has {len(header)}"
                    )
                for name, token in zip(header, row):
                    columns[name].append(_cell(token, markers, reader.line_num, name))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    return RawTable(header, columns)


def write_csv(table: RawTable, path) -> None:
    """Write a table so that :func:`load_csv` reads it back unchanged."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(table.header)
        for i in range(table.n_rows):
            writer.writerow(["" if table.columns[h][i] is None else repr(table.columns[h][i]) for h in table.header])


@dataclass(frozen=True)
class PreparedDataset:
    sample: RegressionSample
    response: str
    predictors: tuple
    imputed_count: int

    @property
    def index(self) -> dict:
        """Predictor name to feature-column index."""
        return {name: i for i, name in enumerate(self.predictors)}

    def column(self, name) -> np.ndarray:
        if name == self.response:
            return self.sample.responses
        if name in self.index:
            return self.sample.features[:, self.index[name]]
        raise DataError(f"unknown column {name!r}")


def prepare(table: RawTable, response=AUTOBI_RESPONSE, predictors=AUTOBI_PREDICTORS, impute_value=0.0):
    """Select columns, replace missing cells with ``impute_value`` and check the response is nonnegative."""
    predictors = tuple(predictors)
    names = (response,) + predictors
    raw = [table.column(name) for name in names]
    if table.n_rows == 0:
        raise DataError("table has no rows")
    imputed = sum(v is None for col in raw for v in col)
    filled = [np.array([impute_value if v is None else v for v in col], dtype=float) for col in raw]
    y = filled[0]
    if y.min() < 0:
        row = int(np.flatnonzero(y < 0)[0])
        raise DataError(f"response {response!r} is negative at data row {row + 1}")
    features = np.column_stack(filled[1:]) if predictors else np.empty((y.size, 0))
    return PreparedDataset(RegressionSample(features, y), response, predictors, imputed)


@dataclass(frozen=True)
class Summary:
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float
    mean: float


def _summary(values) -> Summary:
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise DataError("cannot summarise an empty column")
    return Summary(
        float(values.min()),
        empirical_quantile(values, 0.25),
        empirical_quantile(values, 0.5),
        empirical_quantile(values, 0.75),
        float(values.max()),
        math.fsum(values) / values.size,
    )


def summarize(dataset: PreparedDataset) -> dict:
    """Min, quartiles (inverse-ECDF), max and mean of the response and each predictor."""
    return {name: _summary(dataset.column(name)) for name in (dataset.response,) + dataset.predictors}


def summarize_columns(table: RawTable, cols, impute_value=0.0) -> dict:
    out = {}
    for name in cols:
        out[name] = _summary([impute_value if v is None else v for v in table.column(name)])
    return out


def format_summary(summaries: dict) -> str:
    header = ("variable", "min", "q1", "median", "q3", "max", "mean")
    rows = [
        (name, *(f"{v:.3f}" for v in (s.minimum, s.q1, s.median, s.q3, s.maximum, s.mean)))
        for name, s in summaries.items()
    ]
    widths = [max(len(header[i]), *(len(r[i]) for r in rows)) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths)))
             for r in [header, *rows]]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class RealDataRow:
    alpha: float
    oracle_upper: float
    baseline_upper: float
    transform_upper: float
    branch: str


def realdata_experiment(dataset: PreparedDataset, h: TransformExpr, alphas=AUTOBI_ALPHAS) -> list:
    """Hold out the last row and compare three upper bounds per level.

    The oracle is the inverse-ECDF (1-alpha)-quantile of all responses; the
    baseline and transformation bounds use the first ``n - 1`` rows and the
    features of the last row.
    """
    sample = dataset.sample
    if sample.n < 2:
        raise DataError("need at least two rows to hold out the last one")
    require_nonnegative(h, sample.features)
    train = RegressionSample(sample.features[:-1], sample.responses[:-1])
    x_last = sample.features[-1]
    rows = []
    for alpha in alphas:
        interval = constrained_interval(train, h, x_last, alpha)
        rows.append(
            RealDataRow(
                alpha=float(alpha),
                oracle_upper=empirical_quantile(sample.responses, 1 - as_fraction(alpha)),
                baseline_upper=unsupervised_claim_interval(train.responses, alpha).upper,
                transform_upper=interval.upper,
                branch=interval.branch,
            )
        )
    return rows


def default_dataset_path():
    """Local AutoBI path from ``CLAIMPI_AUTOBI``, if set and present."""
    raw = os.environ.get("CLAIMPI_AUTOBI")
    if raw and Path(raw).is_file():
        return Path(raw)
    return None
