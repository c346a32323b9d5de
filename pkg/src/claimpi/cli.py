"""Command line entry point.

Exit codes: 0 success, 1 usage error, 2 data or domain error, 3 infeasible ranks.
Miscoverage is always given as ``--alpha`` (0.1 means a 90% interval).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .conformal import plausibility
from .data import (
    DEFAULT_MISSING,
    AUTOBI_PREDICTORS,
    AUTOBI_RESPONSE,
    format_summary,
    load_csv,
    prepare,
    summarize_columns,
)
from .errors import ClaimPIError
from .intervals import RegressionSample, constrained_interval
from .simulation import example_config, load_config, report_table, run_experiment
from .transform import parse

EXIT_USAGE = 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _names(text):
    return tuple(c.strip() for c in text.split(",") if c.strip()) if text else ()


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()] if text else []
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _alpha_list(text):
    values = _floats(text)
    if not values or not all(0 < a < 1 for a in values):
        raise UsageError(f"--alpha must be one or more values in (0, 1), got {text!r}")
    return values


def _add_data_args(p, predictors_default):
    p.add_argument("--data", required=True, help="CSV file with a header row")
    p.add_argument("--response", default=AUTOBI_RESPONSE, help="response column (default %(default)s)")
    p.add_argument(
        "--predictors",
        default=predictors_default,
        help="comma-separated predictor columns, in the order t1, t2, ...",
    )
    p.add_argument("--missing", default=",".join(DEFAULT_MISSING), help="comma-separated missing-value markers")
    p.add_argument("--impute", type=float, default=0.0, help="value substituted for missing cells")


def _load_prepared(args):
    markers = tuple(args.missing.split(",")) if args.missing is not None else DEFAULT_MISSING
    table = load_csv(args.data, missing_markers=markers)
    return prepare(table, args.response, _names(args.predictors), args.impute)


def build_parser():
    parser = _Parser(prog="claimpi", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="run a Monte Carlo coverage experiment")
    source = sim.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", help="experiment JSON file")
    source.add_argument("--example", type=int, choices=(1, 2, 3), help="shipped example experiment")
    sim.add_argument("--reps", type=int, help="number of replications")
    sim.add_argument("--n", type=int, help="training sample size")
    sim.add_argument("--alpha", type=float, help="miscoverage level")
    sim.add_argument("--seed", type=int, help="master seed")
    sim.add_argument("--workers", type=int, help="worker processes (default: $CLAIMPI_WORKERS or 1)")
    sim.add_argument("--out", help="write the report as CSV to this path")

    pred = sub.add_parser("predict", help="upper bound [0, u] for the next claim")
    _add_data_args(pred, ",".join(AUTOBI_PREDICTORS))
    pred.add_argument("--transform", required=True, help="expression in t1..tp, e.g. 'log(1+t1+t2)'")
    pred.add_argument("--alpha", required=True, help="miscoverage level(s), comma-separated")
    where = pred.add_mutually_exclusive_group(required=True)
    where.add_argument("--x-new", help="comma-separated predictor values of the new claim")
    where.add_argument("--holdout-last", action="store_true", help="train on all rows but the last; predict the last")

    summ = sub.add_parser("summarize", help="min, quartiles, max and mean of columns")
    summ.add_argument("--data", required=True)
    summ.add_argument("--cols", default=",".join((AUTOBI_RESPONSE,) + AUTOBI_PREDICTORS))
    summ.add_argument("--missing", default=",".join(DEFAULT_MISSING))
    summ.add_argument("--impute", type=float, default=0.0)

    pl = sub.add_parser("plausibility", help="conformal plausibility of a candidate response")
    _add_data_args(pl, "")
    pl.add_argument("--x-new", default="", help="comma-separated predictor values")
    pl.add_argument("--y-candidate", type=float, required=True)
    pl.add_argument("--alpha", type=float, default=0.1)
    return parser


def _cmd_simulate(args, out):
    if args.config is not None:
        if not Path(args.config).is_file():
            raise UsageError(f"config file not found: {args.config}")
        config = load_config(args.config)
    else:
        config = example_config(args.example)
    config = config.replace(reps=args.reps, n=args.n, alpha=args.alpha, master_seed=args.seed)
    report = run_experiment(config, workers=args.workers)
    text, csv_text = report_table(report)
    out.write(text)
    if args.out:
        Path(args.out).write_text(csv_text)


def _cmd_predict(args, out):
    dataset = _load_prepared(args)
    h = parse(args.transform, len(dataset.predictors))
    sample = dataset.sample
    if args.holdout_last:
        if sample.n < 2:
            raise UsageError("--holdout-last needs at least two rows")
        train = RegressionSample(sample.features[:-1], sample.responses[:-1])
        x_new = sample.features[-1]
    else:
        train = sample
        x_new = np.array(_floats(args.x_new))
        if x_new.size != sample.p:
            raise UsageError(f"--x-new has {x_new.size} value(s); expected {sample.p}")
    out.write(f"n={train.n} p={train.p} transform={args.transform}\n")
    for alpha in _alpha_list(args.alpha):
        interval = constrained_interval(train, h, x_new, alpha)
        out.write(
            f"alpha={alpha:g} interval={interval} upper={interval.upper:.6f} "
            f"branch={interval.branch} degenerate={str(interval.degenerate).lower()}\n"
        )


def _cmd_summarize(args, out):
    table = load_csv(args.data, missing_markers=tuple(args.missing.split(",")))
    out.write(format_summary(summarize_columns(table, _names(args.cols), args.impute)))


def _cmd_plausibility(args, out):
    dataset = _load_prepared(args)
    x_new = np.array(_floats(args.x_new))
    if x_new.size != dataset.sample.p:
        raise UsageError(f"--x-new has {x_new.size} value(s); expected {dataset.sample.p}")
    result = plausibility(dataset.sample.features, dataset.sample.responses, x_new, args.y_candidate, alpha=args.alpha)
    out.write(
        f"plausibility={result.plausibility:.6f} threshold={result.threshold:.6f} "
        f"n={result.n} alpha={args.alpha:g} rejected={str(result.rejected).lower()}\n"
    )


_COMMANDS = {
    "simulate": _cmd_simulate,
    "predict": _cmd_predict,
    "summarize": _cmd_summarize,
    "plausibility": _cmd_plausibility,
}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _COMMANDS[args.command](args, out)
    except UsageError as exc:
        err.write(f"claimpi {args.command}: {exc}\n")
        return EXIT_USAGE
    except ClaimPIError as exc:
        err.write(f"claimpi {args.command}: {type(exc).__name__}: {exc}\n")
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
