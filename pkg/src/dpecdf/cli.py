"""Command-line surface: run tests on data files, cache null tables, run studies.

Exit codes: 0 success, 2 usage/config error, 3 data error, 4 calibration
mismatch.  Every result record carries the seed that produced it, so a run
can be replayed exactly; when ``--seed`` is absent the ``DP_ECDF_SEED``
environment variable is used, and failing that a random seed is drawn and
reported.  The observed release and the calibration replicates always use
distinct derived streams (calibration: substream 0 of the seed; the release:
substream 1), so ``calibrate --seed S`` writes exactly the table that
``<test> --seed S`` would build in-process.
"""
from __future__ import annotations

import argparse
import json
import os
import secrets
import sys

import numpy as np

from .errors import CalibrationError, ConfigError, DataError, ParameterError
from .metrics import SortedSample
from .models import get_family, parse_model_spec
from .hypotests import Adjacency, NullDistributionTable
from .power import (
    builtin_scenarios,
    load_config,
    run_power_study,
    rows_to_csv,
    write_rows_csv,
)
from .procedures import build_procedure
from .rng import RngStream, derive_seed

_METHODS = ("ks", "kuiper", "cvm", "wasserstein", "sign", "wilcoxon",
            "mann-whitney", "kruskal-wallis", "median")

_CAL_SUBSTREAM = 0
_RELEASE_SUBSTREAM = 1

_BUDGET_WARNING = (
    "note: privacy accounting is per invocation; repeated tests on the same "
    "data compose their epsilon budgets."
)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dpecdf",
        description="Differentially private nonparametric tests on empirical cdfs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for kind, blurb in (
        ("gof", "goodness-of-fit test of one sample against a null model or family"),
        ("two-sample", "test whether two samples share a distribution"),
        ("paired", "symmetry test of paired differences"),
    ):
        cmd = sub.add_parser(kind, help=blurb)
        cmd.add_argument("--data", required=True, metavar="FILE",
                         help="one value per line (paired: two columns x,y)")
        if kind == "two-sample":
            cmd.add_argument("--data2", required=True, metavar="FILE",
                             help="second sample, one value per line")
            cmd.add_argument("--adjacency", default="fixed-groups",
                             choices=tuple(a.value for a in Adjacency),
                             help="neighbor relation for the privacy guarantee")
        cmd.add_argument("--method", required=True, choices=_METHODS)
        if kind == "gof":
            cmd.add_argument("--null", metavar="NAME:P1,P2",
                             help="null model, e.g. normal:0,1 or uniform:0,1")
            cmd.add_argument("--family", metavar="NAME",
                             help="location-scale family for an unknown-parameter null")
        cmd.add_argument("--epsilon", required=True, type=float)
        cmd.add_argument("--noise", choices=("tulap", "laplace"), default=None,
                         help="default: tulap for ks/kuiper, laplace for cvm/wasserstein")
        cmd.add_argument("--alpha", type=float, default=0.05)
        cmd.add_argument("--mc-samples", type=int, default=1000, metavar="M")
        cmd.add_argument("--seed", type=int, default=None)
        cmd.add_argument("--table", metavar="FILE", default=None,
                         help="reuse a cached null table written by 'calibrate'")
        cmd.add_argument("--out", choices=("text", "csv", "json"), default="text")
        cmd.set_defaults(kind=kind)

    cal = sub.add_parser("calibrate", help="build and cache a null-distribution table")
    cal.add_argument("--kind", required=True,
                     choices=("gof", "gof-family", "two-sample", "paired"))
    cal.add_argument("--method", required=True, choices=_METHODS)
    cal.add_argument("--null", metavar="NAME:P1,P2")
    cal.add_argument("--family", metavar="NAME")
    cal.add_argument("--adjacency", default="fixed-groups",
                     choices=tuple(a.value for a in Adjacency))
    cal.add_argument("--epsilon", required=True, type=float)
    cal.add_argument("--noise", choices=("tulap", "laplace"), default=None)
    cal.add_argument("--n", required=True, type=int)
    cal.add_argument("--m", type=int, default=None)
    cal.add_argument("--mc-samples", type=int, default=1000, metavar="M")
    cal.add_argument("--seed", type=int, default=None)
    cal.add_argument("--out", required=True, metavar="FILE")

    pw = sub.add_parser("power", help="run a power/type-I study grid, emit CSV")
    pw.add_argument("--config", metavar="FILE",
                    help="TOML study configuration (see configs/example.toml)")
    pw.add_argument("--out", metavar="FILE", default=None,
                    help="CSV destination (default: stdout)")
    pw.add_argument("--threads", type=int, default=1)
    pw.add_argument("--list-scenarios", action="store_true",
                    help="print builtin scenario names and captions, then exit")
    return parser


def _resolve_seed(seed: int | None) -> tuple[int, bool]:
    if seed is not None:
        return int(seed), False
    env = os.environ.get("DP_ECDF_SEED")
    if env is not None:
        try:
            return int(env), False
        except ValueError:
            raise ParameterError(f"DP_ECDF_SEED must be an integer, got {env!r}") from None
    return secrets.randbits(63), True


def _read_rows(path, expected_fields: int):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            lines = handle.read().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    rows = []
    for lineno, line in enumerate(lines, start=1):
        text = line.strip()
        if not text:
            continue
        cells = [c.strip() for c in text.split(",")]
        if len(cells) != expected_fields:
            raise DataError(
                f"{path}:{lineno}: expected {expected_fields} value(s), got {len(cells)}"
            )
        try:
            values = [float(c) for c in cells]
        except ValueError:
            raise DataError(f"{path}:{lineno}: non-numeric cell in {text!r}") from None
        if not all(np.isfinite(v) for v in values):
            raise DataError(f"{path}:{lineno}: values must be finite")
        rows.append(values)
    if not rows:
        raise DataError(f"{path}: no data rows")
    return np.asarray(rows, dtype=np.float64)


def read_single_column(path) -> np.ndarray:
    """Parse a one-column numeric file into a vector."""
    return _read_rows(path, 1)[:, 0]


def read_paired_columns(path) -> tuple[np.ndarray, np.ndarray]:
    """Parse a two-column x,y file into two equal-length vectors."""
    rows = _read_rows(path, 2)
    return rows[:, 0], rows[:, 1]


def _build_cli_procedure(kind: str, args):
    null_model = None
    family = None
    if kind in ("gof", "gof-family"):
        null_spec = getattr(args, "null", None)
        family_name = getattr(args, "family", None)
        if kind == "gof-family" and family_name is None:
            raise ParameterError("--family is required for gof-family calibration")
        if family_name is not None:
            family = get_family(family_name)
        elif null_spec is not None:
            null_model = parse_model_spec(null_spec)
        else:
            raise ParameterError("goodness-of-fit needs --null NAME:PARAMS or --family NAME")
    adjacency = getattr(args, "adjacency", Adjacency.FIXED_GROUPS)
    return build_procedure(
        "gof" if kind == "gof-family" else kind,
        args.method,
        args.epsilon,
        null_model=null_model,
        family=family,
        adjacency=adjacency,
        noise=args.noise,
    )


def _emit_record(record: dict, mode: str) -> None:
    if mode == "json":
        print(json.dumps(record))
    elif mode == "csv":
        keys = list(record)
        print(",".join(keys))
        print(",".join("" if record[k] is None else str(record[k]) for k in keys))
    else:
        width = max(len(k) for k in record)
        for key, value in record.items():
            if isinstance(value, float):
                value = format(value, ".6g")
            print(f"{key:<{width}}  {value}")


def _cmd_test(args) -> int:
    kind = args.kind
    seed, seed_was_random = _resolve_seed(args.seed)
    if kind == "gof" and args.family is not None and args.null is not None:
        raise ParameterError("give either --null or --family, not both")
    # resolve the method/design combination before touching the data so that
    # unsupported combinations are usage errors, not data errors
    procedure = _build_cli_procedure(
        "gof-family" if kind == "gof" and args.family is not None else kind, args
    )

    if kind == "gof":
        data = SortedSample.from_data(read_single_column(args.data))
        n, m = data.n, None
    elif kind == "two-sample":
        x = SortedSample.from_data(read_single_column(args.data))
        y = SortedSample.from_data(read_single_column(args.data2))
        data = (x, y)
        n, m = x.n, y.n
    else:
        x, y = read_paired_columns(args.data)
        data = y - x  # paired designs score the differences
        n, m = data.size, None
    if args.table is not None:
        table = NullDistributionTable.load(args.table)
    else:
        table = procedure.calibrate(
            n, m, mc_samples=args.mc_samples,
            rng=RngStream(derive_seed(seed, _CAL_SUBSTREAM)),
        )
    result = procedure.run(data, table, RngStream(derive_seed(seed, _RELEASE_SUBSTREAM)))

    if seed_was_random:
        print(f"note: no seed given; using random seed {seed}", file=sys.stderr)
    print(_BUDGET_WARNING, file=sys.stderr)

    record = {
        "command": kind,
        "method": args.method,
        "metric": procedure.metric.value if procedure.metric is not None else None,
        "kind_label": procedure.label,
        "epsilon": args.epsilon,
        "noise": procedure.noise.value,
        "n": n,
        "m": m,
        "alpha": args.alpha,
        "raw_statistic": result.raw_statistic,
        "privatized_statistic": result.privatized_statistic,
        "sensitivity": result.sensitivity,
        "p_value": result.p_value,
        "mc_samples": result.mc_samples,
        "seed": seed,
        "reject": bool(result.p_value <= args.alpha),
    }
    if kind == "two-sample":
        record["adjacency"] = args.adjacency
    _emit_record(record, args.out)
    return 0


def _cmd_calibrate(args) -> int:
    seed, seed_was_random = _resolve_seed(args.seed)
    procedure = _build_cli_procedure(args.kind, args)
    if args.kind == "two-sample" and args.m is None:
        raise ParameterError("two-sample calibration needs --m")
    table = procedure.calibrate(
        args.n, args.m, mc_samples=args.mc_samples,
        rng=RngStream(derive_seed(seed, _CAL_SUBSTREAM)),
    )
    table.save(args.out)
    if seed_was_random:
        print(f"note: no seed given; using random seed {seed}", file=sys.stderr)
    print(f"wrote {table.mc_samples} null values to {args.out}", file=sys.stderr)
    return 0


def _cmd_power(args) -> int:
    if args.list_scenarios:
        for scenario in builtin_scenarios():
            print(f"{scenario.name}: {scenario.caption} "
                  f"[tests: {', '.join(scenario.tests)}]")
        return 0
    if args.config is None:
        raise ConfigError("power needs --config FILE (or --list-scenarios)")
    config = load_config(args.config)
    rows = run_power_study(config, threads=args.threads)
    if args.out is None:
        sys.stdout.write(rows_to_csv(rows))
    else:
        write_rows_csv(rows, args.out)
        print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:  # argparse has printed the usage message
        return int(exc.code or 0)
    try:
        if args.command == "calibrate":
            return _cmd_calibrate(args)
        if args.command == "power":
            return _cmd_power(args)
        return _cmd_test(args)
    except (ParameterError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except CalibrationError as exc:
        print(f"calibration error: {exc}", file=sys.stderr)
        return 4


def console() -> None:
    raise SystemExit(main())
