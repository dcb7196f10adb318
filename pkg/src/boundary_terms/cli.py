"""Command-line front end.

Subcommands::

    boundary-audit audit  --config well.ini [--format json] [--out reports]
    boundary-audit sweep  --config bloch.ini --jobs 4
    boundary-audit verify [--tolerance-scale 1.0] [--jobs 4]
    boundary-audit report reports/bloch.json --format csv

Exit codes: 0 when every verdict passes, 1 on any failure, 2 on a config
or usage error, 3 on a numerical error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import acceptance
from .config import load_config
from .errors import (
    ConfigError,
    DegeneracyError,
    GaugeError,
    IntegrityError,
    NumericalError,
    ParameterError,
    ShapeError,
    UsageError,
)
from .reports import ReportBundle, ReportIOError, emit_reports, load_bundle
from .scenarios import SWEEP_KINDS, metadata, run_scenario

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3
CONFIG_ERRORS = (ConfigError, ParameterError, ShapeError, UsageError, ReportIOError)
NUMERICAL_ERRORS = (NumericalError, DegeneracyError, GaugeError, IntegrityError, FloatingPointError, np.linalg.LinAlgError)


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default=None, help="report encoding (default: config or json)")
    common.add_argument("--out", default=None, help="output directory (default: config or ./reports)")
    common.add_argument("--tolerance-scale", type=_positive_float, default=1.0, help="multiply every tolerance")
    common.add_argument("--jobs", type=_positive_int, default=1, help="worker threads for sweeps")

    parser = argparse.ArgumentParser(prog="boundary-audit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (("audit", "run a single scenario"), ("sweep", "run a k or flux sweep")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--config", required=True, help="scenario INI file")
    p = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    p.add_argument("--config", default=None, help="ignored except for its [output] section")
    p = sub.add_parser("report", parents=[common], help="re-emit a saved JSON bundle")
    p.add_argument("bundle", help="path to a JSON bundle written by audit, sweep or verify")
    return parser


def _run_config(args, sweep: bool) -> tuple[ReportBundle, str, str, str]:
    cfg = load_config(args.config)
    if sweep != (cfg.scenario.kind in SWEEP_KINDS):
        other = "audit" if sweep else "sweep"
        raise UsageError(f"scenario kind {cfg.scenario.kind!r} is run with the {other!r} subcommand")
    bundle = run_scenario(cfg, args.tolerance_scale, args.jobs)
    for row in bundle.rows:
        print(_row_line(bundle.row_kind, row))
    stem = cfg.scenario.name or cfg.scenario.kind
    return bundle, stem, args.format or cfg.output.format, args.out or cfg.output.directory


def _row_line(kind: str, row: dict) -> str:
    label = {"audit": "scenario", "hf": "k", "flux": "flux", "superposition": "time", "berry": "time"}[kind]
    return f"[{row['verdict']}] {kind} {label}={row[label]} metric={row['metric']:.3e} tol={row['tolerance']:.1e}"


def _verify(args) -> tuple[ReportBundle, str, str, str]:
    fmt, out = args.format or "json", args.out or "reports"
    if args.config:
        cfg = load_config(args.config)
        fmt, out = args.format or cfg.output.format, args.out or cfg.output.directory
    results = acceptance.run_all(args.tolerance_scale, args.jobs)
    for r in results:
        print(r.line())
    meta = metadata(None, args.tolerance_scale, suite="acceptance")
    return ReportBundle("criterion", meta, [r.row() for r in results]), "verify", fmt, out


def _report(args) -> tuple[ReportBundle, str, str, str]:
    bundle = load_bundle(args.bundle)
    bundle.check_verdicts()
    stem = args.bundle.rsplit("/", 1)[-1].rsplit(".", 1)[0]
    return bundle, stem, args.format or "json", args.out or "reports"


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handler = {
        "audit": lambda a: _run_config(a, sweep=False),
        "sweep": lambda a: _run_config(a, sweep=True),
        "verify": _verify,
        "report": _report,
    }[args.command]
    try:
        bundle, stem, fmt, out = handler(args)
        path = emit_reports(bundle, fmt, out, stem)
    except CONFIG_ERRORS as exc:
        key = getattr(exc, "key", None)
        print(f"error: {exc}" + (f" [key: {key}]" if key else ""), file=sys.stderr)
        return EXIT_CONFIG
    except NUMERICAL_ERRORS as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"wrote {path}")
    return EXIT_PASS if bundle.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
