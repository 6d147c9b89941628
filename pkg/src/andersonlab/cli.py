"""Command-line surface: one subcommand per experiment kind.

Exit codes: 0 success, 2 config error, 3 runtime failure over the
per-run failure budget.
"""

from __future__ import annotations

import argparse
import sys

from .ensemble import KINDS, EnsembleReport, load_config, parse_config, run_experiment
from .errors import ConfigError, FailureBudgetError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="andersonlab",
        description=(
            "Monte Carlo experiments on the multi-particle Anderson model "
            "with correlated random potentials"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run a {kind} experiment")
        _add_run_flags(p)
    v = sub.add_parser("validate", help="validate a config file and exit")
    v.add_argument("--config", required=True, help="path to the TOML config")
    return parser


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="path to the TOML config")
    p.add_argument("--seed", type=int, default=None, help="override master seed")
    p.add_argument("--trials", type=int, default=None, help="override trial count")
    p.add_argument("--workers", type=int, default=None, help="override worker count")
    p.add_argument("--out", default=None, help="override output directory")
    p.add_argument(
        "--estar-override",
        type=float,
        default=None,
        help="replace the energy threshold E* (msa-initial only)",
    )
    p.add_argument("--quiet", action="store_true", help="suppress progress output")


def _apply_overrides(raw: dict, args: argparse.Namespace) -> dict:
    raw = dict(raw)
    for key in ("seed", "trials", "workers", "out"):
        value = getattr(args, key, None)
        if value is not None:
            raw[key] = value
    if args.quiet:
        raw["quiet"] = True
    if getattr(args, "estar_override", None) is not None:
        msa = dict(raw.get("msa", {}))
        msa["estar_override"] = args.estar_override
        raw["msa"] = msa
    return raw


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    try:
        raw = load_config(args.config)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        _print_problems(exc)
        return 2

    if args.command == "validate":
        try:
            parse_config(raw)
        except ConfigError as exc:
            _print_problems(exc)
            return 2
        print("config ok")
        return 0

    raw = _apply_overrides(raw, args)
    raw.setdefault("kind", args.command)
    if raw["kind"] != args.command:
        print(
            f"error: config kind '{raw['kind']}' does not match "
            f"subcommand '{args.command}'",
            file=sys.stderr,
        )
        return 2

    try:
        cfg = parse_config(raw)
    except ConfigError as exc:
        _print_problems(exc)
        return 2

    try:
        report = run_experiment(cfg)
    except FailureBudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3

    paths = report.write(cfg.out)
    if not cfg.quiet:
        _summarize(report, paths)
    return 0


def _print_problems(exc: ConfigError) -> None:
    for problem in exc.problems:
        print(f"config error: {problem}", file=sys.stderr)


def _summarize(report: EnsembleReport, paths: list[str]) -> None:
    print(f"{report.kind}: {len(report.records)} records, "
          f"{report.n_failed} failed, {report.runtime_seconds:.1f}s")
    for key, value in report.aggregates.items():
        if key in ("scales", "n_records"):
            continue
        print(f"  {key} = {value}")
    if "scales" in report.aggregates:
        for row in report.aggregates["scales"]:
            parts = ", ".join(f"{k}={v}" for k, v in row.items())
            print(f"  scale {parts}")
    for path in paths:
        print(f"  wrote {path}")


if __name__ == "__main__":
    sys.exit(main())
