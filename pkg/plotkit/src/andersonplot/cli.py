"""Batch plotting CLI: andersonplot <kind> --in <paths...> --out <file>."""

from __future__ import annotations

import argparse
import sys

from .figures import FIGURE_KINDS, FigureRequest, render
from .readers import EmptyDataError, SchemaError


def parse_constants(text: str) -> dict:
    """Parse 'c=0.5,C1=2.0,d=1' into a name -> value dict."""
    out = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ValueError(f"bad constant assignment {part!r}")
        name, value = part.split("=", 1)
        out[name.strip()] = float(value)
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="andersonplot",
        description="render figures from andersonlab CSV outputs",
    )
    parser.add_argument("kind", choices=FIGURE_KINDS, help="figure kind")
    parser.add_argument(
        "--in", dest="inputs", nargs="+", required=True, help="input CSV paths"
    )
    parser.add_argument("--out", required=True, help="output image path (.png or .svg)")
    parser.add_argument("--logy", action="store_true", help="logarithmic y axis")
    parser.add_argument(
        "--constants",
        default="",
        help="target-curve constants, e.g. c=0.5,C1=2.0,d=1",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        constants = parse_constants(args.constants)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    req = FigureRequest(
        kind=args.kind,
        inputs=tuple(args.inputs),
        out=args.out,
        logy=args.logy,
        constants=constants,
    )
    try:
        info = render(req)
    except (SchemaError, EmptyDataError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {info['out']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
