"""CLI wrapper: `gpsr-figures plot --csv FILE --out DIR --format png|svg`."""

from __future__ import annotations

import argparse
import sys

from .render import CsvFormatError, render_family


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gpsr-figures",
        description="Regenerate the figure family from a sweep CSV.")
    sub = parser.add_subparsers(dest="command", required=True)
    plot = sub.add_parser("plot", help="render all metric/scenario panels")
    plot.add_argument("--csv", required=True, help="sweep CSV with aggregates")
    plot.add_argument("--out", required=True, help="output directory")
    plot.add_argument("--format", choices=("png", "svg"), default="png")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        written = render_family(args.csv, args.out, fmt=args.format)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CsvFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
