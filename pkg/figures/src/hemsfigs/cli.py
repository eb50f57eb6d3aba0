"""Command-line entry point: figures <figure-id> --trace trace.csv --out fig.png"""
from __future__ import annotations

import argparse
import sys
from collections.abc import Sequence
from pathlib import Path

from .errors import FiguresError
from .render import FIGURE_IDS, FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figures",
        description="Render a figure from simulator trace/efe CSV outputs.",
    )
    parser.add_argument("figure_id", choices=FIGURE_IDS, metavar="figure-id",
                        help=f"one of: {', '.join(FIGURE_IDS)}")
    parser.add_argument("--trace", required=True, type=Path,
                        help="path to trace.csv")
    parser.add_argument("--efe", type=Path,
                        help="path to efe.csv (required by the efe figure)")
    parser.add_argument("--out", required=True, type=Path,
                        help="output image path; the suffix picks the format")
    return parser


def run_command(argv: Sequence[str]) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(
        figure_id=args.figure_id,
        trace_csv=args.trace,
        efe_csv=args.efe,
        out_path=args.out,
    )
    try:
        render(spec)
    except (FiguresError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
