"""Command-line entry point: plots <summary.csv> --x alpha --metrics f1 --out fig.png"""

from __future__ import annotations

import argparse
import sys

from .render import CurveSpec, PlotError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plots", description=__doc__)
    parser.add_argument("csv", help="summary CSV with <metric>_mean/_std columns")
    parser.add_argument("--x", choices=["alpha", "a"], default="alpha")
    parser.add_argument("--metrics", default="f1",
                        help="comma-separated subset of precision,recall,f1")
    parser.add_argument("--out", default="fig.png")
    parser.add_argument("--title")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    try:
        spec = CurveSpec(csv_path=args.csv, x=args.x, metrics=metrics,
                         out_path=args.out, title=args.title)
        render(spec)
    except (PlotError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
