"""Command line front end: plots <figure-kind> --in <csv...> --out <img>."""

from __future__ import annotations

import argparse
import sys

from .figures import FIGURE_KINDS, FigureSpec, render
from .reader import SchemaError


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plots",
        description="Render figures from simulation sweep and trace CSVs.")
    parser.add_argument("kind", choices=FIGURE_KINDS)
    parser.add_argument("--in", dest="inputs", nargs="+", required=True,
                        metavar="CSV", help="input CSV file(s)")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--metric", default="",
                        help="column to plot (default: se_bps_hz, or "
                             "objective for convergence)")
    parser.add_argument("--group", default="method",
                        help="grouping column for sweep figures")
    parser.add_argument("--title", default="")
    args = parser.parse_args(argv)

    try:
        spec = FigureSpec(kind=args.kind, inputs=tuple(args.inputs),
                          out_path=args.out, metric=args.metric,
                          group_by=args.group, title=args.title)
        out = render(spec)
    except (SchemaError, ValueError, OSError) as exc:
        print(f"plots: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
