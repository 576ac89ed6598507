"""Command line front end.

    plot curves report.json -o curves.png [--task pd] [--dump-points]
    plot lhgrid report.json -o grid.png [--task lh2d] [--half-width 7] [--dump-points]

--dump-points prints the exact numbers being drawn as JSON on stdout, which
is the supported way to diff figures.
"""

from __future__ import annotations

import argparse
import sys

from . import curves, lhgrid
from .report import ReportError, load_report


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot", description="Render sweep-report figures.")
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("curves", help="expected-best-of-k reward curves")
    c.add_argument("report", help="sweep report JSON")
    c.add_argument("-o", "--out", default="curves.png", help="output image")
    c.add_argument("--task", help="task id (needed when the report has several)")
    c.add_argument("--dump-points", action="store_true",
                   help="print the plotted numbers as JSON")

    g = sub.add_parser("lhgrid", help="lighthouse episode-length grid")
    g.add_argument("report", help="sweep report JSON")
    g.add_argument("-o", "--out", default="lhgrid.png", help="output image")
    g.add_argument("--task", help="task id (needed when the report has several)")
    g.add_argument("--half-width", type=int, default=None,
                   help="board half-width for the reference lines "
                        "(default: the report's task params)")
    g.add_argument("--dump-points", action="store_true",
                   help="print the plotted numbers as JSON")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report = load_report(args.report)
        if args.command == "curves":
            if args.dump_points:
                sys.stdout.write(curves.dump_text(
                    curves.curve_points(report, args.task)))
            curves.plot_expected_max(report, args.out, args.task)
        else:
            if args.dump_points:
                sys.stdout.write(lhgrid.dump_text(
                    lhgrid.grid_points(report, args.task, args.half_width)))
            lhgrid.plot_lighthouse_grid(report, args.out, args.task,
                                        args.half_width)
    except (ReportError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(args.out, file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
