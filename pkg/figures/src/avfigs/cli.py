"""Command line: avfigs render --figure fig3 --in run.csv [run2.csv ...] --out fig.png"""

import argparse
import sys

from .render import FIGURE_IDS, FigureSpec, RenderError, render


def main(argv=None):
    parser = argparse.ArgumentParser(prog="avfigs", description="render harness CSVs to figures")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one figure")
    p.add_argument("--figure", required=True, choices=FIGURE_IDS)
    p.add_argument("--in", dest="inputs", required=True, nargs="+", metavar="CSV")
    p.add_argument("--out", required=True)
    p.add_argument("--summary", default=None, help="harness summary JSON (fig3 slope annotations)")
    args = parser.parse_args(argv)
    try:
        meta = render(FigureSpec(figure=args.figure, inputs=list(args.inputs),
                                 output=args.out, summary=args.summary))
    except RenderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    for key, value in sorted(meta.items()):
        print(f"  {key}: {value}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
