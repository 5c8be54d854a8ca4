"""figrender: plot simulator artifacts.

    figrender render --figure fig3a --in runs/fig3a --out fig3a.png

Figure ids: fig2, fig3a, fig3c, fig3d, fig3e, fig4a, fig4b, fig5.
Exit codes: 0 success, 2 bad arguments, 3 schema/rendering failure.
"""

from __future__ import annotations

import argparse
import sys

from .figures import FIGURES, PlotJob, render
from .tables import SchemaError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="figrender", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    pr = sub.add_parser("render", help="render one figure from an artifact directory")
    pr.add_argument("--figure", required=True, choices=sorted(FIGURES))
    pr.add_argument("--in", dest="in_dir", required=True, help="artifact directory")
    pr.add_argument("--out", dest="out_file", required=True, help="output image path")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        out = render(PlotJob(figure=args.figure, in_dir=args.in_dir, out_file=args.out_file))
    except (SchemaError, ValueError, OSError) as exc:
        print(f"render failed: {exc}", file=sys.stderr)
        return 3
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
