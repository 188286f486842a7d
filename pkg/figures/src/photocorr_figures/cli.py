"""``figures render <spec.json>``: batch-render harness outputs."""

from __future__ import annotations

import argparse
import sys

from .render import render
from .spec import FigureError, FigureSpec


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="figures", description="Render photocorr harness CSVs into figures."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one figure spec")
    p.add_argument("spec", help="figure spec JSON file")
    args = parser.parse_args(argv)

    try:
        info = render(FigureSpec.from_json(args.spec))
    except (FigureError, FileNotFoundError) as exc:
        print(f"figure error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {info.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
