"""Command line: ``insurelab-plot --figure N --in DIR --out FILE``."""

from __future__ import annotations

import argparse
import sys

from .render import FigureSpec, SchemaError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="insurelab-plot")
    parser.add_argument("--figure", type=int, required=True, choices=range(1, 7))
    parser.add_argument("--in", dest="in_dir", required=True,
                        help="directory holding the documented CSV inputs")
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    try:
        spec = FigureSpec.from_directory(args.figure, args.in_dir, args.out)
        render(spec)
    except (SchemaError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
