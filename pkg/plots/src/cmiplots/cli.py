"""Command line: plots <kind> --in <csv...> --out <img> [--overlay ...]"""

from __future__ import annotations

import argparse
import sys

from .csvio import CsvFormatError
from .figures import KINDS, FigureSpec, render


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="plots", description=__doc__)
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--in", dest="inputs", nargs="+", required=True,
                        help="input CSV file(s)")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--overlay", action="append", default=None,
                        choices=("lightcone", "tc", "xdec", "analytic"),
                        help="overlay toggle; repeatable (default: all)")
    parser.add_argument("--t", type=int, action="append", default=None,
                        help="decay kind: depth to draw; repeatable")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    overlays = tuple(args.overlay) if args.overlay else ("lightcone", "tc", "xdec", "analytic")
    spec = FigureSpec(
        kind=args.kind,
        inputs=list(args.inputs),
        output=args.out,
        overlays=overlays,
        t_values=tuple(args.t) if args.t else (),
    )
    try:
        render(spec)
    except (CsvFormatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
