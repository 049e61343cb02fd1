"""Figure script: slowdecay-plot --kind <k> --csv <paths...> --out <path>."""

from __future__ import annotations

import argparse
import sys

from .csvdata import PlotDataError
from .render import FigureKind, PlotSpec, render

KIND_NAMES = {k.value: k for k in FigureKind}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="slowdecay-plot", description=__doc__)
    parser.add_argument("--kind", required=True, choices=sorted(KIND_NAMES))
    parser.add_argument("--csv", required=True, nargs="+")
    parser.add_argument("--out", required=True)
    parser.add_argument("--p", type=float, default=None,
                        help="nonlinearity exponent for reference lines")
    parser.add_argument("--sigma1", type=float, default=None,
                        help="quotient ceiling override")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    spec = PlotSpec(
        kind=KIND_NAMES[args.kind],
        csv_paths=tuple(args.csv),
        out_path=args.out,
        p=args.p,
        sigma1=args.sigma1,
    )
    try:
        info = render(spec)
    except (PlotDataError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    ref = "" if info.reference_exponent is None else f" reference={info.reference_exponent:g}"
    print(f"wrote {info.out_path} ({info.n_curves} curves{ref})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
