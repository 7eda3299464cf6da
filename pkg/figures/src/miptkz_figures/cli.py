"""``render_figs <spec.json> --out DIR`` — render one figure spec.

Exit codes: 0 on success, 2 for an invalid spec, 1 for data problems
(missing files, empty CSVs, missing columns — the message names the file).
"""

from __future__ import annotations

import argparse
import sys

from .readers import InputError
from .render import render
from .spec import SpecError, load_spec


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="render_figs",
        description="Render a FigureSpec JSON to SVG and PNG.",
    )
    ap.add_argument("spec", help="path to the figure spec JSON")
    ap.add_argument("--out", required=True, help="output directory")
    ap.add_argument("--dpi", type=int, default=150, help="PNG resolution (default 150)")
    args = ap.parse_args(argv)

    try:
        spec = load_spec(args.spec)
    except SpecError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    try:
        svg, png = render(spec, args.out, dpi=args.dpi)
    except SpecError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(svg)
    print(png)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
