"""Entry point: cones-plots --spec fig3 --in <dir> --out <file.png>."""

from __future__ import annotations

import argparse
import sys

from .render import BundleError, RENDERERS, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cones-plots",
        description="Render figure analogs from benchmark CSV bundles.",
    )
    parser.add_argument("--spec", required=True, choices=sorted(RENDERERS))
    parser.add_argument("--in", dest="input_dir", required=True, help="bundle directory")
    parser.add_argument("--out", dest="output", required=True, help="output image path")
    args = parser.parse_args(argv)
    try:
        path = render(args.spec, args.input_dir, args.output)
    except BundleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
