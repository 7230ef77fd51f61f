"""Command line entry point for rendering figures from result tables."""

from __future__ import annotations

import argparse
import sys

from .render import render
from .spec import load_spec

EXIT_OK = 0
EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="osafig",
        description="Render figures from experiment result tables (CSV).",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    render_parser = subparsers.add_parser(
        "render", help="render one figure from a JSON spec")
    render_parser.add_argument(
        "--spec", required=True, help="path to a figure spec (JSON)")
    render_parser.add_argument(
        "--out", default=None,
        help="output image path, overriding the spec's output field")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = load_spec(args.spec)
        written = render(spec, out=args.out)
    except (ValueError, OSError) as exc:
        # FigureError is a ValueError; savefig failures surface as OSError.
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(written)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
