"""Command-line entry point for figure rendering."""

from __future__ import annotations

import argparse
import json
import sys

from gaussring_figures.dataio import SchemaError
from gaussring_figures.render import KINDS, FigureSpec, render

EXIT_OK = 0
EXIT_SCHEMA = 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="gaussring-figures",
        description="Render figures from gaussring CLI export directories",
    )
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--input", required=True,
                   help="export directory written by the gaussring CLI")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--name", default="", help="output file stem")
    p.add_argument("--formats", default="png",
                   help="comma-separated list, e.g. png,svg")
    p.add_argument("--options", default="{}",
                   help="JSON dict of styling options "
                        "(k_window, bins, baseline, ...)")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        options = json.loads(args.options)
        spec = FigureSpec(
            kind=args.kind,
            input_dir=args.input,
            out_dir=args.out,
            name=args.name,
            formats=tuple(args.formats.split(",")),
            options=options,
        )
        paths = render(spec)
    except (SchemaError, json.JSONDecodeError) as exc:
        print(f"figure error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    for path in paths:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
