"""Command-line entry point: JSON config or preset in, CSV/JSON-lines out.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 rejection cap exceeded.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from typing import Iterable, TextIO

from .analytic import IntegrationError
from .experiments import (
    ConfigError,
    PRESET_NAMES,
    RESULT_COLUMNS,
    ResultRow,
    preset,
    run,
    spec_from_dict,
)
from .protocols import RejectionCapError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_REJECTION = 4


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def write_csv(rows: Iterable[ResultRow], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(RESULT_COLUMNS)
    for row in rows:
        writer.writerow([_format_cell(v) for v in row.as_dict().values()])


def write_jsonl(rows: Iterable[ResultRow], stream: TextIO) -> None:
    for row in rows:
        stream.write(json.dumps(row.as_dict()) + "\n")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="osasim",
        description="Evaluate spectrum-sharing opportunity/coverage/throughput "
                    "experiments analytically and by Monte-Carlo simulation.",
    )
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", help="JSON experiment spec file")
    source.add_argument("--preset", choices=PRESET_NAMES,
                        help="named figure-data experiment")
    parser.add_argument("--out", required=True,
                        help="output path, or '-' for standard output")
    parser.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    parser.add_argument("--seed", type=int, help="override master seed")
    parser.add_argument("--trials", type=int, help="override trials per point")
    parser.add_argument("--mode", choices=("analytic", "simulate", "both"),
                        help="override evaluation mode")
    parser.add_argument("--r-sim", type=float, dest="r_sim",
                        help="override simulation window radius")
    return parser


def _load_spec(args: argparse.Namespace):
    if args.preset:
        spec = preset(args.preset)
    else:
        try:
            with open(args.config, encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        spec = spec_from_dict(doc)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.trials is not None:
        overrides["n_trials"] = args.trials
    if args.mode is not None:
        overrides["mode"] = args.mode
    if args.r_sim is not None:
        overrides["r_sim"] = args.r_sim
    return dataclasses.replace(spec, **overrides) if overrides else spec


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        spec = _load_spec(args)
        rows = run(spec)
    except ValueError as exc:
        # ConfigError and parameter validation both land here
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except RejectionCapError as exc:
        print(f"rejection cap exceeded: {exc}", file=sys.stderr)
        return EXIT_REJECTION

    writer = write_csv if args.format == "csv" else write_jsonl
    if args.out == "-":
        writer(rows, sys.stdout)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            writer(rows, fh)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
