"""Convert a CSV table or long-format raw samples into a JSON table."""

from pathlib import Path
from typing import Sequence

import argparse
import logging
import sys

from dbsom.samples import aggregate_samples
from dbsom.table_format import load_table, write_table

log = logging.getLogger(__name__)


def ingest(
    input_path: Path,
    output_path: Path,
    fmt: str | None = None,
    window: int | None = None,
    bins: int = 10,
    label_column: str | None = None,
) -> dict[str, int]:
    """Write the table at `output_path`; returns the dropped sample tails per object."""
    dropped: dict[str, int] = {}
    if window is not None:
        aggregation = aggregate_samples(input_path, window, bins, label_column)
        table = aggregation.table
        dropped = aggregation.dropped
    else:
        table = load_table(input_path, fmt)
    write_table(output_path, table, "json")
    log.info("wrote %d objects x %d variables to %s", table.n_objects, table.n_variables, output_path)
    if dropped:
        log.warning("dropped partial windows of %d objects (%d measurements)", len(dropped), sum(dropped.values()))
    return dropped


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("input", type=Path, help="Table (csv or json), or raw samples with --window.")
    parser.add_argument("-o", "--output", type=Path, required=True, help="JSON table to write.")
    parser.add_argument("--format", choices=["csv", "json"], help="Input table format; default from the suffix.")
    parser.add_argument("--window", type=int, help="Aggregate long-format samples in windows of this many measurements.")
    parser.add_argument("--bins", type=int, default=10, help="Equi-depth bins per window.")
    parser.add_argument("--label-column", help="Column of the samples file holding object labels.")


def run_args(args: argparse.Namespace) -> int:
    ingest(args.input, args.output, args.format, args.window, args.bins, args.label_column)
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    from .cli import ArgumentParser, add_logging_arguments, run_verb

    parser = ArgumentParser(description=__doc__)
    add_arguments(parser)
    add_logging_arguments(parser)
    return run_verb(sys.modules[__name__], parser.parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
