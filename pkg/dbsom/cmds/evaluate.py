"""Recompute the index report of trained map artifacts, optionally against labels."""

from pathlib import Path
from typing import Sequence

import argparse
import logging
import sys

import pandas as pd

from dbsom.artifacts import read_trained, write_report
from dbsom.errors import ConfigError, DataError, ParseError, UnknownObjectId
from dbsom.table_format import load_table
from dbsom.validity import IndexReport, evaluate_map, label_report

log = logging.getLogger(__name__)


def load_labels(path: Path | str, objects: Sequence[str]) -> tuple[str, ...]:
    """Labels from a CSV of `id,label` rows, ordered like `objects`."""
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise ParseError(f"{path}: empty labels file") from None
    for column in ("id", "label"):
        if column not in frame.columns:
            raise ParseError(f"{path}: missing column", line=1, field=column)
    known = set(objects)
    by_id = {}
    for line, (object_id, label) in enumerate(zip(frame["id"], frame["label"]), start=2):
        if object_id not in known:
            raise UnknownObjectId(object_id)
        if object_id in by_id:
            raise ParseError(f"{path}: object {object_id!r} labelled twice", line=line, field="id")
        by_id[object_id] = label
    missing = [o for o in objects if o not in by_id]
    if missing:
        raise DataError(f"{path}: no label for {len(missing)} objects, first {missing[0]!r}")
    return tuple(by_id[o] for o in objects)


def evaluate(
    directory: Path, table_path: Path | None = None, labels_path: Path | None = None, fmt: str | None = None
) -> IndexReport:
    """
    Every index when the table is given. Without it, only the indexes
    against labels, which need nothing but the map's assignment.
    """
    if table_path is None and labels_path is None:
        raise ConfigError("evaluate needs the table (-i), labels (--labels) or both")
    trained = read_trained(directory)
    if table_path is None:
        assert labels_path is not None
        report = label_report(trained, load_labels(labels_path, trained.objects))
    else:
        table = load_table(table_path, fmt)
        labels = load_labels(labels_path, table.objects) if labels_path is not None else None
        report = evaluate_map(table, trained, labels)
    write_report(directory, report)
    log.info("wrote report for %s", directory)
    return report


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("directory", type=Path, help="Directory holding map.json, prototypes.json and weights.json.")
    parser.add_argument("-i", "--input", type=Path, help="The table the map was trained on; needed for internal indexes.")
    parser.add_argument("--format", choices=["csv", "json"], help="Table format; default from the suffix.")
    parser.add_argument("--labels", type=Path, help="CSV of id,label rows.")


def run_args(args: argparse.Namespace) -> int:
    evaluate(args.directory, args.input, args.labels, args.format)
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    from .cli import ArgumentParser, add_logging_arguments, run_verb

    parser = ArgumentParser(description=__doc__)
    add_arguments(parser)
    add_logging_arguments(parser)
    return run_verb(sys.modules[__name__], parser.parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
