"""Train a map on a distributional table and write its artifacts."""

from pathlib import Path
from typing import Sequence

import argparse
import logging
import sys

from dbsom.artifacts import write_artifacts
from dbsom.config import RunConfig, resolve_config
from dbsom.grid import build_grid, suggest_map_size
from dbsom.svg import write_svgs
from dbsom.table_format import load_table
from dbsom.train import multi_restart
from dbsom.validity import evaluate_map

from .evaluate import load_labels

log = logging.getLogger(__name__)


def run(config: RunConfig) -> int:
    config.validate()
    assert config.input is not None and config.output is not None
    table = load_table(config.input, config.format)
    if config.labels is not None:
        table = table.with_labels(load_labels(config.labels, table.objects))
    if config.rows is None or config.cols is None:
        rows, cols = suggest_map_size(table.n_objects)
        log.info("map size %dx%d for %d objects", rows, cols, table.n_objects)
    else:
        rows, cols = config.rows, config.cols
    grid = build_grid(rows, cols, config.topology)
    trained = multi_restart(table, grid, config.train_config(), config.restarts, config.workers)
    report = evaluate_map(table, trained)
    output = Path(config.output)
    write_artifacts(output, trained, report)
    if config.svg:
        write_svgs(output, trained)
    return 0


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON file of RunConfig fields; flags override it.")
    parser.add_argument("-i", "--input", help="Table to train on (json or csv).")
    parser.add_argument("-o", "--output", help="Directory for the artifacts.")
    parser.add_argument("--format", choices=["csv", "json"], help="Table format; default from the suffix.")
    parser.add_argument("--labels", help="CSV of id,label rows for the external indexes.")
    parser.add_argument("--algorithm", choices=["DBSOM", "ADBSOM"])
    parser.add_argument("--scheme", choices=["P1", "P2", "P3", "P4"], help="Weighting scheme, ADBSOM only.")
    parser.add_argument("--standardize", action="store_true", default=None, help="Standardize variables first.")
    parser.add_argument("--rows", type=int)
    parser.add_argument("--cols", type=int)
    parser.add_argument("--topology", choices=["planar", "toroidal"])
    parser.add_argument("--distance", choices=["euclidean"], help="Topological distance between neurons.")
    parser.add_argument("--n-iter", type=int, dest="n_iter")
    parser.add_argument("--t-max", type=float, dest="t_max")
    parser.add_argument("--t-min", type=float, dest="t_min")
    parser.add_argument("--restarts", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int, help="Processes to run restarts in.")
    parser.add_argument("--final-cycle-cap", type=int, dest="final_cycle_cap")
    parser.add_argument("--svg", action="store_true", default=None, help="Also render SVG hex maps.")


OVERRIDES = (
    "input", "output", "format", "labels", "algorithm", "scheme", "standardize", "rows", "cols",
    "topology", "distance", "n_iter", "t_max", "t_min", "restarts", "seed", "workers",
    "final_cycle_cap", "svg",
)


def run_args(args: argparse.Namespace) -> int:
    overrides = {key: getattr(args, key) for key in OVERRIDES}
    return run(resolve_config(args.config, overrides))


def main(argv: Sequence[str] | None = None) -> int:
    from .cli import ArgumentParser, add_logging_arguments, run_verb

    parser = ArgumentParser(description=__doc__)
    add_arguments(parser)
    add_logging_arguments(parser)
    return run_verb(sys.modules[__name__], parser.parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
