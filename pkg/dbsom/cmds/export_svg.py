"""Render counts.svg and the relevance weight maps of trained map artifacts."""

from pathlib import Path
from typing import Sequence

import argparse
import logging
import sys

from dbsom.artifacts import read_trained
from dbsom.svg import write_svgs

log = logging.getLogger(__name__)


def export_svg(directory: Path, output: Path | None = None) -> list[Path]:
    trained = read_trained(directory)
    written = write_svgs(output or directory, trained)
    log.info("wrote %d maps to %s", len(written), output or directory)
    return written


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("directory", type=Path, help="Directory holding the map artifacts.")
    parser.add_argument("-o", "--output", type=Path, help="Where to write the SVG files; default the artifact directory.")


def run_args(args: argparse.Namespace) -> int:
    export_svg(args.directory, args.output)
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    from .cli import ArgumentParser, add_logging_arguments, run_verb

    parser = ArgumentParser(description=__doc__)
    add_arguments(parser)
    add_logging_arguments(parser)
    return run_verb(sys.modules[__name__], parser.parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
