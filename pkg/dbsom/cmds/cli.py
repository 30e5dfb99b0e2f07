from typing import NoReturn, Sequence

import argparse
import logging
import sys

from dbsom.errors import ConfigError, DataError, RuntimeFailure

from . import evaluate, export_svg, ingest, train

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3

VERBS = {
    "ingest": ingest,
    "train": train,
    "evaluate": evaluate,
    "export-svg": export_svg,
}


class ArgumentParser(argparse.ArgumentParser):
    """argparse, with usage errors exiting 1."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def add_logging_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("-v", "--verbose", action="count", default=0, help="More logging; repeat for debug.")
    parser.add_argument("-q", "--quiet", action="store_true", help="Only log errors.")


def configure_logging(verbose: int = 0, quiet: bool = False) -> None:
    if quiet:
        level = logging.ERROR
    elif verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr, force=True)
    logging.captureWarnings(True)


def run_verb(handler: "object", args: argparse.Namespace) -> int:
    configure_logging(args.verbose, args.quiet)
    try:
        return handler.run_args(args)  # type: ignore[attr-defined]
    except ConfigError as e:
        log.error("%s", e)
        return EXIT_USAGE
    except DataError as e:
        log.error("%s", e)
        return EXIT_DATA
    except (RuntimeFailure, OSError) as e:
        log.error("%s", e)
        return EXIT_RUNTIME
    except Exception:
        log.exception("unexpected failure")
        return EXIT_RUNTIME


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="dbsom", description="Self-organizing maps for distributional data.")
    subparsers = parser.add_subparsers(dest="verb", required=True)
    for name, module in VERBS.items():
        sub = subparsers.add_parser(name, help=module.__doc__.strip().splitlines()[0] if module.__doc__ else None)
        module.add_arguments(sub)
        add_logging_arguments(sub)
        sub.set_defaults(handler=module)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return run_verb(args.handler, args)


if __name__ == "__main__":
    sys.exit(main())
