from abc import ABC, abstractmethod
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Sequence

from .errors import (
    DataError,
    DimensionMismatch,
    InvariantViolation,
    NonFiniteInput,
    NonMonotoneBreaks,
    ParseError,
    WeightsNotNormalized,
)
from .quantile import DistributionalTable, HistogramSpec, QuantileFunction, qf_from_histogram


class TableFormat(ABC):
    """A file holding one distributional table."""

    suffix: str

    @classmethod
    @abstractmethod
    def create_with_table(cls, file_path: Path, table: DistributionalTable) -> "TableFormat": ...

    @abstractmethod
    def __init__(self, file_path: Path): ...

    @abstractmethod
    def read_table(self) -> DistributionalTable: ...


# histogram errors keep their class; anything else a cell breaks is an InvariantViolation
_LOCATED = (NonMonotoneBreaks, WeightsNotNormalized, NonFiniteInput, DimensionMismatch)


@contextmanager
def located(row: str, column: str) -> Iterator[None]:
    try:
        yield
    except _LOCATED as e:
        located_error = type(e)(f"cell ({row!r}, {column!r}): {e}")
        located_error.row = row  # type: ignore[attr-defined]
        located_error.column = column  # type: ignore[attr-defined]
        raise located_error from e
    except (ParseError, InvariantViolation):
        raise
    except DataError as e:
        raise InvariantViolation(row, column, str(e)) from e


def histogram_cell(row: str, column: str, breaks: Sequence[float], weights: Sequence[float]) -> QuantileFunction:
    with located(row, column):
        return qf_from_histogram(HistogramSpec(breaks, weights))


def quantile_cell(row: str, column: str, probs: Sequence[float], values: Sequence[float]) -> QuantileFunction:
    with located(row, column):
        return QuantileFunction(probs, values)


def _formats() -> dict[str, type[TableFormat]]:
    from .formats.csv_table import CsvTable
    from .formats.json_table import JsonTable

    return {"json": JsonTable, "csv": CsvTable}


def format_for(path: Path, fmt: str | None = None) -> type[TableFormat]:
    formats = _formats()
    name = (fmt or Path(path).suffix.lstrip(".")).lower()
    if name not in formats:
        raise ParseError(f"unknown table format {name!r}; use one of {', '.join(sorted(formats))}")
    return formats[name]


def load_table(path: Path | str, fmt: str | None = None) -> DistributionalTable:
    path = Path(path)
    return format_for(path, fmt)(path).read_table()


def write_table(path: Path | str, table: DistributionalTable, fmt: str | None = None) -> None:
    path = Path(path)
    format_for(path, fmt).create_with_table(path, table)
