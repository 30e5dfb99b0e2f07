"""
CSV tables: one row per object, an `id` column, an optional `label` column,
then one column per variable. A cell is `b0;b1;...;bk|w1;...;wk`: k+1 bin
breaks, then k bin weights. An empty bin stands for a jump of the quantile
function.

Only cells without flat segments have a histogram form. A Dirac cell, or one
with tied quantiles such as `qf_from_samples` gives for tied samples, cannot
be written here: `format_cell` raises InvariantViolation naming the cell.
The JSON format stores knots and takes every cell.
"""

from pathlib import Path

import pandas as pd

from dbsom.artifacts import atomic_write_text
from dbsom.errors import DataError, InvariantViolation, ParseError
from dbsom.quantile import DistributionalTable, QuantileFunction
from dbsom.table_format import TableFormat, histogram_cell

ID_COLUMN = "id"
LABEL_COLUMN = "label"


def _numbers(text: str, line: int, field: str) -> list[float]:
    try:
        return [float(_) for _ in text.split(";")]
    except ValueError:
        raise ParseError(f"not a list of numbers: {text!r}", line=line, field=field) from None


def parse_cell(text: str, row: str, column: str, line: int) -> QuantileFunction:
    parts = text.strip().split("|")
    if len(parts) != 2:
        raise ParseError(f"cell {text!r} is not breaks|weights", line=line, field=column)
    return histogram_cell(row, column, _numbers(parts[0], line, column), _numbers(parts[1], line, column))


def format_cell(q: QuantileFunction, row: str, column: str) -> str:
    try:
        h = q.to_histogram()
    except DataError as e:
        raise InvariantViolation(row, column, f"no histogram form: {e}") from e
    return ";".join(repr(float(_)) for _ in h.breaks) + "|" + ";".join(repr(float(_)) for _ in h.weights)


class CsvTable(TableFormat):
    suffix = ".csv"

    @classmethod
    def create_with_table(cls, file_path: Path, table: DistributionalTable) -> "CsvTable":
        columns: dict[str, list[str]] = {ID_COLUMN: list(table.objects)}
        if table.labels is not None:
            columns[LABEL_COLUMN] = list(table.labels)
        for j, name in enumerate(table.variables):
            columns[name] = [format_cell(row[j], oid, name) for oid, row in zip(table.objects, table.cells)]
        atomic_write_text(file_path, pd.DataFrame(columns).to_csv(index=False))
        return cls(file_path)

    def __init__(self, file_path: Path):
        self._file_path = Path(file_path)

    def read_table(self) -> DistributionalTable:
        try:
            frame = pd.read_csv(self._file_path, dtype=str, keep_default_na=False)
        except pd.errors.ParserError as e:
            raise ParseError(str(e)) from e
        except pd.errors.EmptyDataError:
            raise ParseError("empty table") from None
        if ID_COLUMN not in frame.columns:
            raise ParseError("missing id column", line=1, field=ID_COLUMN)
        variables = [c for c in frame.columns if c not in (ID_COLUMN, LABEL_COLUMN)]
        if not variables or frame.empty:
            raise ParseError("a table needs at least one variable and one object", line=1)
        if frame[ID_COLUMN].duplicated().any():
            dup = frame[ID_COLUMN][frame[ID_COLUMN].duplicated()].iloc[0]
            raise ParseError(f"duplicate object id {dup!r}", field=ID_COLUMN)
        rows = []
        for i, values in enumerate(frame.to_dict("records")):
            # header is line 1
            line = i + 2
            object_id = values[ID_COLUMN]
            rows.append([parse_cell(values[v], object_id, v, line) for v in variables])
        labels = tuple(frame[LABEL_COLUMN]) if LABEL_COLUMN in frame.columns else None
        return DistributionalTable(tuple(frame[ID_COLUMN]), tuple(variables), rows, labels)
