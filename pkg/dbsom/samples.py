"""
Aggregation of raw measurements into distributional tables.

Input is a long-format CSV: one or more object-id columns, then `variable`
and `value`, one measurement per line in time order. Each object's series
is cut into non-overlapping windows of `window` measurements and every
window of every variable becomes an equi-depth histogram of `bins` bins.
"""

from dataclasses import dataclass, field
from pathlib import Path

import logging

import pandas as pd

from .errors import DataError, ParseError, RaggedSeries
from .quantile import DistributionalTable, qf_from_samples

log = logging.getLogger(__name__)

VARIABLE_COLUMN = "variable"
VALUE_COLUMN = "value"
ID_SEPARATOR = "/"


@dataclass(frozen=True)
class Aggregation:
    table: DistributionalTable
    # object id -> measurements per variable left over after the last full window
    dropped: dict[str, int] = field(default_factory=dict)


def aggregate_frame(
    frame: pd.DataFrame, window: int, bins: int = 10, label_column: str | None = None
) -> Aggregation:
    if bins < 1 or window < bins:
        raise DataError(f"need window >= bins >= 1, got window={window}, bins={bins}")
    for column in (VARIABLE_COLUMN, VALUE_COLUMN):
        if column not in frame.columns:
            raise ParseError("missing column", line=1, field=column)
    if label_column is not None and label_column not in frame.columns:
        raise ParseError("missing label column", line=1, field=label_column)
    id_columns = [c for c in frame.columns if c not in (VARIABLE_COLUMN, VALUE_COLUMN, label_column)]
    if not id_columns:
        raise ParseError("need at least one object id column", line=1)
    values = pd.to_numeric(frame[VALUE_COLUMN], errors="coerce")
    if values.isna().any():
        bad = int(values.isna().to_numpy().nonzero()[0][0])
        raise ParseError(f"not a number: {frame[VALUE_COLUMN].iloc[bad]!r}", line=bad + 2, field=VALUE_COLUMN)
    frame = frame.assign(**{VALUE_COLUMN: values})

    variables = list(dict.fromkeys(frame[VARIABLE_COLUMN].astype(str)))
    objects = []
    labels = []
    rows = []
    dropped: dict[str, int] = {}
    for key, group in frame.groupby(id_columns, sort=False):
        tokens = key if isinstance(key, tuple) else (key,)
        base = ID_SEPARATOR.join(str(_) for _ in tokens)
        series = {str(v): s[VALUE_COLUMN].to_numpy() for v, s in group.groupby(VARIABLE_COLUMN, sort=False)}
        lengths = {v: len(series.get(v, ())) for v in variables}
        if len(set(lengths.values())) != 1:
            raise RaggedSeries(f"object {base!r} has series of lengths {lengths}")
        length = next(iter(lengths.values()))
        label = None
        if label_column is not None:
            distinct = group[label_column].astype(str).unique()
            if len(distinct) != 1:
                raise ParseError(f"object {base!r} has labels {list(distinct)}", field=label_column)
            label = distinct[0]
        n_windows, tail = divmod(length, window)
        if tail:
            dropped[base] = tail
            log.info("object %r: dropped a tail of %d measurements", base, tail)
        for w in range(n_windows):
            chunk = slice(w * window, (w + 1) * window)
            objects.append(f"{base}#{w}")
            labels.append(label)
            rows.append([qf_from_samples(series[v][chunk], bins) for v in variables])
    if not objects:
        raise DataError(f"no object has a full window of {window} measurements")
    table = DistributionalTable(
        tuple(objects), tuple(variables), rows, tuple(labels) if label_column is not None else None
    )
    return Aggregation(table, dropped)


def aggregate_samples(
    path: Path | str, window: int, bins: int = 10, label_column: str | None = None
) -> Aggregation:
    try:
        frame = pd.read_csv(path, dtype={VARIABLE_COLUMN: str})
    except pd.errors.ParserError as e:
        raise ParseError(str(e)) from e
    except pd.errors.EmptyDataError:
        raise ParseError("empty sample file") from None
    return aggregate_frame(frame, window, bins, label_column)
