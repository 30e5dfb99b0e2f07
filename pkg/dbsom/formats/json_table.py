"""
Canonical JSON table:

    {"format": "dbsom-table", "version": 1,
     "variables": ["x", ...],
     "objects": [{"id": "a", "label": "k", "cells": [CELL, ...]}, ...]}

A CELL is either a histogram {"breaks": [...], "weights": [...]} or a
quantile function {"probs": [...], "values": [...]}. Tables are written in
the quantile form, which keeps every knot exactly.
"""

from pathlib import Path
from typing import Any

from dbsom.artifacts import atomic_write_text, dump_json, read_json
from dbsom.errors import ParseError
from dbsom.quantile import DistributionalTable, QuantileFunction
from dbsom.table_format import TableFormat, histogram_cell, quantile_cell

FORMAT_NAME = "dbsom-table"
FORMAT_VERSION = 1


def _cell(row: str, column: str, doc: Any) -> QuantileFunction:
    if not isinstance(doc, dict):
        raise ParseError(f"object {row!r}: cell is not an object", field=column)
    if "probs" in doc and "values" in doc:
        return quantile_cell(row, column, doc["probs"], doc["values"])
    if "breaks" in doc and "weights" in doc:
        return histogram_cell(row, column, doc["breaks"], doc["weights"])
    raise ParseError(f"object {row!r}: cell needs breaks/weights or probs/values", field=column)


class JsonTable(TableFormat):
    suffix = ".json"

    @classmethod
    def create_with_table(cls, file_path: Path, table: DistributionalTable) -> "JsonTable":
        objects = []
        for i, object_id in enumerate(table.objects):
            entry: dict[str, Any] = {"id": object_id}
            if table.labels is not None:
                entry["label"] = table.labels[i]
            entry["cells"] = [{"probs": q.probs.tolist(), "values": q.values.tolist()} for q in table.cells[i]]
            objects.append(entry)
        doc = {"format": FORMAT_NAME, "version": FORMAT_VERSION, "variables": list(table.variables), "objects": objects}
        atomic_write_text(file_path, dump_json(doc))
        return cls(file_path)

    def __init__(self, file_path: Path):
        self._file_path = Path(file_path)

    def read_table(self) -> DistributionalTable:
        doc = read_json(self._file_path)
        if not isinstance(doc, dict):
            raise ParseError("a table is a JSON object")
        if doc.get("format", FORMAT_NAME) != FORMAT_NAME:
            raise ParseError(f"not a table: format {doc.get('format')!r}", field="format")
        variables = doc.get("variables")
        entries = doc.get("objects")
        if not isinstance(variables, list) or not variables:
            raise ParseError("need a non-empty list of variables", field="variables")
        if not isinstance(entries, list) or not entries:
            raise ParseError("need a non-empty list of objects", field="objects")
        ids = []
        labels = []
        rows = []
        for entry in entries:
            if not isinstance(entry, dict) or "id" not in entry:
                raise ParseError("every object needs an id", field="id")
            object_id = str(entry["id"])
            cells = entry.get("cells")
            if not isinstance(cells, list) or len(cells) != len(variables):
                raise ParseError(f"object {object_id!r} needs {len(variables)} cells", field="cells")
            ids.append(object_id)
            labels.append(entry.get("label"))
            rows.append([_cell(object_id, str(v), c) for v, c in zip(variables, cells)])
        if len(set(ids)) != len(ids):
            raise ParseError("object ids must be unique", field="id")
        has_labels = any(label is not None for label in labels)
        if has_labels and any(label is None for label in labels):
            raise ParseError("either every object has a label or none does", field="label")
        return DistributionalTable(tuple(ids), tuple(variables), rows, tuple(labels) if has_labels else None)
