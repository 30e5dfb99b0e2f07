"""
Run artifacts: map.json, prototypes.json, weights.json and report.json.

Floats are written with their shortest round-trip repr, so reading an
artifact back gives the same bits. Every file is written to a temporary
sibling and renamed into place.
"""

from pathlib import Path
from typing import Any

import json
import logging
import os
import tempfile

import numpy as np

from .errors import ParseError, RuntimeFailure
from .grid import KernelParams, MapGrid, Topology
from .quantile import QuantileFunction
from .registered import Prototypes
from .train import Algorithm, Assignment, TrainConfig, TrainedMap
from .validity import IndexReport
from .weights import WeightMatrix

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
MAP_FILE = "map.json"
PROTOTYPES_FILE = "prototypes.json"
WEIGHTS_FILE = "weights.json"
REPORT_FILE = "report.json"


def dump_json(obj: Any) -> str:
    return json.dumps(obj, indent=1, allow_nan=False) + "\n"


def atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(
            "w", dir=path.parent, prefix=f".{path.name}.", suffix=".tmp", delete=False, encoding="utf-8"
        ) as f:
            tmp = Path(f.name)
            f.write(text)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, path)
    except OSError as e:
        raise RuntimeFailure(f"cannot write {path}: {e}") from e


def read_json(path: Path) -> Any:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path.name}: {e.msg}", line=e.lineno) from e


def _field(d: dict[str, Any], key: str, source: str) -> Any:
    try:
        return d[key]
    except (KeyError, TypeError):
        raise ParseError(f"{source}: missing field", field=key) from None


def map_document(trained: TrainedMap) -> dict[str, Any]:
    grid = trained.grid
    config = trained.config
    return {
        "format": "dbsom-map",
        "version": FORMAT_VERSION,
        "grid": {
            "rows": grid.rows,
            "cols": grid.cols,
            "topology": grid.topology.value,
            "distance": "euclidean",
        },
        "algorithm": config.algorithm.value,
        "scheme": None if config.scheme is None else config.scheme.value,
        "standardize": config.standardize,
        "n_iter": config.n_iter,
        "t_max": trained.kernel_params.t_max,
        "t_min": trained.kernel_params.t_min,
        "seed": config.seed,
        "restart": trained.restart,
        "final_cycle_cap": config.final_cycle_cap,
        "objects": list(trained.objects),
        "variables": list(trained.variables),
        "bmu": [int(_) for _ in trained.assignment.f],
        "counts": [int(_) for _ in trained.counts()],
        "history": [float(_) for _ in trained.history],
        "final_history": [float(_) for _ in trained.final_history],
        "criterion": float(trained.criterion),
        "converged": trained.converged,
        "dispersion_clamped": trained.dispersion_clamped,
    }


def prototypes_document(trained: TrainedMap) -> dict[str, Any]:
    grid = trained.grid
    neurons = []
    for m, row in enumerate(trained.prototypes.cells()):
        r, c = divmod(m, grid.cols)
        neurons.append(
            {
                "index": m,
                "row": r,
                "col": c,
                "cells": [{"probs": q.probs.tolist(), "values": q.values.tolist()} for q in row],
            }
        )
    return {"format": "dbsom-prototypes", "version": FORMAT_VERSION, "variables": list(trained.variables), "neurons": neurons}


def weights_document(trained: TrainedMap) -> dict[str, Any]:
    w = trained.weights
    return {
        "format": "dbsom-weights",
        "version": FORMAT_VERSION,
        "scheme": w.label,
        "cluster_wise": w.cluster_wise,
        "per_component": w.per_component,
        "variables": list(trained.variables),
        "shape": list(w.values.shape),
        "values": w.values.tolist(),
    }


def write_artifacts(directory: Path | str, trained: TrainedMap, report: IndexReport | None = None) -> list[Path]:
    directory = Path(directory)
    documents = {
        MAP_FILE: map_document(trained),
        PROTOTYPES_FILE: prototypes_document(trained),
        WEIGHTS_FILE: weights_document(trained),
    }
    if report is not None:
        documents[REPORT_FILE] = report_document(report)
    written = []
    for name, doc in documents.items():
        path = directory / name
        atomic_write_text(path, dump_json(doc))
        written.append(path)
    log.info("wrote %s to %s", ", ".join(documents), directory)
    return written


def report_document(report: IndexReport) -> dict[str, Any]:
    return {"format": "dbsom-report", "version": FORMAT_VERSION, **report.to_dict()}


def write_report(directory: Path | str, report: IndexReport) -> Path:
    path = Path(directory) / REPORT_FILE
    atomic_write_text(path, dump_json(report_document(report)))
    return path


def read_trained(directory: Path | str) -> TrainedMap:
    """A TrainedMap rebuilt from the map, prototypes and weights artifacts."""
    directory = Path(directory)
    doc = read_json(directory / MAP_FILE)
    grid_doc = _field(doc, "grid", MAP_FILE)
    grid = MapGrid(
        int(_field(grid_doc, "rows", MAP_FILE)),
        int(_field(grid_doc, "cols", MAP_FILE)),
        Topology(_field(grid_doc, "topology", MAP_FILE)),
    )
    config = TrainConfig(
        algorithm=Algorithm(_field(doc, "algorithm", MAP_FILE)),
        scheme=doc.get("scheme"),
        n_iter=int(_field(doc, "n_iter", MAP_FILE)),
        t_max=float(_field(doc, "t_max", MAP_FILE)),
        t_min=float(_field(doc, "t_min", MAP_FILE)),
        seed=int(_field(doc, "seed", MAP_FILE)),
        standardize=bool(doc.get("standardize", False)),
        final_cycle_cap=int(doc.get("final_cycle_cap", 500)),
    )
    variables = tuple(_field(doc, "variables", MAP_FILE))

    proto_doc = read_json(directory / PROTOTYPES_FILE)
    neurons = sorted(_field(proto_doc, "neurons", PROTOTYPES_FILE), key=lambda n: n["index"])
    cells = [
        [
            QuantileFunction(_field(c, "probs", PROTOTYPES_FILE), _field(c, "values", PROTOTYPES_FILE))
            for c in _field(neuron, "cells", PROTOTYPES_FILE)
        ]
        for neuron in neurons
    ]
    prototypes = Prototypes.from_cells(cells)

    weights_doc = read_json(directory / WEIGHTS_FILE)
    scheme = _field(weights_doc, "scheme", WEIGHTS_FILE)
    if scheme == "none":
        weights = WeightMatrix.unit(len(variables))
    else:
        weights = WeightMatrix(scheme, np.asarray(_field(weights_doc, "values", WEIGHTS_FILE), dtype=float))

    return TrainedMap(
        grid=grid,
        prototypes=prototypes,
        weights=weights,
        assignment=Assignment(np.asarray(_field(doc, "bmu", MAP_FILE)), grid.size),
        history=tuple(_field(doc, "history", MAP_FILE)),
        final_history=tuple(doc.get("final_history", ())),
        config=config,
        kernel_params=KernelParams(config.t_max or 0.0, config.t_min or 0.0, config.n_iter),
        restart=int(doc.get("restart", 0)),
        converged=bool(doc.get("converged", True)),
        dispersion_clamped=bool(doc.get("dispersion_clamped", False)),
        objects=tuple(_field(doc, "objects", MAP_FILE)),
        variables=variables,
    )
