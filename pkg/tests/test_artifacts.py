import json
from pathlib import Path

import jsonschema
import numpy as np
import pytest

import dbsom
from dbsom.artifacts import (
    MAP_FILE,
    PROTOTYPES_FILE,
    REPORT_FILE,
    WEIGHTS_FILE,
    read_trained,
    write_artifacts,
)
from dbsom.errors import ParseError
from dbsom.grid import build_grid
from dbsom.train import TrainConfig, train
from dbsom.validity import evaluate_map

from factories import random_table

SCHEMAS = Path(dbsom.__file__).parent / "schema_files"


def _trained(rng, scheme="P4", topology="planar"):
    table = random_table(rng, 18, 2, clusters=3).with_labels(["a", "b", "c"] * 6)
    config = TrainConfig(algorithm="ADBSOM", scheme=scheme, n_iter=4, seed=2)
    return table, train(table, build_grid(2, 2, topology), config)


@pytest.mark.parametrize("scheme", ["P1", "P2", "P3", "P4"])
def test_artifacts_match_schemas(tmp_path, rng, scheme):
    table, trained = _trained(rng, scheme)
    write_artifacts(tmp_path, trained, evaluate_map(table, trained))
    for name, schema in [
        (MAP_FILE, "map"),
        (PROTOTYPES_FILE, "prototypes"),
        (WEIGHTS_FILE, "weights"),
        (REPORT_FILE, "report"),
    ]:
        doc = json.loads((tmp_path / name).read_text())
        jsonschema.validate(doc, json.loads((SCHEMAS / f"{schema}.schema.json").read_text()))


def test_map_document(tmp_path, rng):
    _, trained = _trained(rng)
    write_artifacts(tmp_path, trained)
    doc = json.loads((tmp_path / MAP_FILE).read_text())
    assert doc["grid"] == {"rows": 2, "cols": 2, "topology": "planar", "distance": "euclidean"}
    assert doc["bmu"] == trained.assignment.f.tolist()
    assert sum(doc["counts"]) == 18
    assert len(doc["history"]) == 4
    assert doc["criterion"] == trained.criterion
    assert not (tmp_path / REPORT_FILE).exists()


def test_read_trained_is_exact(tmp_path, rng):
    _, trained = _trained(rng, "P3", "toroidal")
    write_artifacts(tmp_path, trained)
    back = read_trained(tmp_path)
    assert back.grid.topology == trained.grid.topology
    assert np.array_equal(back.assignment.f, trained.assignment.f)
    assert np.array_equal(back.weights.values, trained.weights.values)
    assert back.weights.scheme is trained.weights.scheme
    for a, b in zip(trained.prototypes.cells(), back.prototypes.cells()):
        for qa, qb in zip(a, b):
            assert np.array_equal(qa.values, qb.values)
    assert back.history == trained.history
    assert back.variables == trained.variables


def test_dbsom_weights_are_unit(tmp_path, rng):
    table = random_table(rng, 8, 2)
    trained = train(table, build_grid(2, 2), TrainConfig(n_iter=2))
    write_artifacts(tmp_path, trained)
    doc = json.loads((tmp_path / WEIGHTS_FILE).read_text())
    assert doc["scheme"] == "none"
    assert doc["values"] == [1.0, 1.0]
    assert read_trained(tmp_path).weights.scheme is None


def test_artifacts_are_deterministic(tmp_path, rng):
    table = random_table(rng, 18, 2, clusters=3)
    config = TrainConfig(algorithm="ADBSOM", scheme="P2", n_iter=4, seed=9)
    for name in ("a", "b"):
        write_artifacts(tmp_path / name, train(table, build_grid(2, 2), config))
    for name in (MAP_FILE, PROTOTYPES_FILE, WEIGHTS_FILE):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_report_document(tmp_path, rng):
    table, trained = _trained(rng)
    report = evaluate_map(table, trained)
    write_artifacts(tmp_path, trained, report)
    back = json.loads((tmp_path / REPORT_FILE).read_text())
    assert back["purity"] == report.purity
    assert back["silhouette_topo_skipped"] == report.silhouette_topo_skipped


def test_broken_artifacts(tmp_path, rng):
    _, trained = _trained(rng)
    write_artifacts(tmp_path, trained)
    (tmp_path / MAP_FILE).write_text("{")
    with pytest.raises(ParseError):
        read_trained(tmp_path)
    (tmp_path / MAP_FILE).write_text("{}")
    with pytest.raises(ParseError):
        read_trained(tmp_path)
    # no temporary files left behind
    assert not list(tmp_path.glob(".*.tmp"))
