import json

import pytest

from dbsom.config import RunConfig, load_config_file, resolve_config
from dbsom.errors import ConfigError
from dbsom.train import Algorithm
from dbsom.weights import Scheme


def test_defaults():
    config = resolve_config()
    assert config.restarts == 20
    assert config.algorithm == "DBSOM"
    assert config.topology == "planar"


def test_precedence(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"algorithm": "ADBSOM", "scheme": "P4", "seed": 3, "t_max": 2}))
    config = resolve_config(path, {"seed": 8, "scheme": None, "rows": 4})
    assert config.seed == 8
    assert config.scheme == "P4"
    assert config.rows == 4
    assert config.t_max == 2.0 and isinstance(config.t_max, float)


@pytest.mark.parametrize(
    "doc",
    [
        {"seeds": 3},
        {"seed": "3"},
        {"standardize": 1},
        {"rows": True},
    ],
)
def test_bad_config_file(tmp_path, doc):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(ConfigError):
        load_config_file(path)


def test_unreadable_config(tmp_path):
    with pytest.raises(ConfigError):
        load_config_file(tmp_path / "missing.json")
    path = tmp_path / "run.json"
    path.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_config_file(path)
    path.write_text("{")
    with pytest.raises(ConfigError):
        load_config_file(path)


@pytest.mark.parametrize(
    "changes",
    [
        {"input": None},
        {"output": None},
        {"topology": "spherical"},
        {"distance": "shortest-path"},
        {"rows": 4},
        {"rows": 1, "cols": 4},
        {"restarts": 0},
        {"workers": 0},
        {"t_max": 0.1, "t_min": 0.5},
        {"algorithm": "ADBSOM"},
        {"scheme": "P2"},
        {"algorithm": "ADBSOM", "scheme": "P9"},
        {"n_iter": 0},
    ],
)
def test_validate(changes):
    fields = {"input": "t.json", "output": "out", **changes}
    with pytest.raises(ConfigError):
        RunConfig(**fields).validate()


def test_train_config():
    config = RunConfig(input="t.json", output="out", algorithm="ADBSOM", scheme="cc", n_iter=7, standardize=True)
    train_config = config.validate().train_config()
    assert train_config.algorithm is Algorithm.ADBSOM
    assert train_config.scheme is Scheme.CLUSTER_COMPONENT
    assert train_config.n_iter == 7
    assert train_config.standardize
