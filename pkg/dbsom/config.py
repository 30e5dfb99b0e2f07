from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Mapping

import json
import logging

from .errors import ConfigError, DataError
from .grid import Topology
from .train import DEFAULT_FINAL_CYCLE_CAP, DEFAULT_N_ITER, Algorithm, TrainConfig
from .weights import Scheme

log = logging.getLogger(__name__)

DEFAULT_RESTARTS = 20
TOPOLOGICAL_DISTANCES = ("euclidean",)


@dataclass(frozen=True)
class RunConfig:
    """
    Everything one `dbsom train` invocation needs. Lowest to highest
    precedence: these defaults, a JSON config file, command-line flags.
    `rows`/`cols` and `t_max`/`t_min` left as None are derived from the data
    and the map at run time.
    """

    input: str | None = None
    output: str | None = None
    format: str | None = None
    labels: str | None = None
    algorithm: str = Algorithm.DBSOM.value
    scheme: str | None = None
    standardize: bool = False
    rows: int | None = None
    cols: int | None = None
    topology: str = Topology.PLANAR.value
    distance: str = "euclidean"
    n_iter: int = DEFAULT_N_ITER
    t_max: float | None = None
    t_min: float | None = None
    restarts: int = DEFAULT_RESTARTS
    seed: int = 0
    workers: int = 1
    final_cycle_cap: int = DEFAULT_FINAL_CYCLE_CAP
    svg: bool = False

    def validate(self) -> "RunConfig":
        if self.input is None:
            raise ConfigError("an input table is required")
        if self.output is None:
            raise ConfigError("an output directory is required")
        try:
            Topology(self.topology)
        except ValueError:
            raise ConfigError(f"unknown topology {self.topology!r}") from None
        if self.distance not in TOPOLOGICAL_DISTANCES:
            raise ConfigError(f"unknown topological distance {self.distance!r}")
        if (self.rows is None) != (self.cols is None):
            raise ConfigError("give both rows and cols, or neither")
        if self.rows is not None and self.cols is not None and (self.rows < 2 or self.cols < 2):
            raise ConfigError(f"a map needs at least 2x2 neurons, got {self.rows}x{self.cols}")
        if self.restarts < 1:
            raise ConfigError(f"restarts must be >= 1, got {self.restarts}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.t_max is not None and self.t_min is not None and self.t_min > self.t_max:
            raise ConfigError(f"t_min={self.t_min} exceeds t_max={self.t_max}")
        self.train_config()
        return self

    def train_config(self) -> TrainConfig:
        try:
            return TrainConfig(
                algorithm=self.algorithm,  # type: ignore[arg-type]
                scheme=None if self.scheme is None else Scheme.parse(self.scheme),
                n_iter=self.n_iter,
                t_max=self.t_max,
                t_min=self.t_min,
                seed=self.seed,
                standardize=self.standardize,
                final_cycle_cap=self.final_cycle_cap,
            )
        except ConfigError:
            raise
        except DataError as e:
            raise ConfigError(str(e)) from e


_FIELDS = {f.name: f for f in fields(RunConfig)}
_TYPES: dict[str, tuple[type, ...]] = {
    "standardize": (bool,),
    "svg": (bool,),
    "rows": (int,),
    "cols": (int,),
    "n_iter": (int,),
    "restarts": (int,),
    "seed": (int,),
    "workers": (int,),
    "final_cycle_cap": (int,),
    "t_max": (int, float),
    "t_min": (int, float),
}


def _checked(values: Mapping[str, Any], source: str) -> dict[str, Any]:
    unknown = sorted(set(values) - set(_FIELDS))
    if unknown:
        raise ConfigError(f"{source}: unknown keys {', '.join(unknown)}")
    out = {}
    for key, value in values.items():
        if value is None:
            out[key] = None
            continue
        expected = _TYPES.get(key, (str,))
        # bool is an int; keep them apart
        if (isinstance(value, bool) and bool not in expected) or not isinstance(value, expected):
            raise ConfigError(f"{source}: {key} must be {' or '.join(t.__name__ for t in expected)}, got {value!r}")
        out[key] = float(value) if key in ("t_max", "t_min") else value
    return out


def load_config_file(path: Path | str) -> dict[str, Any]:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: line {e.lineno}: {e.msg}") from e
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: a config file is a JSON object")
    return _checked(doc, str(path))


def resolve_config(config_path: Path | str | None = None, overrides: Mapping[str, Any] | None = None) -> RunConfig:
    """Defaults, then the config file, then non-None overrides."""
    config = RunConfig()
    if config_path is not None:
        config = replace(config, **load_config_file(config_path))
        log.debug("loaded config from %s", config_path)
    if overrides:
        given = {k: v for k, v in overrides.items() if v is not None}
        config = replace(config, **_checked(given, "command line"))
    return config
