from dataclasses import dataclass
from enum import Enum
from typing import Protocol

import importlib

import numpy as np
from scipy.stats import gmean

from .errors import DataError, DimensionMismatch, IndexOutOfRange, SchemeMismatch

PRODUCT_TOLERANCE = 1e-9
# dispersions below this share of their group total are raised to it
CLAMP_RATIO = 1e-12


class Scheme(str, Enum):
    GLOBAL_VARIABLE = "P1"
    GLOBAL_COMPONENT = "P2"
    CLUSTER_VARIABLE = "P3"
    CLUSTER_COMPONENT = "P4"

    @property
    def cluster_wise(self) -> bool:
        return self in (Scheme.CLUSTER_VARIABLE, Scheme.CLUSTER_COMPONENT)

    @property
    def per_component(self) -> bool:
        return self in (Scheme.GLOBAL_COMPONENT, Scheme.CLUSTER_COMPONENT)

    @classmethod
    def parse(cls, name: "str | Scheme") -> "Scheme":
        if isinstance(name, Scheme):
            return name
        key = name.strip().upper().replace("-", "_")
        aliases = {
            "GV": cls.GLOBAL_VARIABLE,
            "GC": cls.GLOBAL_COMPONENT,
            "CV": cls.CLUSTER_VARIABLE,
            "CC": cls.CLUSTER_COMPONENT,
        }
        if key in aliases:
            return aliases[key]
        if key in cls.__members__:
            return cls[key]
        try:
            return cls(key)
        except ValueError:
            raise SchemeMismatch(f"unknown weighting scheme {name!r}") from None

    def shape(self, n_neurons: int, n_variables: int) -> tuple[int, ...]:
        shape: tuple[int, ...] = (n_variables,)
        if self.cluster_wise:
            shape = (n_neurons,) + shape
        if self.per_component:
            shape = shape + (2,)
        return shape


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    """
    Relevance weights of an adaptive distance.

    `values` has shape (P,) for P1, (P, 2) for P2, (M, P) for P3 and
    (M, P, 2) for P4; a trailing axis of 2 holds the (mean, dispersion)
    component weights. `scheme` None is the unit matrix of a plain DBSOM run.
    """

    scheme: Scheme | None
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if self.scheme is not None:
            object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        expected_ndim = 1 if self.scheme is None else len(self.scheme.shape(1, 1))
        if values.ndim != expected_ndim or (values.ndim > 1 and self.per_component and values.shape[-1] != 2):
            raise DimensionMismatch(f"weights of shape {values.shape} do not fit scheme {self.label}")
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise DataError("weights must be finite and positive")
        if self.scheme is None and np.any(values != 1):
            raise SchemeMismatch("a map without a weighting scheme has unit weights")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        defect = self.product_defect()
        if defect > PRODUCT_TOLERANCE:
            raise DataError(f"weights of scheme {self.label} violate the product constraint by {defect:g}")

    @classmethod
    def unit(cls, n_variables: int) -> "WeightMatrix":
        return cls(None, np.ones(n_variables))

    @property
    def label(self) -> str:
        return "none" if self.scheme is None else self.scheme.value

    @property
    def per_component(self) -> bool:
        return self.scheme is not None and self.scheme.per_component

    @property
    def cluster_wise(self) -> bool:
        return self.scheme is not None and self.scheme.cluster_wise

    @property
    def n_variables(self) -> int:
        return self.values.shape[1 if self.cluster_wise else 0]

    def product_defect(self) -> float:
        """Largest |log prod(lambda)| over the constraint groups."""
        logs = np.log(self.values)
        if self.cluster_wise:
            sums = logs.reshape(logs.shape[0], -1).sum(axis=1)
        else:
            sums = np.array([logs.sum()])
        return float(np.max(np.abs(sums))) if self.scheme is not None else 0.0

    def check_neuron(self, m: int, n_neurons: int | None = None) -> None:
        if not self.cluster_wise:
            return
        limit = self.values.shape[0] if n_neurons is None else n_neurons
        if not 0 <= m < limit:
            raise IndexOutOfRange(f"neuron {m} outside 0..{limit - 1}")

    def for_neuron(self, m: int, n_variables: int) -> tuple[np.ndarray, np.ndarray]:
        """(lambda_M, lambda_V) of length P that neuron `m` applies."""
        if self.n_variables != n_variables:
            raise SchemeMismatch(f"weights for {self.n_variables} variables, rows have {n_variables}")
        self.check_neuron(m)
        v = self.values[m] if self.cluster_wise else self.values
        if self.per_component:
            return v[:, 0], v[:, 1]
        return v, v

    def component_weights(self, n_neurons: int) -> tuple[np.ndarray, np.ndarray]:
        """(lambda_M, lambda_V), each M x P, broadcasting global weights over neurons."""
        v = self.values
        if self.cluster_wise and v.shape[0] != n_neurons:
            raise DimensionMismatch(f"weights for {v.shape[0]} neurons, map has {n_neurons}")
        if not self.per_component:
            v = np.stack([v, v], axis=-1)
        if not self.cluster_wise:
            v = np.broadcast_to(v, (n_neurons,) + v.shape)
        return v[..., 0], v[..., 1]


def balance(dispersions: np.ndarray) -> tuple[np.ndarray, bool]:
    """
    Product-constrained weights over the last axis: each weight is the
    geometric mean of its group's dispersions divided by its own.

    Returns the weights and whether any dispersion was clamped. A group whose
    dispersions all vanish gets unit weights and counts as clamped.
    """
    d = np.array(dispersions, dtype=float)
    total = d.sum(axis=-1, keepdims=True)
    dead = total <= 0
    floor = CLAMP_RATIO * total
    clamped = bool(np.any(dead)) or bool(np.any(d < floor))
    d = np.where(dead, 1.0, np.maximum(d, floor))
    return gmean(d, axis=-1)[..., None] / d, clamped


class WeightingScheme(Protocol):
    scheme: Scheme

    def solve(self, sm: np.ndarray, sv: np.ndarray) -> tuple[WeightMatrix, bool]:
        """
        Weights minimizing the criterion given the kernel-weighted mean and
        dispersion components `sm`, `sv` (both M x P), plus a clamp flag.
        """
        ...


def instantiate_scheme(name: "str | Scheme") -> WeightingScheme:
    """
    A scheme by name ("P1".."P4", "GV", ...) or as `module` / `module:ATTR`
    naming an object that implements `WeightingScheme`.
    """
    if isinstance(name, str) and ("." in name or ":" in name):
        if ":" in name:
            module_name, attr = name.split(":")
        else:
            module_name, attr = name, "SCHEME"
        module = importlib.import_module(module_name)
        return getattr(module, attr)
    from .schemes import BY_SCHEME

    return BY_SCHEME[Scheme.parse(name)]
