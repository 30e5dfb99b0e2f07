from dataclasses import dataclass, field
from typing import Iterable, Sequence

import logging
import math

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptySample,
    InvalidQuantileFunction,
    LengthMismatch,
    NonFiniteInput,
    NonMonotoneBreaks,
    WeightsNotNormalized,
    ZeroDispersion,
)

log = logging.getLogger(__name__)

WEIGHT_SUM_TOLERANCE = 1e-12
# averaging monotone functions can leave sub-ulp decreases behind
MONOTONE_SLACK = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class QuantileFunction:
    """
    Piecewise-linear quantile function through the knots (probs, values).

    probs run non-decreasing from 0 to 1 and values are non-decreasing. A
    probability may appear twice, strictly inside (0, 1): the pair of knots
    is a jump of the function across an interval holding no mass. A constant
    `values` array is a Dirac distribution.
    """

    probs: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        probs = np.array(self.probs, dtype=float)
        values = np.array(self.values, dtype=float)
        if probs.ndim != 1 or probs.shape != values.shape:
            raise InvalidQuantileFunction("probs and values must be 1-d and of equal length")
        if len(probs) < 2:
            raise InvalidQuantileFunction("at least 2 knots are required")
        if not (np.all(np.isfinite(probs)) and np.all(np.isfinite(values))):
            raise NonFiniteInput("quantile function knots must be finite")
        if abs(probs[0]) > WEIGHT_SUM_TOLERANCE or abs(probs[-1] - 1) > WEIGHT_SUM_TOLERANCE:
            raise InvalidQuantileFunction("probs must start at 0 and end at 1")
        probs[0], probs[-1] = 0.0, 1.0
        dp = np.diff(probs)
        if np.any(dp < 0):
            raise InvalidQuantileFunction("probs must be non-decreasing")
        if np.any((dp[:-1] == 0) & (dp[1:] == 0)):
            raise InvalidQuantileFunction("a probability knot may appear at most twice")
        if dp[0] == 0 or dp[-1] == 0:
            raise InvalidQuantileFunction("probs 0 and 1 may not be repeated")
        steps = np.diff(values)
        scale = max(1.0, float(np.max(np.abs(values))))
        if np.any(steps < -MONOTONE_SLACK * scale):
            raise InvalidQuantileFunction("values must be non-decreasing")
        if np.any(steps < 0):
            values = np.maximum.accumulate(values)
        object.__setattr__(self, "probs", _frozen(probs))
        object.__setattr__(self, "values", _frozen(values))

    def __call__(self, p: float | np.ndarray) -> float | np.ndarray:
        """Right-continuous evaluation: at a jump, the upper value."""
        r = evaluate(self.probs, self.values, np.atleast_1d(np.asarray(p, dtype=float)), right=True)
        if np.ndim(p) == 0:
            return float(r[0])
        return r.reshape(np.shape(p))

    def __len__(self) -> int:
        return len(self.probs)

    def __repr__(self) -> str:
        return f"QuantileFunction(knots={len(self)}, range=[{self.values[0]:g}, {self.values[-1]:g}])"

    def shifted(self, c: float) -> "QuantileFunction":
        return QuantileFunction(self.probs, self.values + c)

    def scaled(self, c: float) -> "QuantileFunction":
        if c < 0:
            # a negative scale mirrors the distribution: Q(p) -> c*Q(1-p)
            return QuantileFunction(1 - self.probs[::-1], c * self.values[::-1])
        return QuantileFunction(self.probs, c * self.values)

    def to_histogram(self) -> "HistogramSpec":
        """
        Histogram whose bins are the segments of this quantile function. A
        jump becomes an empty bin.
        """
        dp = np.diff(self.probs)
        dv = np.diff(self.values)
        redundant = np.flatnonzero((dp == 0) & (dv == 0)) + 1
        probs = np.delete(self.probs, redundant)
        values = np.delete(self.values, redundant)
        if np.any(np.diff(values) <= 0):
            raise NonMonotoneBreaks("flat segments have no histogram rendering")
        return HistogramSpec(values, np.diff(probs))


@dataclass(frozen=True, eq=False)
class HistogramSpec:
    breaks: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        breaks = np.array(self.breaks, dtype=float)
        weights = np.array(self.weights, dtype=float)
        if breaks.ndim != 1 or weights.ndim != 1 or len(breaks) != len(weights) + 1:
            raise DimensionMismatch(
                f"a histogram with {len(weights)} bins needs {len(weights) + 1} breaks, got {len(breaks)}"
            )
        if len(weights) == 0:
            raise DimensionMismatch("a histogram needs at least one bin")
        if not (np.all(np.isfinite(breaks)) and np.all(np.isfinite(weights))):
            raise NonFiniteInput("histogram breaks and weights must be finite")
        if np.any(np.diff(breaks) <= 0):
            raise NonMonotoneBreaks(f"breaks must be strictly increasing: {breaks.tolist()}")
        if np.any(weights < 0):
            raise WeightsNotNormalized(f"negative bin weight: {weights.tolist()}")
        total = math.fsum(weights)
        if abs(total - 1) > WEIGHT_SUM_TOLERANCE:
            raise WeightsNotNormalized(f"bin weights sum to {total!r}, not 1")
        object.__setattr__(self, "breaks", _frozen(breaks))
        object.__setattr__(self, "weights", _frozen(weights))


def qf_from_histogram(h: HistogramSpec) -> QuantileFunction:
    """
    Exact inverse CDF of `h`, density uniform within each bin.

    Bins whose mass does not move the cumulative weight add no knot
    interval. Leading and trailing ones are trimmed; an interior run of them
    leaves a jump, a probability knot repeated with the edges on either side
    of the gap.
    """
    cum = np.concatenate([[0.0], np.cumsum(h.weights)])
    cum[cum == cum[-1]] = 1.0
    positive = np.flatnonzero(np.diff(cum) > 0)
    probs = np.column_stack([cum[positive], cum[positive + 1]]).ravel()
    values = np.column_stack([h.breaks[positive], h.breaks[positive + 1]]).ravel()
    # a bin starting where the previous one ended shares its knot
    keep = np.ones(len(probs), dtype=bool)
    keep[2::2] = values[2::2] != values[1:-1:2]
    return QuantileFunction(probs[keep], values[keep])


def qf_from_samples(samples: Iterable[float], bins: int = 10) -> QuantileFunction:
    """
    Quantile function of the equi-depth histogram of `samples`.

    Bin edges are the empirical quantiles at k/bins (linear interpolation
    between order statistics), so every bin holds 1/bins of the mass.
    """
    data = np.asarray(samples if isinstance(samples, np.ndarray) else list(samples), dtype=float)
    if data.size == 0:
        raise EmptySample("cannot aggregate an empty sample")
    if bins < 1:
        raise DimensionMismatch(f"bins must be >= 1, got {bins}")
    if not np.all(np.isfinite(data)):
        raise NonFiniteInput("samples must be finite")
    levels = np.linspace(0.0, 1.0, bins + 1)
    edges = np.quantile(data, levels, method="linear")
    return QuantileFunction(levels, edges)


def merge_grids(*grids: np.ndarray) -> np.ndarray:
    """
    Sorted union of probability grids. A probability repeated in any grid
    (a jump) stays repeated in the union.
    """
    knots = np.unique(np.concatenate(grids))
    repeat = np.ones(len(knots), dtype=int)
    for g in grids:
        jumps = g[1:][g[1:] == g[:-1]]
        if jumps.size:
            repeat[np.searchsorted(knots, jumps)] = 2
    return np.repeat(knots, repeat)


def union_grid(qfs: Iterable[QuantileFunction]) -> np.ndarray:
    return merge_grids(*(q.probs for q in qfs))


def evaluate(probs: np.ndarray, values: np.ndarray, grid: np.ndarray, right: bool = False) -> np.ndarray:
    """
    Values (last axis) of the piecewise-linear function with knots at
    `probs`, re-expressed at the points of `grid`.

    The first of a repeated grid point takes the limit from the left and
    every other point the limit from the right, so a jump of the function
    lands on a repeated grid point. Knots are reproduced exactly.
    """
    last = len(probs) - 2
    from_left = np.zeros(len(grid), dtype=bool)
    if not right:
        from_left[:-1] = grid[:-1] == grid[1:]
    seg = np.where(
        from_left,
        np.searchsorted(probs, grid, side="left") - 1,
        np.searchsorted(probs, grid, side="right") - 1,
    )
    np.clip(seg, 0, last, out=seg)
    lo = probs[seg]
    t = np.clip((grid - lo) / (probs[seg + 1] - lo), 0.0, 1.0)
    a = values[..., seg]
    b = values[..., seg + 1]
    out = a + t * (b - a)
    # exact at both ends of a segment
    out = np.where(t == 1.0, b, out)
    return out


def register(a: QuantileFunction, b: QuantileFunction) -> tuple[QuantileFunction, QuantileFunction]:
    """Re-express `a` and `b` on the union of their knots (pure refinement)."""
    if len(a.probs) == len(b.probs) and np.array_equal(a.probs, b.probs):
        return a, b
    grid = merge_grids(a.probs, b.probs)
    return (
        QuantileFunction(grid, evaluate(a.probs, a.values, grid)),
        QuantileFunction(grid, evaluate(b.probs, b.values, grid)),
    )


def integrate_square(values: np.ndarray, probs: np.ndarray) -> np.ndarray:
    """
    Exact integral over [0, 1] of the square of the piecewise-linear function
    with knot `values` (last axis) at `probs`.
    """
    dp = np.diff(probs)
    lo = values[..., :-1]
    hi = values[..., 1:]
    return ((lo * lo + lo * hi + hi * hi) * dp).sum(axis=-1) / 3.0


def integrate(values: np.ndarray, probs: np.ndarray) -> np.ndarray:
    dp = np.diff(probs)
    return ((values[..., :-1] + values[..., 1:]) * dp).sum(axis=-1) / 2.0


def mean(q: QuantileFunction) -> float:
    return float(integrate(q.values, q.probs))


def center(q: QuantileFunction) -> QuantileFunction:
    return q.shifted(-mean(q))


@dataclass(frozen=True, eq=False)
class DistributionalTable:
    """N objects by P distributional variables, optionally labelled."""

    objects: tuple[str, ...]
    variables: tuple[str, ...]
    cells: tuple[tuple[QuantileFunction, ...], ...]
    labels: tuple[str, ...] | None = field(default=None)

    def __post_init__(self) -> None:
        object.__setattr__(self, "objects", tuple(str(_) for _ in self.objects))
        object.__setattr__(self, "variables", tuple(str(_) for _ in self.variables))
        object.__setattr__(self, "cells", tuple(tuple(row) for row in self.cells))
        if len(self.cells) != len(self.objects):
            raise DimensionMismatch(f"{len(self.objects)} objects but {len(self.cells)} rows")
        for object_id, row in zip(self.objects, self.cells):
            if len(row) != len(self.variables):
                raise DimensionMismatch(
                    f"object {object_id!r} has {len(row)} cells, expected {len(self.variables)}"
                )
            for cell in row:
                if not isinstance(cell, QuantileFunction):
                    raise InvalidQuantileFunction(f"object {object_id!r} has a non-quantile cell")
        if self.labels is not None:
            labels = tuple(str(_) for _ in self.labels)
            if len(labels) != len(self.objects):
                raise LengthMismatch(f"{len(labels)} labels for {len(self.objects)} objects")
            object.__setattr__(self, "labels", labels)

    @property
    def n_objects(self) -> int:
        return len(self.objects)

    @property
    def n_variables(self) -> int:
        return len(self.variables)

    def column(self, j: int) -> list[QuantileFunction]:
        return [row[j] for row in self.cells]

    def with_cells(self, cells: Sequence[Sequence[QuantileFunction]]) -> "DistributionalTable":
        return DistributionalTable(self.objects, self.variables, tuple(tuple(r) for r in cells), self.labels)

    def with_labels(self, labels: Sequence[str] | None) -> "DistributionalTable":
        return DistributionalTable(self.objects, self.variables, self.cells, None if labels is None else tuple(labels))


def column_values(qfs: Sequence[QuantileFunction]) -> tuple[np.ndarray, np.ndarray]:
    """Register a list of quantile functions on their union grid: (probs, N x K values)."""
    grid = union_grid(qfs)
    return grid, np.stack([evaluate(q.probs, q.values, grid) for q in qfs])


def variable_std(table: DistributionalTable, j: int) -> float:
    """
    Fréchet standard deviation of column `j` under the squared L2 Wasserstein
    distance: the root mean squared distance to the column barycenter.
    """
    std, flat = _column_std(table, j)
    if flat:
        log.warning("variable %r has zero dispersion", table.variables[j])
    return std


def _column_std(table: DistributionalTable, j: int) -> tuple[float, bool]:
    if not 0 <= j < table.n_variables:
        raise DimensionMismatch(f"variable index {j} out of range")
    grid, values = column_values(table.column(j))
    barycenter = values.mean(axis=0)
    std = math.sqrt(float(integrate_square(values - barycenter, grid).mean()))
    return std, std <= 1e-12 * max(1.0, float(np.max(np.abs(values))))


def standardize(table: DistributionalTable) -> DistributionalTable:
    """Divide every cell of each column by that column's Fréchet standard deviation."""
    stds = []
    flat = []
    for j, name in enumerate(table.variables):
        std, is_flat = _column_std(table, j)
        if is_flat:
            flat.append(name)
        stds.append(std)
    if flat:
        raise ZeroDispersion(flat)
    cells = [[cell.scaled(1.0 / stds[j]) for j, cell in enumerate(row)] for row in table.cells]
    return table.with_cells(cells)
