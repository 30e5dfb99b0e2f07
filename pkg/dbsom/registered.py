"""
Whole columns of quantile functions registered on shared knot grids.

Every cell of a column is re-expressed on the union of the column's knots.
The refinement is exact for piecewise-linear functions, and barycenters of
registered cells stay on the same grid, so prototypes never leave it.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, NonFiniteInput
from .quantile import DistributionalTable, QuantileFunction, evaluate, integrate, merge_grids, union_grid


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class RegisteredTable:
    grids: tuple[np.ndarray, ...]
    values: tuple[np.ndarray, ...]
    means: np.ndarray

    @classmethod
    def from_table(
        cls, table: DistributionalTable, prototypes: "Prototypes | None" = None
    ) -> "RegisteredTable":
        grids = []
        values = []
        for j in range(table.n_variables):
            column = table.column(j)
            grid = union_grid(column)
            if prototypes is not None:
                grid = merge_grids(grid, prototypes.grids[j])
            grids.append(_readonly(grid))
            values.append(_readonly(np.stack([evaluate(q.probs, q.values, grid) for q in column])))
        means = np.column_stack([integrate(v, g) for g, v in zip(grids, values)])
        if not np.all(np.isfinite(means)):
            raise NonFiniteInput("table contains non-finite values")
        return cls(tuple(grids), tuple(values), _readonly(means))

    @property
    def n_objects(self) -> int:
        return self.values[0].shape[0]

    @property
    def n_variables(self) -> int:
        return len(self.grids)

    def rows(self, index: Sequence[int] | np.ndarray) -> "Prototypes":
        """The selected objects as a prototype matrix on this table's grids."""
        index = np.asarray(index)
        return Prototypes(self.grids, tuple(_readonly(v[index]) for v in self.values))

    def barycenters(self, weights: np.ndarray) -> "Prototypes":
        """
        Weighted Fréchet means, one per column of `weights` (N x M): the
        weighted average of the quantile functions, knot by knot.
        """
        if weights.shape[0] != self.n_objects:
            raise DimensionMismatch(f"{weights.shape[0]} weights for {self.n_objects} objects")
        mass = weights.sum(axis=0)
        return Prototypes(
            self.grids,
            tuple(_readonly((weights.T @ v) / mass[:, None]) for v in self.values),
        )


@dataclass(frozen=True, eq=False)
class Prototypes:
    """M x P matrix of quantile functions, stored column by column on knot grids."""

    grids: tuple[np.ndarray, ...]
    values: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if len(self.grids) != len(self.values):
            raise DimensionMismatch("one grid per variable is required")
        shapes = {v.shape[0] for v in self.values}
        if len(shapes) != 1:
            raise DimensionMismatch("every variable needs the same number of neurons")

    @classmethod
    def from_cells(cls, cells: Sequence[Sequence[QuantileFunction]]) -> "Prototypes":
        n_variables = len(cells[0])
        grids = []
        values = []
        for j in range(n_variables):
            column = [row[j] for row in cells]
            grid = union_grid(column)
            grids.append(_readonly(grid))
            values.append(_readonly(np.stack([evaluate(q.probs, q.values, grid) for q in column])))
        return cls(tuple(grids), tuple(values))

    @property
    def n_neurons(self) -> int:
        return self.values[0].shape[0]

    @property
    def n_variables(self) -> int:
        return len(self.grids)

    def cell(self, m: int, j: int) -> QuantileFunction:
        return QuantileFunction(self.grids[j], self.values[j][m])

    def cells(self) -> list[list[QuantileFunction]]:
        return [[self.cell(m, j) for j in range(self.n_variables)] for m in range(self.n_neurons)]

    def means(self) -> np.ndarray:
        return np.column_stack([integrate(v, g) for g, v in zip(self.grids, self.values)])

    def column_on(self, j: int, grid: np.ndarray) -> np.ndarray:
        """Column `j` re-expressed on `grid`, which must contain its knots for exactness."""
        own = self.grids[j]
        if len(own) == len(grid) and np.array_equal(own, grid):
            return self.values[j]
        return evaluate(own, self.values[j], grid)
