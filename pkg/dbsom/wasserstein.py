"""
Exact L2 Wasserstein distances between piecewise-linear quantile functions.

The squared distance splits into a mean part dM = (mean(a) - mean(b))^2 and
a dispersion part dV, the squared distance between the centered functions.
"""

from dataclasses import dataclass
from typing import Sequence

import math

import numpy as np
import scipy.sparse

from .errors import DataError, DimensionMismatch, ZeroKernelMass
from .grid import MapGrid, kernel
from .quantile import QuantileFunction, evaluate, integrate_square, mean, merge_grids, register, union_grid
from .registered import Prototypes, RegisteredTable
from .weights import WeightMatrix

# elements per N x M x K block of the component tensor
CHUNK_ELEMENTS = 1 << 22


@dataclass(frozen=True)
class DistanceComponents:
    dM: float
    dV: float

    @property
    def total(self) -> float:
        return self.dM + self.dV


def w2_squared(a: QuantileFunction, b: QuantileFunction) -> float:
    a, b = register(a, b)
    return float(integrate_square(a.values - b.values, a.probs))


def decompose(a: QuantileFunction, b: QuantileFunction) -> DistanceComponents:
    a, b = register(a, b)
    shift = mean(a) - mean(b)
    dv = float(integrate_square(a.values - b.values - shift, a.probs))
    return DistanceComponents(shift * shift, max(dv, 0.0))


def _check_rows(yi: Sequence[QuantileFunction], gm: Sequence[QuantileFunction]) -> None:
    if len(yi) != len(gm):
        raise DimensionMismatch(f"rows of {len(yi)} and {len(gm)} variables")


def mv_w2_squared(yi: Sequence[QuantileFunction], gm: Sequence[QuantileFunction]) -> float:
    _check_rows(yi, gm)
    return math.fsum(w2_squared(a, b) for a, b in zip(yi, gm))


def adaptive_distance(
    yi: Sequence[QuantileFunction], gm: Sequence[QuantileFunction], weights: WeightMatrix, m: int
) -> float:
    """
    Weighted squared distance with the relevance weights neuron `m` applies.
    Global schemes ignore `m`.
    """
    _check_rows(yi, gm)
    lam_m, lam_v = weights.for_neuron(m, len(yi))
    total = 0.0
    for j, (a, b) in enumerate(zip(yi, gm)):
        c = decompose(a, b)
        total += lam_m[j] * c.dM + lam_v[j] * c.dV
    return total


def generalized_distance(
    yi: Sequence[QuantileFunction],
    m: int,
    prototypes: Prototypes,
    grid: MapGrid,
    radius: float,
    weights: WeightMatrix | None = None,
) -> float:
    """Kernel-weighted sum over every neuron h of the distance from `yi` to g_h, centred on neuron `m`."""
    if prototypes.n_neurons != grid.size:
        raise DimensionMismatch(f"{prototypes.n_neurons} prototypes for a map of {grid.size} neurons")
    grid._check_index(m)
    k = kernel(grid.distance_matrix()[m], radius)
    total = 0.0
    for h in range(grid.size):
        gh = [prototypes.cell(h, j) for j in range(prototypes.n_variables)]
        if weights is None:
            d = mv_w2_squared(yi, gh)
        else:
            d = adaptive_distance(yi, gh, weights, h)
        total += k[h] * d
    return total


def barycenter(qfs: Sequence[QuantileFunction], weights: Sequence[float] | np.ndarray | None = None) -> QuantileFunction:
    """
    Weighted Fréchet mean under the L2 Wasserstein distance: the weighted
    average of the quantile functions on their union knot grid.
    """
    if len(qfs) == 0:
        raise DimensionMismatch("barycenter of no distributions")
    w = np.ones(len(qfs)) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (len(qfs),):
        raise DimensionMismatch(f"{w.size} weights for {len(qfs)} distributions")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise DataError("barycenter weights must be finite and non-negative")
    mass = w.sum()
    if not mass > 0:
        raise ZeroKernelMass("barycenter weights sum to zero")
    grid = union_grid(qfs)
    values = np.stack([evaluate(q.probs, q.values, grid) for q in qfs])
    return QuantileFunction(grid, w @ values / mass)


def component_tensor(table: RegisteredTable, prototypes: Prototypes) -> tuple[np.ndarray, np.ndarray]:
    """(dM, dV) between every object and every prototype, each N x M x P."""
    if prototypes.n_variables != table.n_variables:
        raise DimensionMismatch(
            f"prototypes have {prototypes.n_variables} variables, table has {table.n_variables}"
        )
    n, m, p = table.n_objects, prototypes.n_neurons, table.n_variables
    dm = np.empty((n, m, p))
    dv = np.empty((n, m, p))
    proto_means = prototypes.means()
    for j in range(p):
        grid = table.grids[j]
        y = table.values[j]
        own = prototypes.grids[j]
        if not (len(own) == len(grid) and np.array_equal(own, grid)):
            merged = merge_grids(grid, own)
            if len(merged) != len(grid):
                y = evaluate(grid, y, merged)
                grid = merged
        g = prototypes.column_on(j, grid)
        shift = table.means[:, j][:, None] - proto_means[:, j][None, :]
        dm[:, :, j] = shift * shift
        step = max(1, CHUNK_ELEMENTS // max(1, m * len(grid)))
        for lo in range(0, n, step):
            hi = min(n, lo + step)
            diff = y[lo:hi, None, :] - g[None, :, :] - shift[lo:hi, :, None]
            dv[lo:hi, :, j] = integrate_square(diff, grid)
    np.maximum(dv, 0.0, out=dv)
    return dm, dv


def _mass_matrix(grid: np.ndarray) -> scipy.sparse.csr_matrix:
    """Gram matrix of the hat functions on `grid`: f @ B @ g is the integral of f*g."""
    dp = np.diff(grid)
    main = np.concatenate([dp, [0.0]]) + np.concatenate([[0.0], dp])
    return scipy.sparse.diags([dp / 6.0, main / 3.0, dp / 6.0], [-1, 0, 1], format="csr")


def pairwise_components(table: RegisteredTable) -> tuple[np.ndarray, np.ndarray]:
    """(dM, dV) between every pair of objects, each N x N x P, zero on the diagonal."""
    n, p = table.n_objects, table.n_variables
    dm = np.empty((n, n, p))
    dv = np.empty((n, n, p))
    for j in range(p):
        mu = table.means[:, j]
        centered = table.values[j] - mu[:, None]
        gram = centered @ (_mass_matrix(table.grids[j]) @ centered.T)
        sq = np.diag(gram)
        d = sq[:, None] + sq[None, :] - 2.0 * gram
        np.maximum(d, 0.0, out=d)
        np.fill_diagonal(d, 0.0)
        dv[:, :, j] = d
        dm[:, :, j] = (mu[:, None] - mu[None, :]) ** 2
    return dm, dv


def weighted_distances(dm: np.ndarray, dv: np.ndarray, weights: WeightMatrix | None = None) -> np.ndarray:
    """
    Collapse (dM, dV) tensors of shape N x M x P to N x M distances. For
    cluster-wise weights, column m uses neuron m's weights.
    """
    if weights is None:
        return (dm + dv).sum(axis=-1)
    if weights.n_variables != dm.shape[-1]:
        raise DimensionMismatch(f"weights for {weights.n_variables} variables, tensor has {dm.shape[-1]}")
    lam_m, lam_v = weights.component_weights(dm.shape[1])
    return (dm * lam_m[None] + dv * lam_v[None]).sum(axis=-1)
