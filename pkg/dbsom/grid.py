from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import math

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DataError, IndexOutOfRange, NonPositiveRadius, ToroidalParity

# vertical distance between neuron rows in the hex embedding
ROW_PITCH = math.sqrt(3) / 2
ADJACENCY_TOLERANCE = 1e-9

# kernel targets for the default radii: half-diameter neurons at 0.1,
# neighbouring neurons at 0.01
HALF_DIAMETER_KERNEL = 0.1
NEIGHBOR_KERNEL = 0.01


class Topology(str, Enum):
    PLANAR = "planar"
    TOROIDAL = "toroidal"


@dataclass(frozen=True, eq=False)
class MapGrid:
    """
    Hexagonal lattice of rows x cols neurons, indexed row-major.

    Neuron (r, c) sits at (c + 0.5 * (r % 2), r * sqrt(3)/2). A toroidal grid
    wraps in both directions with period (cols, rows * sqrt(3)/2).
    """

    rows: int
    cols: int
    topology: Topology = Topology.PLANAR

    def __post_init__(self) -> None:
        object.__setattr__(self, "topology", Topology(self.topology))

    @property
    def size(self) -> int:
        return self.rows * self.cols

    @cached_property
    def positions(self) -> np.ndarray:
        r, c = np.divmod(np.arange(self.size), self.cols)
        return np.column_stack([c + 0.5 * (r % 2), r * ROW_PITCH])

    @property
    def period(self) -> tuple[float, float]:
        return float(self.cols), self.rows * ROW_PITCH

    @cached_property
    def _distances(self) -> np.ndarray:
        pos = self.positions
        if self.topology is Topology.PLANAR:
            d = cdist(pos, pos)
        else:
            width, height = self.period
            images = [
                cdist(pos, pos + np.array([dx * width, dy * height]))
                for dx in (-1, 0, 1)
                for dy in (-1, 0, 1)
            ]
            d = np.min(images, axis=0)
        # the min over images is symmetric in exact arithmetic; make it so in floats too
        d = np.minimum(d, d.T)
        np.fill_diagonal(d, 0.0)
        d.setflags(write=False)
        return d

    def distance_matrix(self) -> np.ndarray:
        return self._distances

    @cached_property
    def _adjacency(self) -> np.ndarray:
        a = self._distances <= 1 + ADJACENCY_TOLERANCE
        np.fill_diagonal(a, False)
        a.setflags(write=False)
        return a

    def adjacency_matrix(self) -> np.ndarray:
        return self._adjacency

    def neighbors(self, r: int) -> list[int]:
        self._check_index(r)
        return np.flatnonzero(self._adjacency[r]).tolist()

    def kernel_matrix(self, radius: float) -> np.ndarray:
        return kernel(self._distances, radius)

    def _check_index(self, r: int) -> None:
        if not 0 <= r < self.size:
            raise IndexOutOfRange(f"neuron {r} outside 0..{self.size - 1}")


@dataclass(frozen=True)
class KernelParams:
    t_max: float
    t_min: float
    n_iter: int

    def __post_init__(self) -> None:
        if not (self.t_max > 0 and self.t_min > 0):
            raise NonPositiveRadius(f"radii must be positive, got T_max={self.t_max}, T_min={self.t_min}")
        if self.t_min > self.t_max:
            raise DataError(f"T_min={self.t_min} exceeds T_max={self.t_max}")
        if self.n_iter < 1:
            raise DataError(f"n_iter must be >= 1, got {self.n_iter}")


def build_grid(rows: int, cols: int, topology: Topology | str = Topology.PLANAR) -> MapGrid:
    topology = Topology(topology)
    if rows < 2 or cols < 2:
        raise DataError(f"a map needs at least 2 rows and 2 cols, got {rows}x{cols}")
    if topology is Topology.TOROIDAL and (rows % 2 or cols % 2):
        raise ToroidalParity(f"a toroidal hex map needs even rows and cols, got {rows}x{cols}")
    return MapGrid(rows, cols, topology)


def neuron_distance(grid: MapGrid, r: int, m: int) -> float:
    grid._check_index(r)
    grid._check_index(m)
    return float(grid.distance_matrix()[r, m])


def adjacent(grid: MapGrid, r: int, m: int) -> bool:
    grid._check_index(r)
    grid._check_index(m)
    return bool(grid.adjacency_matrix()[r, m])


def diameter(grid: MapGrid) -> float:
    return float(grid.distance_matrix().max())


def kernel(dist: float | np.ndarray, radius: float) -> float | np.ndarray:
    """Gaussian neighbourhood kernel exp(-d^2 / (2 T^2))."""
    if not radius > 0:
        raise NonPositiveRadius(f"kernel radius must be positive, got {radius}")
    d = np.asarray(dist, dtype=float)
    if np.any(d < 0):
        raise DataError("topological distances are non-negative")
    k = np.exp(-(d * d) / (2.0 * radius * radius))
    if k.ndim == 0:
        return float(k)
    return k


def radius_schedule(t: float, params: KernelParams) -> float:
    if not 0 <= t <= params.n_iter:
        raise IndexOutOfRange(f"epoch {t} outside 0..{params.n_iter}")
    return params.t_max * (params.t_min / params.t_max) ** (t / params.n_iter)


def radii_for_diameter(d_max: float) -> tuple[float, float]:
    t_max = math.sqrt(-((0.5 * d_max) ** 2) / (2 * math.log(HALF_DIAMETER_KERNEL)))
    t_min = math.sqrt(-1.0 / (2 * math.log(NEIGHBOR_KERNEL)))
    return t_max, t_min


def default_radii(grid: MapGrid) -> tuple[float, float]:
    return radii_for_diameter(diameter(grid))


def suggest_map_size(n_objects: int) -> tuple[int, int]:
    """
    Even rows x cols map near 5 * sqrt(N) neurons, rows <= cols <= 2 * rows.

    The smallest 1:2 map covering the target wins if it overshoots by at most
    20%; otherwise the smallest covering map. Never more neurons than objects.
    """
    if n_objects < 4:
        raise DataError(f"need at least 4 objects to size a map, got {n_objects}")
    target = 5 * math.sqrt(n_objects)
    candidates = [
        (rows, cols)
        for rows in range(2, math.isqrt(n_objects) + 1, 2)
        for cols in range(rows, 2 * rows + 1, 2)
        if rows * cols <= n_objects
    ]
    covering = [(r, c) for r, c in candidates if r * c >= target]
    wide = [(r, c) for r, c in covering if c == 2 * r and r * c <= 1.2 * target]
    if wide:
        return min(wide, key=lambda rc: rc[0] * rc[1])
    if covering:
        return min(covering, key=lambda rc: (rc[0] * rc[1], -rc[1]))
    return max(candidates, key=lambda rc: (rc[0] * rc[1], rc[1]))
