"""
Batch training of self-organizing maps on distributional data.

DBSOM uses the plain squared L2 Wasserstein distance. ADBSOM adds a
weighting step that learns relevance weights under a product-to-one
constraint, for one of four schemes. Both share the same outline:

- initialization: M distinct data rows as prototypes, unit weights, and an
  assignment at the largest radius
- one representation/weighting/assignment pass per epoch while the radius
  decays from T_max
- a final loop at T_min repeating the pass until assignments stop changing
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import logging
import warnings

import numpy as np

from .errors import (
    ConfigError,
    DegenerateDispersion,
    DimensionMismatch,
    FinalLoopCapReached,
    NonPositiveRadius,
    TooManyNeurons,
    ZeroKernelMass,
)
from .grid import KernelParams, MapGrid, default_radii, kernel, radius_schedule
from .quantile import DistributionalTable, QuantileFunction, standardize
from .registered import Prototypes, RegisteredTable
from .wasserstein import component_tensor, weighted_distances
from .weights import Scheme, WeightingScheme, WeightMatrix, instantiate_scheme

log = logging.getLogger(__name__)

DEFAULT_N_ITER = 50
DEFAULT_FINAL_CYCLE_CAP = 500


class Algorithm(str, Enum):
    DBSOM = "DBSOM"
    ADBSOM = "ADBSOM"


@dataclass(frozen=True)
class TrainConfig:
    algorithm: Algorithm = Algorithm.DBSOM
    scheme: Scheme | None = None
    n_iter: int = DEFAULT_N_ITER
    t_max: float | None = None
    t_min: float | None = None
    seed: int = 0
    standardize: bool = False
    final_cycle_cap: int = DEFAULT_FINAL_CYCLE_CAP

    def __post_init__(self) -> None:
        if not isinstance(self.algorithm, Algorithm):
            try:
                object.__setattr__(self, "algorithm", Algorithm(str(self.algorithm).upper()))
            except ValueError:
                raise ConfigError(f"unknown algorithm {self.algorithm!r}") from None
        if self.scheme is not None:
            object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        if self.algorithm is Algorithm.ADBSOM and self.scheme is None:
            raise ConfigError("ADBSOM needs a weighting scheme (P1..P4)")
        if self.algorithm is Algorithm.DBSOM and self.scheme is not None:
            raise ConfigError("DBSOM takes no weighting scheme")
        if self.n_iter < 1:
            raise ConfigError(f"n_iter must be >= 1, got {self.n_iter}")
        if self.final_cycle_cap < 1:
            raise ConfigError(f"final_cycle_cap must be >= 1, got {self.final_cycle_cap}")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")
        for name in ("t_max", "t_min"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise NonPositiveRadius(f"{name} must be positive, got {value}")

    def kernel_params(self, grid: MapGrid) -> KernelParams:
        t_max, t_min = default_radii(grid)
        return KernelParams(
            self.t_max if self.t_max is not None else t_max,
            self.t_min if self.t_min is not None else t_min,
            self.n_iter,
        )


@dataclass(frozen=True, eq=False)
class Assignment:
    """Best matching neuron of every object."""

    f: np.ndarray
    n_neurons: int

    def __post_init__(self) -> None:
        f = np.array(self.f, dtype=np.intp)
        if f.ndim != 1:
            raise DimensionMismatch("an assignment is one neuron per object")
        if f.size and (f.min() < 0 or f.max() >= self.n_neurons):
            raise DimensionMismatch(f"assignment outside 0..{self.n_neurons - 1}")
        f.setflags(write=False)
        object.__setattr__(self, "f", f)

    def __len__(self) -> int:
        return len(self.f)

    def counts(self) -> np.ndarray:
        return np.bincount(self.f, minlength=self.n_neurons)

    def same_as(self, other: "Assignment") -> bool:
        return bool(np.array_equal(self.f, other.f))


@dataclass(frozen=True, eq=False)
class TrainedMap:
    grid: MapGrid
    prototypes: Prototypes
    weights: WeightMatrix
    assignment: Assignment
    history: tuple[float, ...]
    final_history: tuple[float, ...]
    config: TrainConfig
    kernel_params: KernelParams
    restart: int
    converged: bool
    dispersion_clamped: bool
    objects: tuple[str, ...] = field(default=())
    variables: tuple[str, ...] = field(default=())

    @property
    def criterion(self) -> float:
        return self.final_history[-1] if self.final_history else self.history[-1]

    @property
    def seed(self) -> int:
        return self.config.seed

    @property
    def t_final(self) -> float:
        return self.kernel_params.t_min

    def counts(self) -> np.ndarray:
        return self.assignment.counts()


def _registered(table: DistributionalTable | RegisteredTable, prototypes: Prototypes | None = None) -> RegisteredTable:
    if isinstance(table, RegisteredTable):
        return table
    return RegisteredTable.from_table(table, prototypes)


def _as_prototypes(G: Prototypes | Sequence[Sequence[QuantileFunction]]) -> Prototypes:
    if isinstance(G, Prototypes):
        return G
    return Prototypes.from_cells(G)


class _Engine:
    """The three optimization steps on one registered table and map."""

    def __init__(self, table: RegisteredTable, grid: MapGrid, scheme: WeightingScheme | None = None):
        self.table = table
        self.grid = grid
        self.scheme = scheme

    def kernel(self, radius: float) -> np.ndarray:
        return self.grid.kernel_matrix(radius)

    def unit_weights(self) -> WeightMatrix:
        if self.scheme is None:
            return WeightMatrix.unit(self.table.n_variables)
        shape = self.scheme.scheme.shape(self.grid.size, self.table.n_variables)
        return WeightMatrix(self.scheme.scheme, np.ones(shape))

    def represent(self, f: Assignment, h: np.ndarray, previous: Prototypes | None = None) -> Prototypes:
        w = h[f.f]
        mass = w.sum(axis=0)
        dead = mass <= 0
        if np.any(dead):
            if previous is None:
                raise ZeroKernelMass(f"neurons {np.flatnonzero(dead).tolist()} receive no kernel mass")
            # underflowed kernels leave these neurons where they are
            log.debug("neurons %s keep their prototype: no kernel mass", np.flatnonzero(dead).tolist())
            w = w.copy()
            w[:, dead] = 1.0
            fresh = self.table.barycenters(w)
            values = tuple(
                np.where(dead[:, None], previous.column_on(j, grid), v)
                for j, (grid, v) in enumerate(zip(fresh.grids, fresh.values))
            )
            return Prototypes(fresh.grids, values)
        return self.table.barycenters(w)

    def components(self, prototypes: Prototypes) -> tuple[np.ndarray, np.ndarray]:
        return component_tensor(self.table, prototypes)

    def weigh(self, f: Assignment, h: np.ndarray, dm: np.ndarray, dv: np.ndarray) -> tuple[WeightMatrix, bool]:
        assert self.scheme is not None
        w = h[f.f]
        sm = np.einsum("im,imj->mj", w, dm)
        sv = np.einsum("im,imj->mj", w, dv)
        return self.scheme.solve(sm, sv)

    def generalized(self, dm: np.ndarray, dv: np.ndarray, weights: WeightMatrix, h: np.ndarray) -> np.ndarray:
        # h is symmetric, so column r of D @ h sums K(d(r, k)) * D[:, k]
        return weighted_distances(dm, dv, None if weights.scheme is None else weights) @ h

    def assign(self, dt: np.ndarray) -> Assignment:
        # argmin keeps the first minimum: ties go to the lowest neuron index
        return Assignment(np.argmin(dt, axis=1), self.grid.size)

    @staticmethod
    def criterion(dt: np.ndarray, f: Assignment) -> float:
        return float(dt[np.arange(len(f)), f.f].sum())

    def cycle(
        self, f: Assignment, prototypes: Prototypes, weights: WeightMatrix, radius: float
    ) -> tuple[Assignment, Prototypes, WeightMatrix, float, bool]:
        h = self.kernel(radius)
        prototypes = self.represent(f, h, prototypes)
        dm, dv = self.components(prototypes)
        clamped = False
        if self.scheme is not None:
            weights, clamped = self.weigh(f, h, dm, dv)
        dt = self.generalized(dm, dv, weights, h)
        f = self.assign(dt)
        return f, prototypes, weights, self.criterion(dt, f), clamped


def criterion(
    table: DistributionalTable | RegisteredTable,
    prototypes: Prototypes | Sequence[Sequence[QuantileFunction]],
    weights: WeightMatrix | None,
    assignment: Assignment | Sequence[int],
    grid: MapGrid,
    radius: float,
) -> float:
    """Sum over objects of the generalized distance to their assigned neuron."""
    G = _as_prototypes(prototypes)
    reg = _registered(table, G)
    if G.n_neurons != grid.size:
        raise DimensionMismatch(f"{G.n_neurons} prototypes for a map of {grid.size} neurons")
    f = assignment if isinstance(assignment, Assignment) else Assignment(np.asarray(assignment), grid.size)
    if len(f) != reg.n_objects:
        raise DimensionMismatch(f"{len(f)} assignments for {reg.n_objects} objects")
    dm, dv = component_tensor(reg, G)
    dt = weighted_distances(dm, dv, weights) @ grid.kernel_matrix(radius)
    return _Engine.criterion(dt, f)


def representation_step(
    table: DistributionalTable | RegisteredTable,
    assignment: Assignment | Sequence[int],
    grid: MapGrid,
    radius: float,
    m: int,
    j: int,
) -> QuantileFunction:
    """Prototype g_mj: the kernel-weighted barycenter of column j around neuron m."""
    reg = _registered(table)
    grid._check_index(m)
    if not 0 <= j < reg.n_variables:
        raise DimensionMismatch(f"variable index {j} out of range")
    f = assignment if isinstance(assignment, Assignment) else Assignment(np.asarray(assignment), grid.size)
    k = kernel(grid.distance_matrix()[m][f.f], radius)
    mass = float(np.sum(k))
    if not mass > 0:
        raise ZeroKernelMass(f"neuron {m} receives no kernel mass at radius {radius}")
    return QuantileFunction(reg.grids[j], k @ reg.values[j] / mass)


def weighting_step(
    table: DistributionalTable | RegisteredTable,
    prototypes: Prototypes | Sequence[Sequence[QuantileFunction]],
    assignment: Assignment | Sequence[int],
    grid: MapGrid,
    radius: float,
    scheme: Scheme | str | WeightingScheme,
) -> WeightMatrix:
    G = _as_prototypes(prototypes)
    reg = _registered(table, G)
    solver = scheme if hasattr(scheme, "solve") else instantiate_scheme(scheme)  # type: ignore[arg-type]
    engine = _Engine(reg, grid, solver)  # type: ignore[arg-type]
    f = assignment if isinstance(assignment, Assignment) else Assignment(np.asarray(assignment), grid.size)
    dm, dv = engine.components(G)
    weights, clamped = engine.weigh(f, grid.kernel_matrix(radius), dm, dv)
    if clamped:
        warnings.warn("a kernel-weighted dispersion was clamped", DegenerateDispersion, stacklevel=2)
    return weights


def assignment_step(
    table: DistributionalTable | RegisteredTable,
    prototypes: Prototypes | Sequence[Sequence[QuantileFunction]],
    weights: WeightMatrix | None,
    grid: MapGrid,
    radius: float,
) -> Assignment:
    G = _as_prototypes(prototypes)
    reg = _registered(table, G)
    engine = _Engine(reg, grid)
    dm, dv = engine.components(G)
    unit = WeightMatrix.unit(reg.n_variables)
    return engine.assign(engine.generalized(dm, dv, weights or unit, grid.kernel_matrix(radius)))


def restart_rng(seed: int, restart: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, restart]))


def _train(table: DistributionalTable, grid: MapGrid, config: TrainConfig, restart: int) -> TrainedMap:
    if config.standardize:
        table = standardize(table)
    reg = RegisteredTable.from_table(table)
    n, m = reg.n_objects, grid.size
    if m > n:
        raise TooManyNeurons(f"{m} neurons need at least {m} objects, got {n}")
    params = config.kernel_params(grid)
    scheme = instantiate_scheme(config.scheme) if config.scheme is not None else None
    engine = _Engine(reg, grid, scheme)

    rng = restart_rng(config.seed, restart)
    prototypes = reg.rows(rng.choice(n, size=m, replace=False))
    weights = engine.unit_weights()
    h = engine.kernel(params.t_max)
    dm, dv = engine.components(prototypes)
    f = engine.assign(engine.generalized(dm, dv, weights, h))

    clamped_any = False
    history = []
    for t in range(params.n_iter):
        radius = radius_schedule(t, params)
        f, prototypes, weights, value, clamped = engine.cycle(f, prototypes, weights, radius)
        clamped_any |= clamped
        history.append(value)
        log.debug("restart %d epoch %d radius %.6g criterion %.10g", restart, t, radius, value)

    final_history = []
    converged = False
    for _ in range(config.final_cycle_cap):
        g, prototypes, weights, value, clamped = engine.cycle(f, prototypes, weights, params.t_min)
        clamped_any |= clamped
        final_history.append(value)
        if g.same_as(f):
            converged = True
            break
        f = g
    log.debug("restart %d final loop ran %d cycles", restart, len(final_history))
    if not converged:
        warnings.warn(
            f"final loop stopped after {config.final_cycle_cap} cycles without a fixed point",
            FinalLoopCapReached,
            stacklevel=3,
        )
    if clamped_any:
        warnings.warn("a kernel-weighted dispersion was clamped during training", DegenerateDispersion, stacklevel=3)
    log.info(
        "restart %d seed %d criterion %.10g converged %s", restart, config.seed, final_history[-1], converged
    )
    return TrainedMap(
        grid=grid,
        prototypes=prototypes,
        weights=weights,
        assignment=f,
        history=tuple(history),
        final_history=tuple(final_history),
        config=config,
        kernel_params=params,
        restart=restart,
        converged=converged,
        dispersion_clamped=clamped_any,
        objects=table.objects,
        variables=table.variables,
    )


def train(table: DistributionalTable, grid: MapGrid, config: TrainConfig | None = None) -> TrainedMap:
    """One seeded run: the same as restart 0 of `multi_restart`."""
    return _train(table, grid, config or TrainConfig(), 0)


def _train_restart(args: tuple[DistributionalTable, MapGrid, TrainConfig, int]) -> TrainedMap:
    return _train(*args)


def multi_restart(
    table: DistributionalTable,
    grid: MapGrid,
    config: TrainConfig | None = None,
    restarts: int = 20,
    workers: int = 1,
) -> TrainedMap:
    """
    Best of `restarts` runs by final criterion, ties to the lowest restart.
    Restart r draws from a generator seeded by (config.seed, r).
    """
    config = config or TrainConfig()
    if restarts < 1:
        raise ConfigError(f"restarts must be >= 1, got {restarts}")
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")
    jobs = [(table, grid, config, r) for r in range(restarts)]
    if workers == 1 or restarts == 1:
        runs = [_train_restart(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_train_restart, jobs))
    best = min(runs, key=lambda run: (run.criterion, run.restart))
    log.info("best of %d restarts: %d, criterion %.10g", restarts, best.restart, best.criterion)
    return best

