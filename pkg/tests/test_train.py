import math
import warnings

import numpy as np
import pytest

from dbsom.errors import (
    ConfigError,
    DegenerateDispersion,
    DimensionMismatch,
    FinalLoopCapReached,
    TooManyNeurons,
    ZeroKernelMass,
)
from dbsom.grid import MapGrid, build_grid, kernel
from dbsom.registered import Prototypes, RegisteredTable
from dbsom.train import (
    Algorithm,
    Assignment,
    TrainConfig,
    _train,
    assignment_step,
    criterion,
    multi_restart,
    representation_step,
    train,
    weighting_step,
)
from dbsom.wasserstein import barycenter, w2_squared
from dbsom.weights import PRODUCT_TOLERANCE, Scheme, WeightMatrix

from factories import dirac, dirac_table, random_qf, random_table, table_of


def test_train_config():
    assert TrainConfig(algorithm="adbsom", scheme="P4").algorithm is Algorithm.ADBSOM
    with pytest.raises(ConfigError):
        TrainConfig(algorithm=Algorithm.ADBSOM)
    with pytest.raises(ConfigError):
        TrainConfig(scheme=Scheme.GLOBAL_VARIABLE)
    with pytest.raises(ConfigError):
        TrainConfig(algorithm="SOM")
    with pytest.raises(ConfigError):
        TrainConfig(n_iter=0)


def test_assignment():
    f = Assignment([0, 2, 2], 4)
    assert f.counts().tolist() == [1, 0, 2, 0]
    with pytest.raises(DimensionMismatch):
        Assignment([0, 4], 4)


def test_criterion_without_neighbours():
    table = dirac_table([0.0, 1.0, 10.0])
    grid = MapGrid(1, 2)
    protos = Prototypes.from_cells([[dirac(0.5)], [dirac(10.0)]])
    value = criterion(table, protos, None, [0, 0, 1], grid, 1e-3)
    assert value == pytest.approx(0.5)
    unit = WeightMatrix(Scheme.CLUSTER_VARIABLE, np.ones((2, 1)))
    assert criterion(table, protos, unit, [0, 0, 1], grid, 1e-3) == pytest.approx(value)


def test_criterion_with_neighbours():
    table = dirac_table([0.0])
    grid = MapGrid(1, 2)
    protos = Prototypes.from_cells([[dirac(1.0)], [dirac(2.0)]])
    k = kernel(1.0, 0.8)
    assert criterion(table, protos, None, [0], grid, 0.8) == pytest.approx(1.0 + 4.0 * k)
    assert criterion(table, protos, None, [1], grid, 0.8) == pytest.approx(4.0 + 1.0 * k)


def test_representation_step_is_weighted_barycenter(rng):
    table = random_table(rng, 6, 2)
    grid = MapGrid(1, 3)
    f = [0, 0, 1, 1, 2, 2]
    g = representation_step(table, f, grid, 0.9, 1, 0)
    weights = [kernel(abs(1 - r), 0.9) for r in f]
    expected = barycenter(table.column(0), weights)
    probs = np.linspace(0, 1, 101)
    assert np.allclose(g(probs), expected(probs), atol=1e-12)


def test_representation_step_minimizes(rng):
    table = random_table(rng, 8, 1)
    grid = MapGrid(2, 2)
    f = Assignment(rng.integers(0, 4, 8), 4)
    radius = 0.7
    g = representation_step(table, f, grid, radius, 2, 0)
    k = kernel(grid.distance_matrix()[2][f.f], radius)

    def objective(q):
        return sum(w * w2_squared(y, q) for w, y in zip(k, table.column(0)))

    base = objective(g)
    for _ in range(30):
        other = random_qf(rng, 4, offset=float(np.mean(g.values)))
        assert objective(other) >= base - 1e-9
        assert objective(g.shifted(float(rng.normal(0, 0.1)))) >= base - 1e-9


def test_representation_step_without_mass():
    table = dirac_table([0.0, 1.0])
    grid = MapGrid(1, 40)
    with pytest.raises(ZeroKernelMass):
        representation_step(table, [0, 0], grid, 0.01, 39, 0)


def test_weighting_step_global_variable():
    s2, s5 = math.sqrt(2.0), math.sqrt(0.5)
    table = table_of([[dirac(s2), dirac(s5)], [dirac(-s2), dirac(-s5)]])
    protos = Prototypes.from_cells([[dirac(0.0), dirac(0.0)]])
    weights = weighting_step(table, protos, [0, 0], MapGrid(1, 1), 1.0, "P1")
    assert weights.values.tolist() == pytest.approx([0.5, 2.0])


def test_weighting_step_warns_on_vanishing_dispersion():
    table = table_of([[dirac(1.0), dirac(1.0)], [dirac(-1.0), dirac(0.0)]])
    protos = Prototypes.from_cells([[dirac(0.0), dirac(0.0)], [dirac(-1.0), dirac(0.0)]])
    with pytest.warns(DegenerateDispersion):
        weights = weighting_step(table, protos, [0, 1], MapGrid(1, 2), 1e-3, "P3")
    assert np.all(np.isfinite(weights.values))
    assert weights.product_defect() <= PRODUCT_TOLERANCE


def test_assignment_step_picks_nearest():
    table = dirac_table([0.1, 0.9, 5.0])
    protos = Prototypes.from_cells([[dirac(0.0)], [dirac(1.0)], [dirac(5.0)]])
    f = assignment_step(table, protos, None, MapGrid(1, 3), 1e-3)
    assert f.f.tolist() == [0, 1, 2]


def test_assignment_step_ties_go_to_lowest_index():
    table = dirac_table([0.5])
    protos = Prototypes.from_cells([[dirac(0.0)], [dirac(1.0)]])
    assert assignment_step(table, protos, None, MapGrid(1, 2), 1e-3).f.tolist() == [0]


def test_assignment_step_uses_weights():
    table = dirac_table([[0.0, 0.0]])
    protos = Prototypes.from_cells([[dirac(1.0), dirac(0.0)], [dirac(0.0), dirac(1.1)]])
    grid = MapGrid(1, 2)
    assert assignment_step(table, protos, None, grid, 1e-3).f.tolist() == [0]
    weights = WeightMatrix(Scheme.GLOBAL_VARIABLE, [4.0, 0.25])
    assert assignment_step(table, protos, weights, grid, 1e-3).f.tolist() == [1]


def test_assignment_step_optimality(rng):
    table = random_table(rng, 10, 2, clusters=3)
    grid = MapGrid(2, 2)
    reg = RegisteredTable.from_table(table)
    protos = reg.rows([0, 3, 5, 9])
    f = assignment_step(reg, protos, None, grid, 0.6)
    base = criterion(reg, protos, None, f, grid, 0.6)
    for i in range(10):
        for r in range(4):
            moved = f.f.copy()
            moved[i] = r
            assert criterion(reg, protos, None, moved, grid, 0.6) >= base - 1e-9


def test_train_one_neuron_per_object():
    table = dirac_table([0.0, 3.0, 7.0, 12.0])
    config = TrainConfig(n_iter=1, t_max=0.01, t_min=0.01)
    trained = train(table, build_grid(2, 2), config)
    assert sorted(trained.assignment.f.tolist()) == [0, 1, 2, 3]
    assert trained.criterion == pytest.approx(0.0, abs=1e-12)
    assert trained.converged


def test_train_is_deterministic(rng):
    table = random_table(rng, 20, 2, clusters=2)
    config = TrainConfig(algorithm="ADBSOM", scheme="P4", n_iter=5, seed=7)
    a = train(table, build_grid(2, 2), config)
    b = train(table, build_grid(2, 2), config)
    assert np.array_equal(a.assignment.f, b.assignment.f)
    assert a.history == b.history
    assert np.array_equal(a.weights.values, b.weights.values)
    for va, vb in zip(a.prototypes.values, b.prototypes.values):
        assert np.array_equal(va, vb)


@pytest.mark.parametrize("scheme", [None, *Scheme])
def test_train_result(rng, scheme):
    table = random_table(rng, 16, 2, clusters=2)
    algorithm = Algorithm.DBSOM if scheme is None else Algorithm.ADBSOM
    config = TrainConfig(algorithm=algorithm, scheme=scheme, n_iter=6, seed=3)
    trained = train(table, build_grid(2, 2), config)
    assert len(trained.history) == 6
    assert trained.final_history
    assert all(b <= a + 1e-9 * max(1.0, a) for a, b in zip(trained.final_history, trained.final_history[1:]))
    assert trained.weights.product_defect() <= PRODUCT_TOLERANCE
    assert trained.objects == table.objects
    assert trained.counts().sum() == 16


def test_train_rejects_more_neurons_than_objects():
    with pytest.raises(TooManyNeurons):
        train(dirac_table([0.0, 1.0, 2.0]), build_grid(2, 2))


def test_final_loop_cap(rng):
    table = random_table(rng, 12, 1, clusters=3)
    config = TrainConfig(n_iter=1, final_cycle_cap=1, t_max=3.0, t_min=0.3)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        trained = train(table, build_grid(2, 2), config)
    assert len(trained.final_history) == 1
    capped = [w for w in caught if issubclass(w.category, FinalLoopCapReached)]
    assert bool(capped) != trained.converged


def test_multi_restart_picks_lowest_criterion(rng):
    table = random_table(rng, 12, 1, clusters=3)
    config = TrainConfig(n_iter=3, seed=11)
    best = multi_restart(table, build_grid(2, 2), config, restarts=4)
    runs = [_train(table, build_grid(2, 2), config, r) for r in range(4)]
    assert best.criterion == min(run.criterion for run in runs)
    assert best.restart == min(r.restart for r in runs if r.criterion == best.criterion)
    with pytest.raises(ConfigError):
        multi_restart(table, build_grid(2, 2), config, restarts=0)


def test_multi_restart_first_run_is_train(rng):
    table = random_table(rng, 10, 1, clusters=2)
    config = TrainConfig(n_iter=2, seed=5)
    single = multi_restart(table, build_grid(2, 2), config, restarts=1)
    assert np.array_equal(single.assignment.f, train(table, build_grid(2, 2), config).assignment.f)


def test_standardized_training():
    table = dirac_table([[0.0, 0.0], [1.0, 100.0], [2.0, 200.0], [3.0, 300.0], [4.0, 400.0]])
    trained = train(table, build_grid(2, 2), TrainConfig(n_iter=2, standardize=True))
    means = trained.prototypes.means()
    assert np.all(np.abs(means) < 10.0)
