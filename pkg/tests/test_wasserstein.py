import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from dbsom.errors import DimensionMismatch, IndexOutOfRange, SchemeMismatch
from dbsom.grid import MapGrid, kernel
from dbsom.quantile import QuantileFunction, mean
from dbsom.registered import Prototypes, RegisteredTable
from dbsom.wasserstein import (
    adaptive_distance,
    barycenter,
    component_tensor,
    decompose,
    generalized_distance,
    mv_w2_squared,
    pairwise_components,
    w2_squared,
)
from dbsom.weights import Scheme, WeightMatrix

from factories import dirac, random_qf, random_table, table_of, uniform


def test_analytic_cases():
    assert w2_squared(dirac(0.0), dirac(3.0)) == pytest.approx(9.0)
    a, b = uniform(0.0, 1.0), uniform(2.0, 4.0)
    assert w2_squared(a, a) == 0.0
    assert w2_squared(a, b) == pytest.approx(6 + 1 / 3, abs=1e-9)
    c = decompose(a, b)
    assert c.dM == pytest.approx(6.25, abs=1e-9)
    assert c.dV == pytest.approx(1 / 12, abs=1e-9)
    assert c.total == pytest.approx(6 + 1 / 3, abs=1e-9)


def test_shift_is_pure_location(rng):
    q = random_qf(rng, 5)
    c = decompose(q.shifted(1.5), q)
    assert c.dM == pytest.approx(2.25)
    assert c.dV == pytest.approx(0.0, abs=1e-12)


def test_decomposition_identity(rng):
    for _ in range(1000):
        a, b = random_qf(rng), random_qf(rng)
        c = decompose(a, b)
        assert abs(w2_squared(a, b) - (c.dM + c.dV)) <= 1e-9
        assert c.dM >= 0 and c.dV >= 0


def test_agrees_with_quadrature(rng):
    p = np.linspace(0.0, 1.0, 100_001)
    for _ in range(100):
        a, b = random_qf(rng), random_qf(rng, offset=1.0)
        numeric = trapezoid((a(p) - b(p)) ** 2, p)
        assert w2_squared(a, b) == pytest.approx(numeric, rel=1e-6)


def test_translation(rng):
    for _ in range(50):
        a, b = random_qf(rng), random_qf(rng)
        c = float(rng.normal() * 3)
        base = w2_squared(a, b)
        assert w2_squared(a.shifted(c), b.shifted(c)) == pytest.approx(base, abs=1e-9)
        expected = base + c * c + 2 * c * (mean(a) - mean(b))
        assert w2_squared(a.shifted(c), b) == pytest.approx(expected, abs=1e-9)


def test_multivariate_sum():
    yi = [dirac(0.0), uniform(0.0, 1.0)]
    gm = [dirac(3.0), uniform(2.0, 4.0)]
    assert mv_w2_squared(yi, gm) == pytest.approx(9 + 6 + 1 / 3)
    assert mv_w2_squared(yi, yi) == 0.0
    with pytest.raises(DimensionMismatch):
        mv_w2_squared(yi, gm[:1])


def test_adaptive_distance():
    yi = [dirac(0.0), dirac(0.0)]
    gm = [dirac(1.0), dirac(2.0)]
    gv = WeightMatrix(Scheme.GLOBAL_VARIABLE, [2.0, 0.5])
    assert adaptive_distance(yi, gm, gv, 0) == pytest.approx(4.0)
    assert adaptive_distance(yi, gm, WeightMatrix.unit(2), 0) == mv_w2_squared(yi, gm)
    gc = WeightMatrix(Scheme.GLOBAL_COMPONENT, [[2.0, 2.0], [0.5, 0.5]])
    assert adaptive_distance(yi, gm, gc, 0) == pytest.approx(adaptive_distance(yi, gm, gv, 0))


def test_adaptive_distance_errors():
    yi = [dirac(0.0), dirac(0.0)]
    gm = [dirac(1.0), dirac(2.0)]
    with pytest.raises(SchemeMismatch):
        adaptive_distance(yi[:1], gm[:1], WeightMatrix(Scheme.GLOBAL_VARIABLE, [2.0, 0.5]), 0)
    cv = WeightMatrix(Scheme.CLUSTER_VARIABLE, [[2.0, 0.5], [1.0, 1.0]])
    assert adaptive_distance(yi, gm, cv, 1) == pytest.approx(5.0)
    with pytest.raises(IndexOutOfRange):
        adaptive_distance(yi, gm, cv, 2)


def test_generalized_distance():
    yi = [uniform(0.0, 1.0)]
    g = [uniform(2.0, 4.0)]
    d = w2_squared(yi[0], g[0])
    one = MapGrid(1, 1)
    assert generalized_distance(yi, 0, Prototypes.from_cells([g]), one, 1.0) == pytest.approx(d)

    line = MapGrid(1, 2)
    same = Prototypes.from_cells([g, g])
    assert generalized_distance(yi, 0, same, line, 0.7) == pytest.approx(d * (1 + kernel(1.0, 0.7)))

    apart = Prototypes.from_cells([g, [uniform(10.0, 11.0)]])
    assert generalized_distance(yi, 0, apart, line, 1e-6) == pytest.approx(d, abs=1e-6)


def test_generalized_distance_grows_with_any_neuron_distance(rng):
    yi = [uniform(0.0, 1.0), uniform(-1.0, 1.0)]
    line = MapGrid(1, 3)
    near = [random_qf(rng) for _ in range(2)]
    for h in range(3):
        for radius in (0.3, 1.0, 5.0):
            before = generalized_distance(yi, 0, Prototypes.from_cells([near, near, near]), line, radius)
            cells = [near, near, near]
            cells[h] = [q.shifted(50.0) for q in near]
            after = generalized_distance(yi, 0, Prototypes.from_cells(cells), line, radius)
            assert after >= before


def test_distance_across_a_jump():
    jump = QuantileFunction([0.0, 0.5, 0.5, 1.0], [0.0, 1.0, 2.0, 3.0])
    u = uniform(0.0, 3.0)
    assert w2_squared(jump, u) == pytest.approx(1 / 12, abs=1e-15)
    c = decompose(jump, u)
    assert c.dM == pytest.approx(0.0, abs=1e-15)
    assert c.dV == pytest.approx(1 / 12, abs=1e-15)


def test_tensors_with_jumps(rng):
    rows = []
    for _ in range(5):
        gap = float(rng.uniform(0.1, 0.9))
        jump = QuantileFunction([0.0, gap, gap, 1.0], [0.0, 1.0, 1.0 + rng.exponential(), 4.0 + rng.normal()])
        rows.append([jump, random_qf(rng)])
    table = table_of(rows)
    protos = Prototypes.from_cells([rows[0], [random_qf(rng), random_qf(rng)]])
    reg = RegisteredTable.from_table(table, protos)
    dm, dv = component_tensor(reg, protos)
    pm, pv = pairwise_components(RegisteredTable.from_table(table))
    for i in range(5):
        for j in range(2):
            for m in range(2):
                c = decompose(table.cells[i][j], protos.cell(m, j))
                assert dm[i, m, j] + dv[i, m, j] == pytest.approx(c.total, abs=1e-9)
            for k in range(5):
                c = decompose(table.cells[i][j], table.cells[k][j])
                assert pm[i, k, j] + pv[i, k, j] == pytest.approx(c.total, abs=1e-9)


def test_barycenter():
    assert barycenter([dirac(0.0), dirac(2.0)]).values.tolist() == pytest.approx([1.0, 1.0])
    q = barycenter([dirac(0.0), dirac(2.0)], [3.0, 1.0])
    assert q.values.tolist() == pytest.approx([0.5, 0.5])
    u = uniform(0.0, 1.0)
    assert barycenter([u, u, u]).values.tolist() == pytest.approx([0.0, 1.0])


def test_component_tensor_matches_decompose(rng):
    table = random_table(rng, 7, 2)
    protos = Prototypes.from_cells([[random_qf(rng) for _ in range(2)] for _ in range(3)])
    dm, dv = component_tensor(RegisteredTable.from_table(table, protos), protos)
    assert dm.shape == (7, 3, 2)
    for i in range(7):
        for m in range(3):
            for j in range(2):
                c = decompose(table.cells[i][j], protos.cell(m, j))
                assert dm[i, m, j] == pytest.approx(c.dM, abs=1e-9)
                assert dv[i, m, j] == pytest.approx(c.dV, abs=1e-9)


def test_component_tensor_merges_grids(rng):
    table = random_table(rng, 4, 1)
    protos = Prototypes.from_cells([[random_qf(rng, 3)] for _ in range(2)])
    # the table registered without the prototype knots still gives exact components
    dm, dv = component_tensor(RegisteredTable.from_table(table), protos)
    for i in range(4):
        for m in range(2):
            c = decompose(table.cells[i][0], protos.cell(m, 0))
            assert dm[i, m, 0] + dv[i, m, 0] == pytest.approx(c.total, abs=1e-9)


def test_pairwise_components(rng):
    table = random_table(rng, 6, 2)
    dm, dv = pairwise_components(RegisteredTable.from_table(table))
    assert np.all(np.diag(dm[:, :, 0]) == 0) and np.all(np.diag(dv[:, :, 1]) == 0)
    for i in range(6):
        for k in range(6):
            for j in range(2):
                c = decompose(table.cells[i][j], table.cells[k][j])
                assert dm[i, k, j] == pytest.approx(c.dM, abs=1e-9)
                assert dv[i, k, j] == pytest.approx(c.dV, abs=1e-9)
    assert math.isclose(dv[1, 2, 0], dv[2, 1, 0], abs_tol=1e-12)
