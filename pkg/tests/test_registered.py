import numpy as np
import pytest

from dbsom.errors import DimensionMismatch, NonFiniteInput
from dbsom.quantile import mean
from dbsom.registered import Prototypes, RegisteredTable

from factories import random_qf, random_table, table_of, uniform


def test_registration_keeps_every_cell(rng):
    table = random_table(rng, 5, 2)
    reg = RegisteredTable.from_table(table)
    p = np.linspace(0, 1, 257)
    for i in range(5):
        for j in range(2):
            q = reg.rows([i]).cell(0, j)
            assert np.allclose(q(p), table.cells[i][j](p), atol=1e-12)
            assert reg.means[i, j] == pytest.approx(mean(table.cells[i][j]))


def test_registration_includes_prototype_knots(rng):
    table = random_table(rng, 3, 1)
    protos = Prototypes.from_cells([[random_qf(rng, 5)]])
    reg = RegisteredTable.from_table(table, protos)
    assert set(protos.grids[0]) <= set(reg.grids[0])


def test_barycenters():
    table = table_of([[uniform(0.0, 1.0)], [uniform(2.0, 4.0)]])
    reg = RegisteredTable.from_table(table)
    bary = reg.barycenters(np.array([[1.0, 1.0], [1.0, 0.0]]))
    assert bary.cell(0, 0).values.tolist() == pytest.approx([1.0, 2.5])
    assert bary.cell(1, 0).values.tolist() == pytest.approx([0.0, 1.0])
    assert bary.means()[:, 0] == pytest.approx([1.75, 0.5])
    with pytest.raises(DimensionMismatch):
        reg.barycenters(np.ones((3, 2)))


def test_prototypes_validation(rng):
    protos = Prototypes.from_cells([[random_qf(rng), random_qf(rng)] for _ in range(3)])
    assert (protos.n_neurons, protos.n_variables) == (3, 2)
    assert len(protos.cells()) == 3
    with pytest.raises(DimensionMismatch):
        Prototypes(protos.grids, (protos.values[0], protos.values[1][:2]))
    wider = np.union1d(protos.grids[0], [0.123])
    assert protos.column_on(0, wider).shape == (3, len(wider))


def test_non_finite_table():
    # the knots are finite but their mean overflows
    table = table_of([[uniform(1e308, 1.5e308)], [uniform(0.0, 1.0)]])
    with pytest.raises(NonFiniteInput):
        RegisteredTable.from_table(table)
