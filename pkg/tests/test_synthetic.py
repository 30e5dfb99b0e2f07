import pytest

from dbsom.errors import DataError
from dbsom.synthetic import make_clusters, separation

from factories import random_table


def test_make_clusters():
    table = make_clusters(n_per_cluster=5, n_clusters=3, n_variables=2, seed=1)
    assert table.n_objects == 15
    assert table.variables == ("x0", "x1")
    assert table.labels.count("c2") == 5
    assert all(len(q) == 11 for row in table.cells for q in row)
    again = make_clusters(n_per_cluster=5, n_clusters=3, n_variables=2, seed=1)
    assert (again.cells[7][1].values == table.cells[7][1].values).all()


def test_separation():
    assert separation(make_clusters(n_per_cluster=10, seed=0)) >= 10
    assert separation(make_clusters(n_per_cluster=10, gap=0.5, seed=0)) < 10


def test_separation_needs_labels(rng):
    with pytest.raises(DataError):
        separation(random_table(rng, 4, 1))
