"""
Synthetic labelled distributional tables with well separated clusters.

Every cell is the equi-depth histogram of a normal sample. Objects of
cluster c draw their location around c * gap in every variable; the
dispersion also differs between clusters in every other variable.
"""

import numpy as np

from .errors import DataError
from .quantile import DistributionalTable, mean, qf_from_samples, variable_std


def make_clusters(
    n_per_cluster: int = 30,
    n_clusters: int = 3,
    n_variables: int = 2,
    gap: float = 20.0,
    jitter: float = 0.3,
    spread: float = 1.0,
    samples: int = 200,
    bins: int = 10,
    seed: int = 0,
) -> DistributionalTable:
    rng = np.random.default_rng(seed)
    objects = []
    labels = []
    rows = []
    for c in range(n_clusters):
        for k in range(n_per_cluster):
            row = []
            for j in range(n_variables):
                loc = c * gap + rng.normal(0.0, jitter)
                scale = spread * (1.0 + 0.5 * c if j % 2 else 1.0)
                row.append(qf_from_samples(rng.normal(loc, scale, size=samples), bins))
            objects.append(f"c{c}-{k}")
            labels.append(f"c{c}")
            rows.append(row)
    variables = tuple(f"x{j}" for j in range(n_variables))
    return DistributionalTable(tuple(objects), variables, rows, tuple(labels))


def separation(table: DistributionalTable) -> float:
    """
    Smallest gap between cluster mean locations divided by the largest
    within-cluster Fréchet standard deviation, over all variables.
    """
    if table.labels is None:
        raise DataError("separation needs a labelled table")
    labels = np.asarray(table.labels)
    classes = sorted(set(table.labels))
    worst_gap = np.inf
    worst_std = 0.0
    for j in range(table.n_variables):
        centers = []
        for c in classes:
            idx = np.flatnonzero(labels == c)
            sub = DistributionalTable(
                tuple(table.objects[i] for i in idx), table.variables, [table.cells[i] for i in idx]
            )
            worst_std = max(worst_std, variable_std(sub, j))
            centers.append(np.mean([mean(table.cells[i][j]) for i in idx]))
        centers = sorted(centers)
        worst_gap = min(worst_gap, float(np.min(np.diff(centers))))
    return worst_gap / worst_std
