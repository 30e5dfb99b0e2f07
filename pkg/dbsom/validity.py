"""
Validity indexes for trained maps.

Internal: topographic error and four silhouettes, all on squared L2
Wasserstein distances (or the trained adaptive distance). External: ARI,
NMI and purity against a priori labels.

Silhouettes lean on the fact that the squared distance is a squared
Euclidean distance between quantile functions, so the sum of distances from
an object to a cluster is n_C * d(y, barycenter_C) + SSE_C. Under
cluster-wise weights the distance to a member of cluster C uses neuron C's
weights.
"""

from dataclasses import asdict, dataclass, replace
from typing import Any, Sequence

import logging
import math
import warnings

import numpy as np
from sklearn.metrics import adjusted_rand_score, normalized_mutual_info_score, silhouette_samples
from sklearn.metrics.cluster import contingency_matrix

from .errors import DataError, DegenerateEntropy, DimensionMismatch, LengthMismatch, SingleCluster
from .grid import MapGrid
from .quantile import DistributionalTable, standardize
from .registered import Prototypes, RegisteredTable
from .train import Assignment, TrainedMap
from .wasserstein import component_tensor, pairwise_components
from .weights import WeightMatrix

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class IndexReport:
    """Internal indexes are None when the report was computed without the table."""

    topographic_error: float | None = None
    silhouette: float | None = None
    silhouette_topo: float | None = None
    silhouette_simplified: float | None = None
    silhouette_simplified_topo: float | None = None
    silhouette_topo_skipped: int | None = None
    silhouette_simplified_topo_skipped: int | None = None
    ari: float | None = None
    nmi: float | None = None
    purity: float | None = None

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        for k, v in d.items():
            # NaN is not JSON
            if isinstance(v, float) and math.isnan(v):
                d[k] = None
        return d


def _labels_of(assignment: Assignment | Sequence[int] | np.ndarray) -> np.ndarray:
    if isinstance(assignment, Assignment):
        return assignment.f
    return np.asarray(assignment, dtype=np.intp)


def _registered(table: DistributionalTable | RegisteredTable, prototypes: Prototypes | None = None) -> RegisteredTable:
    if isinstance(table, RegisteredTable):
        return table
    return RegisteredTable.from_table(table, prototypes)


def _weights_for(weights: WeightMatrix | None, neurons: np.ndarray, n_variables: int) -> tuple[np.ndarray, np.ndarray]:
    """(lambda_M, lambda_V) rows, len(neurons) x P, that each listed neuron applies."""
    if weights is None or weights.scheme is None:
        ones = np.ones((len(neurons), n_variables))
        return ones, ones
    n = weights.values.shape[0] if weights.cluster_wise else 1
    lam_m, lam_v = weights.component_weights(n)
    if weights.cluster_wise:
        return lam_m[neurons], lam_v[neurons]
    return np.broadcast_to(lam_m[0], (len(neurons), n_variables)), np.broadcast_to(lam_v[0], (len(neurons), n_variables))


def _collapse(dm: np.ndarray, dv: np.ndarray, weights: WeightMatrix | None, neurons: np.ndarray) -> np.ndarray:
    """N x C x P components to N x C distances, column c weighted by neuron neurons[c]."""
    lam_m, lam_v = _weights_for(weights, neurons, dm.shape[-1])
    return (dm * lam_m[None] + dv * lam_v[None]).sum(axis=-1)


def _silhouette_scores(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    top = np.maximum(a, b)
    with np.errstate(invalid="ignore", divide="ignore"):
        s = (b - a) / top
    return np.nan_to_num(s)


def topographic_error(
    table: DistributionalTable | RegisteredTable,
    prototypes: Prototypes,
    weights: WeightMatrix | None,
    grid: MapGrid,
    radius: float,
) -> float:
    """Share of objects whose best and second-best neurons are not adjacent."""
    if grid.size < 2:
        raise DataError("the topographic error needs at least 2 neurons")
    if prototypes.n_neurons != grid.size:
        raise DimensionMismatch(f"{prototypes.n_neurons} prototypes for a map of {grid.size} neurons")
    reg = _registered(table, prototypes)
    dm, dv = component_tensor(reg, prototypes)
    dt = _collapse(dm, dv, weights, np.arange(grid.size)) @ grid.kernel_matrix(radius)
    order = np.argsort(dt, axis=1, kind="stable")
    first, second = order[:, 0], order[:, 1]
    return float(np.mean(~grid.adjacency_matrix()[first, second]))


def _check_partition(f: np.ndarray) -> np.ndarray:
    clusters = np.unique(f)
    if len(clusters) < 2:
        raise SingleCluster("silhouettes need at least 2 non-empty clusters")
    return clusters


def pairwise_distances(
    table: DistributionalTable | RegisteredTable,
    assignment: Assignment | Sequence[int] | None = None,
    weights: WeightMatrix | None = None,
) -> np.ndarray:
    """
    N x N squared distances between objects. With weights, entry (i, k)
    uses the weights of the neuron object k is assigned to.
    """
    reg = _registered(table)
    dm, dv = pairwise_components(reg)
    if weights is None or weights.scheme is None:
        return (dm + dv).sum(axis=-1)
    if assignment is None:
        raise DataError("adaptive pairwise distances need the assignment")
    return _collapse(dm, dv, weights, _labels_of(assignment))


def silhouette(
    table: DistributionalTable | RegisteredTable | None,
    assignment: Assignment | Sequence[int],
    distances: np.ndarray | None = None,
    weights: WeightMatrix | None = None,
) -> float:
    """
    Mean silhouette over all objects from a full distance matrix; singleton
    clusters score 0.
    """
    f = _labels_of(assignment)
    if distances is None:
        if table is None:
            raise DataError("need a table or a distance matrix")
        distances = pairwise_distances(table, f, weights)
    d = np.array(distances, dtype=float)
    if d.shape != (len(f), len(f)):
        raise DimensionMismatch(f"distance matrix {d.shape} for {len(f)} objects")
    clusters = _check_partition(f)
    if len(clusters) == len(f):
        return 0.0
    np.fill_diagonal(d, 0.0)
    _, contiguous = np.unique(f, return_inverse=True)
    return float(np.mean(silhouette_samples(d, contiguous, metric="precomputed")))


@dataclass(frozen=True)
class _ClusterStats:
    neurons: np.ndarray  # non-empty neurons
    sizes: np.ndarray
    position: np.ndarray  # neuron -> column in `neurons`, -1 when empty
    to_bary: np.ndarray  # N x C distances to cluster barycenters
    sse: np.ndarray


def _cluster_stats(reg: RegisteredTable, f: np.ndarray, weights: WeightMatrix | None) -> _ClusterStats:
    neurons, inverse, sizes = np.unique(f, return_inverse=True, return_counts=True)
    onehot = np.zeros((len(f), len(neurons)))
    onehot[np.arange(len(f)), inverse] = 1.0
    barycenters = reg.barycenters(onehot)
    dm, dv = component_tensor(reg, barycenters)
    to_bary = _collapse(dm, dv, weights, neurons)
    sse = np.array([to_bary[inverse == c, c].sum() for c in range(len(neurons))])
    position = np.full(int(neurons.max()) + 1, -1)
    position[neurons] = np.arange(len(neurons))
    return _ClusterStats(neurons, sizes, position, to_bary, sse)


def _fast_scores(
    reg: RegisteredTable, f: np.ndarray, weights: WeightMatrix | None, eligible: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """
    Per-object silhouettes via the barycenter identities, and a mask of the
    objects that had at least one eligible other cluster. `eligible` is a
    C x C boolean mask of clusters b(i) may use for objects of each cluster.
    """
    st = _cluster_stats(reg, f, weights)
    own = st.position[f]
    n_own = st.sizes[own]
    rows = np.arange(len(f))
    with np.errstate(invalid="ignore", divide="ignore"):
        a = (n_own * st.to_bary[rows, own] + st.sse[own]) / (n_own - 1)
    between = st.to_bary + st.sse[None, :] / st.sizes[None, :]
    allowed = ~np.eye(len(st.neurons), dtype=bool)
    if eligible is not None:
        allowed &= eligible
    between = np.where(allowed[own], between, np.inf)
    b = between.min(axis=1)
    covered = np.isfinite(b)
    s = np.where(n_own > 1, _silhouette_scores(np.where(n_own > 1, a, 0.0), b), 0.0)
    return np.where(covered, s, np.nan), covered


def silhouette_fast(
    table: DistributionalTable | RegisteredTable,
    assignment: Assignment | Sequence[int],
    weights: WeightMatrix | None = None,
) -> float:
    """The silhouette of `silhouette`, in time linear in N."""
    f = _labels_of(assignment)
    _check_partition(f)
    scores, _ = _fast_scores(_registered(table), f, weights)
    return float(np.mean(scores))


def _non_adjacent(grid: MapGrid, neurons: np.ndarray) -> np.ndarray:
    return ~grid.adjacency_matrix()[np.ix_(neurons, neurons)]


def _covered_mean(scores: np.ndarray, covered: np.ndarray, what: str) -> tuple[float, int]:
    skipped = int(np.sum(~covered))
    if skipped:
        log.info("%s: %d objects have no eligible non-adjacent cluster", what, skipped)
    if skipped == len(scores):
        return math.nan, skipped
    return float(np.mean(scores[covered])), skipped


def silhouette_topo(
    table: DistributionalTable | RegisteredTable,
    assignment: Assignment | Sequence[int],
    grid: MapGrid,
    weights: WeightMatrix | None = None,
) -> tuple[float, int]:
    """
    Silhouette whose b(i) only considers clusters on neurons not adjacent to
    the object's own. Returns the score over covered objects and the number
    of objects skipped for lack of an eligible cluster.
    """
    f = _labels_of(assignment)
    neurons = _check_partition(f)
    scores, covered = _fast_scores(_registered(table), f, weights, _non_adjacent(grid, neurons))
    return _covered_mean(scores, covered, "topology-aware silhouette")


def _prototype_scores(
    reg: RegisteredTable,
    f: np.ndarray,
    prototypes: Prototypes,
    weights: WeightMatrix | None,
    grid: MapGrid | None,
) -> tuple[np.ndarray, np.ndarray]:
    neurons = _check_partition(f)
    dm, dv = component_tensor(reg, prototypes)
    d = _collapse(dm, dv, weights, np.arange(prototypes.n_neurons))
    rows = np.arange(len(f))
    a = d[rows, f]
    allowed = np.zeros((prototypes.n_neurons, prototypes.n_neurons), dtype=bool)
    allowed[np.ix_(neurons, neurons)] = True
    np.fill_diagonal(allowed, False)
    if grid is not None:
        allowed &= ~grid.adjacency_matrix()
    b = np.where(allowed[f], d, np.inf).min(axis=1)
    covered = np.isfinite(b)
    s = _silhouette_scores(a, np.where(covered, b, 0.0))
    return np.where(covered, s, np.nan), covered


def silhouette_simplified(
    table: DistributionalTable | RegisteredTable,
    assignment: Assignment | Sequence[int],
    prototypes: Prototypes,
    weights: WeightMatrix | None = None,
) -> float:
    """Silhouette with a(i) and b(i) measured to the cluster prototypes."""
    f = _labels_of(assignment)
    scores, _ = _prototype_scores(_registered(table, prototypes), f, prototypes, weights, None)
    return float(np.mean(scores))


def silhouette_simplified_topo(
    table: DistributionalTable | RegisteredTable,
    assignment: Assignment | Sequence[int],
    prototypes: Prototypes,
    grid: MapGrid,
    weights: WeightMatrix | None = None,
) -> tuple[float, int]:
    f = _labels_of(assignment)
    scores, covered = _prototype_scores(_registered(table, prototypes), f, prototypes, weights, grid)
    return _covered_mean(scores, covered, "topology-aware simplified silhouette")


def _check_lengths(labels: Sequence[Any], assignment: Sequence[Any] | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(labels)
    y = np.asarray(assignment)
    if len(x) != len(y):
        raise LengthMismatch(f"{len(x)} labels for {len(y)} objects")
    if len(x) < 2:
        raise DataError("external indexes need at least 2 objects")
    return x, y


def ari(labels: Sequence[Any], assignment: Assignment | Sequence[int]) -> float:
    x, y = _check_lengths(labels, _labels_of(assignment) if isinstance(assignment, Assignment) else assignment)
    return float(adjusted_rand_score(x, y))


def nmi(labels: Sequence[Any], assignment: Assignment | Sequence[int]) -> float:
    """Mutual information over the arithmetic mean of the two entropies."""
    x, y = _check_lengths(labels, _labels_of(assignment) if isinstance(assignment, Assignment) else assignment)
    if len(np.unique(x)) == 1 and len(np.unique(y)) == 1:
        warnings.warn("both partitions have a single block; NMI taken as 0", DegenerateEntropy, stacklevel=2)
        return 0.0
    return float(normalized_mutual_info_score(x, y, average_method="arithmetic"))


def purity(labels: Sequence[Any], assignment: Assignment | Sequence[int]) -> float:
    """Share of objects in their cluster's majority class."""
    x, y = _check_lengths(labels, _labels_of(assignment) if isinstance(assignment, Assignment) else assignment)
    table = contingency_matrix(y, x)
    return float(table.max(axis=1).sum() / len(x))


def evaluate_map(
    table: DistributionalTable, trained: TrainedMap, labels: Sequence[Any] | None = None
) -> IndexReport:
    """Every index for a trained map, on the table it was trained on."""
    if trained.objects and tuple(table.objects) != tuple(trained.objects):
        raise DimensionMismatch("the table's objects differ from the map's")
    if trained.config.standardize:
        table = standardize(table)
    if labels is None and table.labels is not None:
        labels = table.labels
    reg = RegisteredTable.from_table(table, trained.prototypes)
    weights = trained.weights if trained.weights.scheme is not None else None
    f = trained.assignment.f
    grid = trained.grid
    s_topo, s_topo_skipped = silhouette_topo(reg, f, grid, weights)
    s_ce, s_ce_skipped = silhouette_simplified_topo(reg, f, trained.prototypes, grid, weights)
    report = IndexReport(
        topographic_error=topographic_error(reg, trained.prototypes, weights, grid, trained.t_final),
        silhouette=silhouette_fast(reg, f, weights),
        silhouette_topo=s_topo,
        silhouette_simplified=silhouette_simplified(reg, f, trained.prototypes, weights),
        silhouette_simplified_topo=s_ce,
        silhouette_topo_skipped=s_topo_skipped,
        silhouette_simplified_topo_skipped=s_ce_skipped,
    )
    if labels is not None:
        external = label_report(trained, labels)
        report = replace(report, ari=external.ari, nmi=external.nmi, purity=external.purity)
    return report


def label_report(trained: TrainedMap, labels: Sequence[Any]) -> IndexReport:
    """External indexes alone, from the map's assignment and known labels."""
    f = trained.assignment.f
    return IndexReport(ari=ari(labels, f), nmi=nmi(labels, f), purity=purity(labels, f))
