"""Graph measures and the ensemble convergence harness.

All measures take a sorted simple edge list with ``u < v`` and the node
count ``n``; the adjacency is built once as a ``scipy.sparse`` CSR matrix.
"""

import logging
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from lfr_stream.community_assign import CommunityAssignment
from lfr_stream.config_model import cm_sample, rewire_to_simple
from lfr_stream.edge_swap import RunConfig, as_edge_array, check_edge_list, draw_random_swaps, sequential_swap_oracle
from lfr_stream.errors import LasVegasFailure, ValidationError
from lfr_stream.sampling import make_rng

logger = logging.getLogger(__name__)

MIN_ENSEMBLE = 10
SUSTAIN_SNAPSHOTS = 3


def _node_count(edges: np.ndarray, n: int | None) -> int:
    top = int(edges.max()) + 1 if len(edges) else 0
    if n is None:
        return top
    if n < top:
        raise ValidationError(f"edge list references node {top - 1} but n={n}")
    return n


def adjacency(edges: np.ndarray | Sequence[Sequence[int]], n: int | None = None) -> sp.csr_matrix:
    """Symmetric 0/1 CSR adjacency of a simple graph."""
    arr = as_edge_array(edges)
    check_edge_list(arr, simple=True)
    size = _node_count(arr, n)
    rows = np.concatenate([arr[:, 0], arr[:, 1]])
    cols = np.concatenate([arr[:, 1], arr[:, 0]])
    data = np.ones(rows.size, dtype=np.int64)
    return sp.csr_matrix((data, (rows, cols)), shape=(size, size))


def _triangles_per_node(a: sp.csr_matrix) -> np.ndarray:
    return np.asarray((a @ a).multiply(a).sum(axis=1)).ravel() // 2


def triangle_count(edges: np.ndarray | Sequence[Sequence[int]], n: int | None = None) -> int:
    """Number of unordered node triples with all three edges present."""
    a = adjacency(edges, n)
    return int(_triangles_per_node(a).sum()) // 3


def degree_assortativity(edges: np.ndarray | Sequence[Sequence[int]], n: int | None = None) -> float | None:
    """Pearson correlation of endpoint degrees over both orientations of every edge.

    Returns None when the endpoint degrees have zero variance (e.g. regular graphs).
    """
    arr = as_edge_array(edges)
    check_edge_list(arr, simple=True)
    if len(arr) < 2:
        return None
    deg = np.bincount(arr.ravel(), minlength=_node_count(arr, n)).astype(np.float64)
    x = np.concatenate([deg[arr[:, 0]], deg[arr[:, 1]]])
    y = np.concatenate([deg[arr[:, 1]], deg[arr[:, 0]]])
    dx, dy = x - x.mean(), y - y.mean()
    var = math.sqrt(float(dx @ dx) * float(dy @ dy))
    if var == 0.0:
        return None
    return float(dx @ dy) / var


def local_clustering(edges: np.ndarray | Sequence[Sequence[int]], n: int | None = None) -> np.ndarray:
    """Per-node clustering coefficient; nodes of degree below two get 0."""
    a = adjacency(edges, n)
    deg = np.asarray(a.sum(axis=1)).ravel().astype(np.float64)
    tri = _triangles_per_node(a).astype(np.float64)
    pairs = deg * (deg - 1) / 2
    out = np.zeros_like(deg)
    np.divide(tri, pairs, out=out, where=pairs > 0)
    return out


def avg_local_clustering(edges: np.ndarray | Sequence[Sequence[int]], n: int | None = None) -> float:
    coeffs = local_clustering(edges, n)
    return float(coeffs.mean()) if coeffs.size else 0.0


@dataclass
class MixingReport:
    per_node: np.ndarray
    mean: float | None


def realized_mixing(edges: np.ndarray | Sequence[Sequence[int]], ground_truth: CommunityAssignment) -> MixingReport:
    """Share of every node's neighbours that share no community with it.

    Isolated nodes get NaN and are left out of the mean.
    """
    arr = as_edge_array(edges)
    n = max(ground_truth.n_nodes, _node_count(arr, None))
    counts = np.bincount(ground_truth.nodes, minlength=n)
    if np.any(counts == 0):
        raise ValidationError("ground truth must cover every node")
    if len(arr) == 0:
        return MixingReport(np.full(n, np.nan), None)
    if int(counts.max()) <= 1:
        comm = np.empty(n, dtype=np.int64)
        comm[ground_truth.nodes] = ground_truth.communities
        external = comm[arr[:, 0]] != comm[arr[:, 1]]
    else:
        sets = ground_truth.node_sets()
        external = np.fromiter(
            (sets[u].isdisjoint(sets[v]) for u, v in arr.tolist()), dtype=bool, count=len(arr)
        )
    deg = np.bincount(arr.ravel(), minlength=n).astype(np.float64)
    ext = np.bincount(arr[external].ravel(), minlength=n).astype(np.float64)
    per_node = np.full(n, np.nan)
    np.divide(ext, deg, out=per_node, where=deg > 0)
    covered = per_node[deg > 0]
    return MixingReport(per_node, float(covered.mean()) if covered.size else None)


def distinct_degree_count(degrees: np.ndarray | Sequence[int]) -> int:
    """Number of distinct values in a degree sequence; bounds the compressed Havel-Hakimi state."""
    arr = np.asarray(degrees, dtype=np.int64)
    return int(np.unique(arr).size)


MetricFn = Callable[[np.ndarray, int], float | None]

METRICS: dict[str, MetricFn] = {
    "triangles": lambda e, n: float(triangle_count(e, n)),
    "assortativity": degree_assortativity,
    "clustering": avg_local_clustering,
}


def measure(edges: np.ndarray, n: int) -> dict[str, float | None]:
    return {name: fn(edges, n) for name, fn in METRICS.items()}


# ---------------------------------------------------------------------------
# Ensemble convergence
# ---------------------------------------------------------------------------

@dataclass
class Snapshot:
    swaps_applied: int
    values: dict[str, float | None]


@dataclass
class EnsembleReport:
    """Per snapshot mean and unbiased standard deviation of every metric.

    ``mean[name][j]`` belongs to the snapshot after ``j * m`` swaps.
    """

    ensemble_size: int
    max_multiple: int
    m: int
    mean: dict[str, list[float]] = field(default_factory=dict)
    std: dict[str, list[float]] = field(default_factory=dict)
    convergence: dict[str, int | None] = field(default_factory=dict)

    def rows(self) -> list[tuple[str, int, float, float, int]]:
        out = []
        for name in self.mean:
            for j, (mu, sd) in enumerate(zip(self.mean[name], self.std[name], strict=True)):
                out.append((name, j, mu, sd, self.ensemble_size))
        return out


def convergence_point(means: Sequence[float], final_std: float, sustain: int = SUSTAIN_SNAPSHOTS) -> int | None:
    """First snapshot whose mean lies within half a standard deviation of the final mean and stays there.

    Args:
        means: Ensemble mean per snapshot
        final_std: Standard deviation of the final snapshot
        sustain: Number of consecutive snapshots that must qualify; a shorter tail never counts

    Returns:
        Snapshot index, or None if the metric is undefined or never settles
    """
    values = np.asarray(means, dtype=np.float64)
    if values.size == 0 or np.isnan(values[-1]):
        return None
    close = np.abs(values - values[-1]) <= final_std / 2
    for j in range(values.size - sustain + 1):
        if np.all(close[j:j + sustain]):
            return j
    return None


def _trajectory(args: tuple[np.ndarray, int, int, str, int, int]) -> list[Snapshot]:
    edges, n, max_multiple, sampler, seed, index = args
    rng = make_rng(seed, "trajectory", index)
    m = len(edges)
    if sampler == "cm":
        degrees = np.bincount(edges.ravel(), minlength=n)
        rewired = rewire_to_simple(cm_sample(degrees, rng), rng)
        if not rewired.success:
            raise LasVegasFailure(rewired.error or "configuration model repair failed", rewired.remaining_defects)
        edges = rewired.edges
    snaps = [Snapshot(0, measure(edges, n))]
    cfg = RunConfig.default(m)
    for j in range(1, max_multiple + 1):
        edges = sequential_swap_oracle(edges, draw_random_swaps(m, m, rng), run_size=cfg.run_size)
        snaps.append(Snapshot(j * m, measure(edges, n)))
    return snaps


def convergence_experiment(
    seed_graph: np.ndarray | Sequence[Sequence[int]],
    ensemble_size: int,
    max_multiple: int,
    sampler: str = "hh",
    seed: int = 0,
    n: int | None = None,
    jobs: int = 1,
) -> EnsembleReport:
    """Run independent swap trajectories from one graph and track metric statistics.

    Trajectory ``k`` draws its swaps from its own stream derived from
    ``seed``, so the report does not depend on ``jobs``. With ``sampler="cm"``
    every trajectory instead starts from its own configuration-model sample
    of the seed graph's degrees, repaired to a simple graph.

    Args:
        seed_graph: Sorted simple edge list to start from
        ensemble_size: Number of trajectories, at least 10
        max_multiple: Snapshots are taken after every ``m`` swaps up to ``max_multiple * m``
        sampler: ``"hh"`` or ``"cm"``
        seed: Root seed
        n: Node count (defaults to the largest id + 1)
        jobs: Worker processes

    Returns:
        EnsembleReport
    """
    if ensemble_size < MIN_ENSEMBLE:
        raise ValidationError(f"ensemble size must be at least {MIN_ENSEMBLE}, got {ensemble_size}")
    if max_multiple < 0:
        raise ValidationError(f"max_multiple must be non-negative, got {max_multiple}")
    if sampler not in ("hh", "cm"):
        raise ValidationError(f"sampler must be 'hh' or 'cm', got {sampler!r}")
    edges = as_edge_array(seed_graph)
    check_edge_list(edges, simple=True)
    size = _node_count(edges, n)
    m = len(edges)
    if m < 2 and (max_multiple or sampler == "cm"):
        raise ValidationError("need at least two edges to swap")

    tasks = [(edges, size, max_multiple, sampler, seed, k) for k in range(ensemble_size)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(_trajectory, tasks))
    else:
        runs = [_trajectory(t) for t in tasks]

    report = EnsembleReport(ensemble_size, max_multiple, m)
    for name in METRICS:
        table = np.array(
            [[np.nan if s.values[name] is None else s.values[name] for s in run] for run in runs],
            dtype=np.float64,
        )
        means: list[float] = []
        stds: list[float] = []
        for column in table.T:
            finite = column[~np.isnan(column)]
            means.append(float(finite.mean()) if finite.size else math.nan)
            stds.append(float(finite.std(ddof=1)) if finite.size > 1 else math.nan)
        report.mean[name] = means
        report.std[name] = stds
        report.convergence[name] = convergence_point(means, 0.0 if math.isnan(stds[-1]) else stds[-1])
        logger.info("%s converges at snapshot %s", name, report.convergence[name])
    return report
