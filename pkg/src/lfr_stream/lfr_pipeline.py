"""End-to-end LFR benchmark generation.

Degrees and community sizes are sampled, every node's degree is split into
external and internal parts, nodes are assigned to communities, and then
the inter-community graph and one graph per community are realized and
randomized. Finally edges that violate the community structure are rewired
away and everything is merged with the ground truth attached.
"""

import enum
import logging
import math
from collections.abc import Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from lfr_stream import settings
from lfr_stream.community_assign import CommunityAssignment, assign_nodes
from lfr_stream.config_model import cm_sample, rewire_to_simple
from lfr_stream.edge_swap import (
    EdgeSwapper,
    RunConfig,
    apply_swaps,
    check_edge_list,
    draw_random_swaps,
    sequential_swap_oracle,
)
from lfr_stream.em_primitives import MemoryBudget
from lfr_stream.errors import LasVegasFailure, ValidationError
from lfr_stream.hh_gen import realize_any
from lfr_stream.sampling import (
    PldParams,
    even_split,
    make_rng,
    pld_inverse_cdf_array,
    randomized_round_array,
    sample_monotonic_pld,
)

logger = logging.getLogger(__name__)


class Sampler(enum.StrEnum):
    HH = "hh"
    CM = "cm"


STALL_ROUNDS = 3


@dataclass
class LfrParams:
    """Benchmark parameters; degree and size ranges are half-open ``[min, max)``."""

    n: int
    dmin: int = 10
    dmax: int = 50
    gamma: float = 2.0
    smin: int = 20
    smax: int = 100
    beta: float = 1.0
    mu: float = 0.2
    overlap_nodes: int = 0
    nu: int = 1
    sampler: Sampler = Sampler.HH
    swaps_factor: float = 10.0
    cm_swaps_factor: float = 5.0
    max_rounds: int = settings.MAX_ROUNDS
    drop_fraction: float = 1e-3
    inmemory_limit: int = settings.INMEMORY_SWAP_LIMIT

    def __post_init__(self) -> None:
        try:
            self.sampler = Sampler(self.sampler)
        except ValueError:
            raise ValidationError(f"sampler must be one of {[s.value for s in Sampler]}, got {self.sampler!r}") from None
        if self.n < 2:
            raise ValidationError(f"n must be >= 2, got {self.n}")
        if not 0.0 < self.mu < 1.0:
            raise ValidationError(f"mixing parameter mu must lie in (0, 1), got {self.mu}")
        if self.dmin < 1:
            raise ValidationError(f"dmin must be >= 1, got {self.dmin}")
        if self.dmax <= self.dmin:
            raise ValidationError(f"dmax ({self.dmax}) must exceed dmin ({self.dmin})")
        if self.dmax > self.n:
            raise ValidationError(f"dmax ({self.dmax}) must not exceed n ({self.n}); degrees are below dmax")
        if self.smin < 1 or self.smax <= self.smin:
            raise ValidationError(f"community sizes need 1 <= smin < smax, got [{self.smin}, {self.smax})")
        if self.smax > self.n + 1:
            raise ValidationError(f"smax ({self.smax}) must not exceed n + 1")
        if not 0 <= self.overlap_nodes <= self.n:
            raise ValidationError(f"overlap_nodes must lie in [0, n], got {self.overlap_nodes}")
        if self.nu < 1:
            raise ValidationError(f"nu must be >= 1, got {self.nu}")
        if self.gamma < 1 or self.beta < 1:
            raise ValidationError("powerlaw exponents gamma and beta must be >= 1")
        if self.swaps_factor < 0 or self.cm_swaps_factor < 0:
            raise ValidationError("swap factors must be non-negative")
        if not 0.0 <= self.drop_fraction < 1.0:
            raise ValidationError(f"drop_fraction must lie in [0, 1), got {self.drop_fraction}")

    @property
    def degree_params(self) -> PldParams:
        return PldParams(self.dmin, self.dmax, self.gamma)

    @property
    def size_params(self) -> PldParams:
        return PldParams(self.smin, self.smax, self.beta)

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["sampler"] = self.sampler.value
        return data

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "LfrParams":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValidationError(f"unknown LFR parameters: {', '.join(unknown)}")
        if "n" not in data:
            raise ValidationError("LFR parameters need 'n'")
        return cls(**dict(data))

    @classmethod
    def from_yaml(cls, path: str | Path) -> "LfrParams":
        return cls.from_mapping(load_param_file(path))

    @staticmethod
    def preset_values(name: str, n: int, nu: int = 1) -> dict[str, Any]:
        """Parameter values of the two standard scenarios, clamped to ``n``.

        ``lin``: bounds grow linearly with ``n``, every node overlaps.
        ``const``: fixed bounds, no overlap.
        """
        if name == "lin":
            values: dict[str, Any] = {
                "dmin": 10 * nu, "dmax": n * nu // 20, "gamma": 2.0,
                "smin": 20, "smax": n // 10, "beta": 1.0,
                "overlap_nodes": n if nu > 1 else 0, "nu": nu,
            }
        elif name == "const":
            values = {
                "dmin": 50, "dmax": 10_000, "gamma": 2.0,
                "smin": 50, "smax": 12_000, "beta": 1.0,
                "overlap_nodes": 0, "nu": 1,
            }
        else:
            raise ValidationError(f"unknown preset {name!r}; expected 'lin' or 'const'")
        values["dmax"] = max(min(values["dmax"], n), 2)
        values["dmin"] = min(values["dmin"], values["dmax"] - 1)
        values["smax"] = max(min(values["smax"], n + 1), 2)
        values["smin"] = min(values["smin"], values["smax"] - 1)
        return values

    @classmethod
    def preset(cls, name: str, n: int, nu: int = 1, **overrides: Any) -> "LfrParams":
        return cls(n=n, **{**cls.preset_values(name, n, nu), **overrides})


def load_param_file(path: str | Path) -> dict[str, Any]:
    """Read a YAML mapping of LfrParams fields; unknown keys are rejected, missing ones allowed."""
    try:
        with open(path) as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise ValidationError(f"cannot read {path}: {e.strerror or e}") from e
    except yaml.YAMLError as e:
        raise ValidationError(f"cannot parse {path}: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ValidationError(f"{path} must contain a mapping of parameters")
    unknown = sorted(set(data) - {f.name for f in fields(LfrParams)})
    if unknown:
        raise ValidationError(f"unknown LFR parameters in {path}: {', '.join(unknown)}")
    return data


# ---------------------------------------------------------------------------
# Sampling the plan
# ---------------------------------------------------------------------------

@dataclass
class NodePlan:
    degrees: np.ndarray
    nu: np.ndarray
    d_ext: np.ndarray
    d_in: np.ndarray

    @property
    def constraint(self) -> np.ndarray:
        """Largest internal degree any single membership of the node can receive."""
        return -(-self.d_in // self.nu)


def sample_node_plan(params: LfrParams, seed: int | np.random.Generator) -> NodePlan:
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed, "plan")
    degrees = sample_monotonic_pld(params.n, params.degree_params, rng)
    nu = np.ones(params.n, dtype=np.int64)
    if params.overlap_nodes:
        nu[rng.choice(params.n, size=params.overlap_nodes, replace=False)] = params.nu
    d_ext = randomized_round_array(params.mu * degrees, rng)
    return NodePlan(degrees=degrees, nu=nu, d_ext=d_ext, d_in=degrees - d_ext)


def sample_community_sizes(params: LfrParams, total: int, seed: int | np.random.Generator) -> np.ndarray:
    """Draw powerlaw community sizes summing exactly to ``total``, returned non-increasing.

    The overshoot of the last draw is taken from the largest community when
    it stays at least ``smin``, otherwise one unit at a time from every
    community above ``smin``. If even that is impossible the last community
    is replaced by the exact deficit, or, when the deficit is below ``smin``,
    the deficit is spread over the others (never beyond ``smax``).
    """
    if total < params.smin:
        raise ValidationError(f"{total} memberships cannot fill a community of at least {params.smin}")
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed, "sizes")
    sp = params.size_params
    drawn: list[int] = []
    acc = 0
    while acc < total:
        need = total - acc
        chunk = pld_inverse_cdf_array(rng.random(need // params.smin + 1), sp)
        csum = np.cumsum(chunk)
        cut = min(int(np.searchsorted(csum, need, side="left")) + 1, chunk.size)
        drawn.extend(chunk[:cut].tolist())
        acc += int(csum[cut - 1])
    sizes = np.asarray(drawn, dtype=np.int64)
    over = acc - total
    if over:
        largest = int(np.argmax(sizes))
        if sizes[largest] - over >= params.smin:
            sizes[largest] -= over
        elif int((sizes - params.smin).sum()) >= over:
            while over:
                for i in np.argsort(-sizes, kind="stable").tolist():
                    if over and sizes[i] > params.smin:
                        sizes[i] -= 1
                        over -= 1
        else:
            sizes = sizes[:-1]
            deficit = total - int(sizes.sum())
            if deficit >= params.smin:
                sizes = np.append(sizes, deficit)
            else:
                if sizes.size == 0 or int((params.smax - sizes).sum()) < deficit:
                    raise ValidationError(
                        f"cannot split {total} memberships into communities of size [{params.smin}, {params.smax}]"
                    )
                while deficit:
                    for i in np.argsort(sizes, kind="stable").tolist():
                        if deficit and sizes[i] < params.smax:
                            sizes[i] += 1
                            deficit -= 1
        logger.debug("community sizes adjusted for an overshoot of %d", acc - total)
    return np.sort(sizes)[::-1].copy()


# ---------------------------------------------------------------------------
# Graph construction
# ---------------------------------------------------------------------------

class _Memberships:
    """Answers "do u and v share a community" for edge arrays."""

    def __init__(self, assignment: CommunityAssignment) -> None:
        counts = assignment.memberships_per_node()
        self.disjoint = counts.size == 0 or int(counts.max()) <= 1
        if self.disjoint:
            self.comm = np.full(assignment.n_nodes, -1, dtype=np.int64)
            self.comm[assignment.nodes] = assignment.communities
        else:
            self.sets = assignment.node_sets()

    def shared(self, edges: np.ndarray) -> np.ndarray:
        if len(edges) == 0:
            return np.zeros(0, dtype=bool)
        if self.disjoint:
            cu, cv = self.comm[edges[:, 0]], self.comm[edges[:, 1]]
            return (cu == cv) & (cu >= 0)
        return np.fromiter(
            (not self.sets[u].isdisjoint(self.sets[v]) for u, v in edges.tolist()),
            dtype=bool,
            count=len(edges),
        )


def _randomize(
    edges: np.ndarray,
    n: int,
    params: LfrParams,
    rng: np.random.Generator,
    swapper: EdgeSwapper,
    in_memory: bool,
) -> tuple[np.ndarray, int]:
    """Randomize a realized graph per the sampler; returns (edges, repair rounds)."""
    rounds = 0
    factor = params.swaps_factor
    if params.sampler is Sampler.CM and len(edges):
        degrees = np.bincount(edges.ravel(), minlength=n)
        rewired = rewire_to_simple(cm_sample(degrees, rng), rng, max_rounds=params.max_rounds, swapper=swapper)
        if not rewired.success:
            raise LasVegasFailure(rewired.error or "configuration model repair failed", rewired.remaining_defects)
        edges, rounds = rewired.edges, rewired.rounds
        factor = params.cm_swaps_factor
    m = len(edges)
    k = int(round(factor * m))
    if m >= 2 and k:
        edges = apply_swaps(edges, draw_random_swaps(m, k, rng), RunConfig.default(m), in_memory, swapper)
    return edges, rounds


@dataclass
class GlobalGraph:
    edges: np.ndarray
    unmet_half_edges: int = 0
    repair_rounds: int = 0
    rewire_rounds: int = 0
    dropped_edges: int = 0


def build_global_graph(
    d_ext: np.ndarray,
    ground_truth: CommunityAssignment,
    params: LfrParams,
    seed: int,
    budget: MemoryBudget | None = None,
) -> GlobalGraph:
    """Realize and randomize the inter-community graph, then rewire edges inside communities away.

    Each rewiring round swaps every forbidden edge with a random partner and
    rescans only the edges written by that round.
    """
    rng = make_rng(seed, "global")
    swapper = EdgeSwapper(budget)
    n = int(d_ext.size)
    edges, unmet = realize_any(d_ext)
    edges, repair_rounds = _randomize(edges, n, params, rng, swapper, in_memory=False)

    members = _Memberships(ground_truth)
    m = len(edges)
    bad = np.flatnonzero(members.shared(edges))
    rounds = 0
    while bad.size and rounds < params.max_rounds and m >= 2:
        rounds += 1
        partners = rng.integers(0, m - 1, size=bad.size, dtype=np.int64)
        partners += partners >= bad
        swaps = np.stack([bad, partners, rng.integers(0, 2, size=bad.size, dtype=np.int64)], axis=1)
        edges = swapper.run(edges, swaps, RunConfig(len(swaps)))
        touched = np.asarray(sorted(swapper.touched), dtype=np.int64).reshape(-1, 2)
        suspects = touched[members.shared(touched)]
        keys = edges[:, 0] * n + edges[:, 1]
        bad = np.searchsorted(keys, suspects[:, 0] * n + suspects[:, 1])
        logger.debug("global rewiring round %d: %d forbidden edges left", rounds, bad.size)

    dropped = int(bad.size)
    if dropped:
        logger.warning("dropping %d intra-community edges from the global graph after %d rounds", dropped, rounds)
        edges = np.delete(edges, bad, axis=0)
    return GlobalGraph(edges, int(unmet.sum()), repair_rounds, rounds, dropped)


@dataclass
class IntraGraph:
    community: int
    edges: np.ndarray
    unmet_half_edges: int = 0


def _community_slices(ground_truth: CommunityAssignment, shares: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    order = np.lexsort((ground_truth.nodes, ground_truth.communities))
    comms = ground_truth.communities[order]
    bounds = np.searchsorted(comms, np.arange(ground_truth.n_communities + 1))
    nodes, degs = ground_truth.nodes[order], shares[order]
    return [(nodes[bounds[c]:bounds[c + 1]], degs[bounds[c]:bounds[c + 1]]) for c in range(ground_truth.n_communities)]


def _build_one_intra(args: tuple[int, np.ndarray, np.ndarray, LfrParams, int, MemoryBudget | None]) -> IntraGraph:
    community, members, degrees, params, seed, budget = args
    rng = make_rng(seed, "intra", community)
    local, unmet = realize_any(degrees)
    if unmet.sum():
        logger.debug("community %d: %d internal half-edges unmet", community, int(unmet.sum()))
    local, _ = _randomize(
        local, int(members.size), params, rng, EdgeSwapper(budget), in_memory=members.size < params.inmemory_limit
    )
    # members is ascending, so relabelling keeps the list sorted.
    return IntraGraph(community, members[local] if local.size else local, int(unmet.sum()))


def build_intra_graphs(
    shares: np.ndarray,
    ground_truth: CommunityAssignment,
    params: LfrParams,
    seed: int,
    budget: MemoryBudget | None = None,
    jobs: int = 1,
) -> list[IntraGraph]:
    """Realize one randomized simple graph per community.

    Args:
        shares: Internal degree of every membership, aligned with ``ground_truth`` pairs
        ground_truth: Community assignment
        params: Benchmark parameters (sampler, swap factors, in-memory threshold)
        seed: Root seed; community ``c`` uses its own derived stream
        budget: Memory budget for the batched swapper
        jobs: Worker processes; the output does not depend on it

    Returns:
        One IntraGraph per community, in community order
    """
    tasks = [
        (c, members, degrees, params, seed, budget)
        for c, (members, degrees) in enumerate(_community_slices(ground_truth, shares))
    ]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_build_one_intra, tasks))
    return [_build_one_intra(t) for t in tasks]


@dataclass
class MergeResult:
    edges: np.ndarray
    rounds: int = 0
    dropped: int = 0
    duplicates_initial: int = 0


def _owners(graphs: dict[int, np.ndarray]) -> dict[tuple[int, int], list[int]]:
    owners: dict[tuple[int, int], list[int]] = {}
    for c, edges in graphs.items():
        for u, v in edges.tolist():
            owners.setdefault((u, v), []).append(c)
    return {e: cs for e, cs in owners.items() if len(cs) > 1}


def _drop_copies(graphs: dict[int, np.ndarray], dups: dict[tuple[int, int], list[int]], limit: int) -> int:
    removed = 0
    doomed: dict[int, set[tuple[int, int]]] = {}
    for e, cs in dups.items():
        for c in cs[1:]:
            if removed >= limit:
                break
            doomed.setdefault(c, set()).add(e)
            removed += 1
    for c, edges_out in doomed.items():
        keep = [row for row in graphs[c].tolist() if (row[0], row[1]) not in edges_out]
        graphs[c] = np.asarray(keep, dtype=np.int64).reshape(-1, 2)
    return removed


def community_rewire_and_merge(
    intra: Sequence[IntraGraph],
    ground_truth: CommunityAssignment,
    seed: int,
    max_rounds: int = settings.MAX_ROUNDS,
    drop_fraction: float = 1e-3,
) -> MergeResult:
    """Merge community graphs, removing edges that appear in more than one community.

    Every copy but one of a duplicated edge is swapped with a random partner
    from its own community, and each affected community receives as many
    extra random swaps. After ``STALL_ROUNDS`` rounds without progress up to
    ``ceil(drop_fraction * m)`` copies are dropped. Copies left over at the
    round limit are dropped too while the budget lasts; beyond it the merge
    fails with :class:`LasVegasFailure`.
    """
    graphs = {g.community: g.edges for g in intra}
    stacked = [g.edges for g in intra if len(g.edges)]
    m_total = sum(len(e) for e in stacked)
    disjoint = len(ground_truth) == 0 or int(ground_truth.memberships_per_node().max()) <= 1
    if disjoint:
        merged = np.concatenate(stacked) if stacked else np.empty((0, 2), dtype=np.int64)
        return MergeResult(merged[np.lexsort((merged[:, 1], merged[:, 0]))])

    rng = make_rng(seed, "merge")
    budget = math.ceil(drop_fraction * m_total)
    dropped = rounds = stall = 0
    best = math.inf
    dups = _owners(graphs)
    initial = sum(len(cs) - 1 for cs in dups.values())
    while dups and rounds < max_rounds:
        surplus = sum(len(cs) - 1 for cs in dups.values())
        if surplus < best:
            best, stall = surplus, 0
        else:
            stall += 1
        if stall >= STALL_ROUNDS:
            if dropped >= budget:
                break
            dropped += _drop_copies(graphs, dups, budget - dropped)
            stall = 0
            dups = _owners(graphs)
            continue
        rounds += 1
        candidates: dict[int, list[tuple[int, int]]] = {}
        for e, cs in dups.items():
            for c in cs[1:]:
                candidates.setdefault(c, []).append(e)
        for c, edges_c in sorted(candidates.items()):
            g = graphs[c]
            m = len(g)
            if m < 2:
                continue
            width = int(g.max()) + 1
            keys = g[:, 0] * width + g[:, 1]
            ids = np.searchsorted(keys, np.asarray([u * width + v for u, v in edges_c], dtype=np.int64))
            partners = rng.integers(0, m - 1, size=ids.size, dtype=np.int64)
            partners += partners >= ids
            extra_a = rng.integers(0, m, size=ids.size, dtype=np.int64)
            extra_b = rng.integers(0, m - 1, size=ids.size, dtype=np.int64)
            extra_b += extra_b >= extra_a
            swaps = np.vstack([
                np.stack([ids, partners, rng.integers(0, 2, size=ids.size, dtype=np.int64)], axis=1),
                np.stack([extra_a, extra_b, rng.integers(0, 2, size=ids.size, dtype=np.int64)], axis=1),
            ])
            graphs[c] = sequential_swap_oracle(g, swaps, run_size=len(swaps))
        dups = _owners(graphs)
        logger.debug("community rewiring round %d: %d duplicated edges", rounds, len(dups))

    stacked = [g for g in graphs.values() if len(g)]
    merged = np.concatenate(stacked) if stacked else np.empty((0, 2), dtype=np.int64)
    unique = np.unique(merged, axis=0)
    leftover = len(merged) - len(unique)
    if dropped + leftover > budget:
        logger.error("%d duplicated community edges remain after %d rounds, drop budget is %d", leftover, rounds, budget)
        raise LasVegasFailure(
            f"{leftover} duplicated community edges could not be rewired within the drop budget of {budget}",
            {"duplicated_edges": leftover, "merge_dropped_edges": dropped},
        )
    if leftover:
        logger.warning("collapsing %d duplicated community edges that could not be rewired", leftover)
    return MergeResult(unique, rounds, dropped + leftover, initial)


# ---------------------------------------------------------------------------
# Whole benchmark
# ---------------------------------------------------------------------------

@dataclass
class LfrAudit:
    """Counters written as one JSON line next to every generated benchmark."""

    seed: int
    n: int
    m: int = 0
    communities: int = 0
    global_edges: int = 0
    intra_edges: int = 0
    unmet_global_half_edges: int = 0
    unmet_intra_half_edges: int = 0
    global_repair_rounds: int = 0
    global_rewire_rounds: int = 0
    global_dropped_edges: int = 0
    merge_rounds: int = 0
    merge_duplicates: int = 0
    merge_dropped_edges: int = 0
    deferred_memberships: int = 0
    mean_mixing: float | None = None
    params: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class LfrGraph:
    edges: np.ndarray
    ground_truth: CommunityAssignment
    degrees: np.ndarray
    external_degrees: np.ndarray
    internal_degrees: np.ndarray
    audit: LfrAudit


def membership_shares(ground_truth: CommunityAssignment, d_in: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Split each node's internal degree evenly over its memberships, aligned with the pairs."""
    counts = ground_truth.memberships_per_node()
    shares = d_in[ground_truth.nodes].astype(np.int64)
    multi = np.flatnonzero(counts > 1)
    if multi.size:
        starts = np.searchsorted(ground_truth.nodes, multi)
        for v, lo in zip(multi.tolist(), starts.tolist(), strict=True):
            k = int(counts[v])
            shares[lo:lo + k] = even_split(int(d_in[v]), k, rng)
    return shares


def build_lfr(params: LfrParams, seed: int, budget: MemoryBudget | None = None, jobs: int = 1) -> LfrGraph:
    """Generate one benchmark instance; identical ``(params, seed)`` give identical output."""
    from lfr_stream.metrics import realized_mixing

    plan = sample_node_plan(params, make_rng(seed, "plan"))
    total = int(plan.nu.sum())
    sizes = sample_community_sizes(params, total, make_rng(seed, "sizes"))
    logger.info("n=%d: %d memberships in %d communities", params.n, total, sizes.size)

    assigned = assign_nodes(sizes, plan.constraint, plan.nu, make_rng(seed, "assign"))
    if not assigned.success or assigned.assignment is None:
        raise LasVegasFailure(
            assigned.error or "community assignment failed", {"deferred_memberships": assigned.deferred}
        )
    truth = assigned.assignment
    shares = membership_shares(truth, plan.d_in, make_rng(seed, "shares"))

    global_graph = build_global_graph(plan.d_ext, truth, params, seed, budget)
    intra = build_intra_graphs(shares, truth, params, seed, budget, jobs)
    merged = community_rewire_and_merge(intra, truth, seed, params.max_rounds, params.drop_fraction)

    edges = np.concatenate([global_graph.edges, merged.edges])
    edges = edges[np.lexsort((edges[:, 1], edges[:, 0]))] if len(edges) else edges.reshape(0, 2)
    check_edge_list(edges, simple=True)

    degrees = np.bincount(edges.ravel(), minlength=params.n)
    external = np.bincount(global_graph.edges.ravel(), minlength=params.n)
    audit = LfrAudit(
        seed=seed,
        n=params.n,
        m=len(edges),
        communities=int(sizes.size),
        global_edges=len(global_graph.edges),
        intra_edges=len(merged.edges),
        unmet_global_half_edges=global_graph.unmet_half_edges,
        unmet_intra_half_edges=sum(g.unmet_half_edges for g in intra),
        global_repair_rounds=global_graph.repair_rounds,
        global_rewire_rounds=global_graph.rewire_rounds,
        global_dropped_edges=global_graph.dropped_edges,
        merge_rounds=merged.rounds,
        merge_duplicates=merged.duplicates_initial,
        merge_dropped_edges=merged.dropped,
        deferred_memberships=assigned.deferred,
        mean_mixing=realized_mixing(edges, truth).mean,
        params=params.to_dict(),
    )
    return LfrGraph(edges, truth, degrees, external, degrees - external, audit)
