"""Configuration-model sampling and repair to a simple graph."""

import enum
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from lfr_stream import settings
from lfr_stream.edge_swap import EdgeSwapper, RunConfig, as_edge_array, check_edge_list
from lfr_stream.errors import ValidationError
from lfr_stream.sampling import SeedLike, as_rng

logger = logging.getLogger(__name__)


def half_edges(degrees: np.ndarray | Sequence[int]) -> np.ndarray:
    """Node ``v`` repeated ``degrees[v]`` times."""
    arr = np.asarray(degrees, dtype=np.int64)
    if arr.size and arr.min() < 0:
        raise ValidationError("degrees must be non-negative")
    return np.repeat(np.arange(arr.size, dtype=np.int64), arr)


def match_half_edges(sequence: np.ndarray | Sequence[int]) -> np.ndarray:
    """Pair adjacent entries of a half-edge sequence into a sorted multigraph."""
    seq = np.asarray(sequence, dtype=np.int64)
    if seq.size % 2:
        raise ValidationError(f"half-edge count must be even, got {seq.size}")
    pairs = np.sort(seq.reshape(-1, 2), axis=1)
    return pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]


def cm_sample(degrees: np.ndarray | Sequence[int], seed: SeedLike) -> np.ndarray:
    """Uniform random perfect matching of the half-edges; may contain loops and multi-edges."""
    seq = half_edges(degrees)
    if seq.size % 2:
        raise ValidationError(f"degree sum must be even, got {seq.size}")
    rng = as_rng(seed, "cm")
    return match_half_edges(seq[rng.permutation(seq.size)])


def _moments(degrees: np.ndarray | Sequence[int]) -> tuple[float, float, int]:
    arr = np.asarray(degrees, dtype=np.float64)
    n = arr.size
    return float(arr.mean()), float((arr**2).mean()), n


def expected_self_loops(degrees: np.ndarray | Sequence[int]) -> float:
    """Expected loop count of :func:`cm_sample` on ``degrees``."""
    mean, sq, n = _moments(degrees)
    if n < 2:
        raise ValidationError("need at least two nodes")
    return (sq - mean) / (2.0 * (mean - 1.0 / n))


def expected_multi_edges(degrees: np.ndarray | Sequence[int]) -> float:
    """Upper bound on the expected number of multi-edges of :func:`cm_sample`."""
    mean, sq, n = _moments(degrees)
    if n < 4:
        raise ValidationError("need at least four nodes")
    return 0.5 * (sq - mean) ** 2 / ((mean - 1.0 / n) * (mean - 3.0 / n))


def pld_defect_bounds(a: int, b: int) -> tuple[float, float]:
    """Loop and multi-edge bounds for degrees drawn from the powerlaw on ``[a, b)`` with exponent 2."""
    if a < 1 or b <= a:
        raise ValidationError(f"invalid powerlaw range [{a}, {b})")
    x = (b - a + 1) / (math.log(b + 1) - math.log(a))
    return 0.5 * x, 0.5 * x * x


@dataclass
class MultiEdgeGroup:
    edge: tuple[int, int]
    multiplicity: int
    candidates: list[int]


@dataclass
class DefectReport:
    """Illegal edges of a sorted multigraph, by edge id."""

    self_loops: list[int] = field(default_factory=list)
    multi_groups: list[MultiEdgeGroup] = field(default_factory=list)

    @property
    def illegal_ids(self) -> list[int]:
        ids = list(self.self_loops)
        for group in self.multi_groups:
            ids.extend(group.candidates)
        return sorted(ids)

    @property
    def multi_edges(self) -> int:
        return sum(len(g.candidates) for g in self.multi_groups)

    def counts(self) -> dict[str, int]:
        return {"self_loops": len(self.self_loops), "multi_edges": self.multi_edges}

    def __bool__(self) -> bool:
        return bool(self.self_loops or self.multi_groups)


def find_illegal(edges: np.ndarray | Sequence[Sequence[int]]) -> DefectReport:
    """Single scan for loops and for all-but-one member of every parallel group.

    Args:
        edges: Sorted multigraph edge list

    Returns:
        DefectReport; loops are listed once each and never appear in a group
    """
    arr = as_edge_array(edges)
    check_edge_list(arr, simple=False)
    report = DefectReport()
    if len(arr) == 0:
        return report
    loops = arr[:, 0] == arr[:, 1]
    report.self_loops = np.flatnonzero(loops).tolist()
    same = np.r_[False, np.all(arr[1:] == arr[:-1], axis=1)]
    repeat = np.flatnonzero(same & ~loops)
    if repeat.size == 0:
        return report
    # Split the repeated ids into runs of consecutive positions.
    breaks = np.flatnonzero(np.diff(repeat) != 1) + 1
    for run in np.split(repeat, breaks):
        first = int(run[0]) - 1
        edge = (int(arr[first, 0]), int(arr[first, 1]))
        report.multi_groups.append(MultiEdgeGroup(edge, len(run) + 1, run.tolist()))
    return report


def count_defects(edges: np.ndarray) -> tuple[int, int]:
    """Vectorized (loops, surplus parallel edges) of a sorted multigraph."""
    if len(edges) == 0:
        return 0, 0
    loops = edges[:, 0] == edges[:, 1]
    same = np.all(edges[1:] == edges[:-1], axis=1) & ~loops[1:]
    return int(loops.sum()), int(same.sum())


class RepairPolicy(enum.StrEnum):
    DOUBLE = "double"
    SINGLE = "single"


@dataclass
class RewireResult:
    """Outcome of the Las-Vegas repair loop."""

    edges: np.ndarray
    success: bool
    rounds: int = 0
    swaps: int = 0
    remaining_defects: dict[str, int] = field(default_factory=dict)
    error: str | None = None


def _partner_ids(ids: np.ndarray, m: int, rng: np.random.Generator) -> np.ndarray:
    partner = rng.integers(0, m - 1, size=ids.size, dtype=np.int64)
    return partner + (partner >= ids)


def rewire_to_simple(
    edges: np.ndarray | Sequence[Sequence[int]],
    seed: SeedLike,
    policy: RepairPolicy = RepairPolicy.DOUBLE,
    max_rounds: int = settings.MAX_ROUNDS,
    swapper: EdgeSwapper | None = None,
) -> RewireResult:
    """Swap illegal edges with random partners until the multigraph is simple.

    Every round issues, per illegal edge, ``multiplier`` swaps with uniformly
    random partner edges and random directions, pads the run with random
    swaps up to ``m // 10`` operations and executes it, shuffled, as one
    multigraph run.
    The multiplier starts at 1 and doubles every round under
    ``RepairPolicy.DOUBLE``.

    Args:
        edges: Sorted multigraph
        seed: Seed or generator for partner and direction draws
        policy: Swaps-per-illegal-edge growth policy
        max_rounds: Bail out after this many rounds
        swapper: Pipeline instance to reuse (memory budget, spill dir)

    Returns:
        RewireResult; ``success`` is False when the round limit was hit
    """
    arr = as_edge_array(edges)
    check_edge_list(arr, simple=False)
    rng = as_rng(seed, "rewire")
    swapper = swapper or EdgeSwapper()
    m = len(arr)
    report = find_illegal(arr)
    rounds = 0
    total_swaps = 0
    multiplier = 1
    while report and rounds < max_rounds and m >= 2:
        rounds += 1
        ids = np.repeat(np.asarray(report.illegal_ids, dtype=np.int64), multiplier)
        partners = _partner_ids(ids, m, rng)
        dirs = rng.integers(0, 2, size=ids.size, dtype=np.int64)
        swaps = np.stack([ids, partners, dirs], axis=1)
        padding = max(0, m // 10 - len(swaps))
        if padding:
            a = rng.integers(0, m, size=padding, dtype=np.int64)
            b = _partner_ids(a, m, rng)
            swaps = np.vstack([swaps, np.stack([a, b, rng.integers(0, 2, size=padding, dtype=np.int64)], axis=1)])
        # Interleave the copies of each illegal id.
        swaps = swaps[rng.permutation(len(swaps))]
        arr = swapper.run_multigraph(arr, swaps, RunConfig(len(swaps)))
        total_swaps += len(swaps)
        report = find_illegal(arr)
        logger.debug("rewire round %d: %d swaps, defects %s", rounds, len(swaps), report.counts())
        if policy is RepairPolicy.DOUBLE:
            multiplier = min(multiplier * 2, max(1, m))

    if report:
        remaining = report.counts()
        logger.error("repair gave up after %d rounds, remaining defects %s", rounds, remaining)
        return RewireResult(
            edges=arr,
            success=False,
            rounds=rounds,
            swaps=total_swaps,
            remaining_defects=remaining,
            error=f"graph still has defects after {rounds} rounds",
        )
    return RewireResult(edges=arr, success=True, rounds=rounds, swaps=total_swaps)
