"""Community assignment with exact sizes and the size constraint ``s > d_in``.

Communities are indexed by decreasing size. A node whose (per membership)
internal degree is ``d`` may join any community among the first ``p``,
``p = #{c : s_c > d}``. Nodes are processed from the most to the least
constrained; each draws a community with probability proportional to its
remaining free slots, restricted to its feasible prefix, using a complete
binary tree of left-subtree weights.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from lfr_stream.errors import ValidationError
from lfr_stream.sampling import SeedLike, as_rng

logger = logging.getLogger(__name__)

RESAMPLE_ATTEMPTS = 50
POOL_FACTOR = 4
REPAIR_ATTEMPTS = 1000


class CommunityWeightTree:
    """Complete binary tree over ``C`` leaves; inner nodes store their left-subtree weight."""

    def __init__(self, sizes: np.ndarray | Sequence[int]) -> None:
        leaves = np.asarray(sizes, dtype=np.int64)
        if leaves.size == 0:
            raise ValidationError("need at least one community")
        if leaves.min() < 0:
            raise ValidationError("community sizes must be non-negative")
        self.C = int(leaves.size)
        self._width = 1
        while self._width < self.C:
            self._width *= 2
        self._leaf = np.zeros(self._width, dtype=np.int64)
        self._leaf[: self.C] = leaves
        self._left = np.zeros(self._width, dtype=np.int64)
        self.total = int(leaves.sum())
        # Heap layout: node i has children 2i and 2i+1, leaves sit at width + j.
        sums = np.concatenate([np.zeros(self._width, dtype=np.int64), self._leaf])
        for node in range(self._width - 1, 0, -1):
            sums[node] = sums[2 * node] + sums[2 * node + 1]
            self._left[node] = sums[2 * node]

    def weight(self, leaf: int) -> int:
        return int(self._leaf[leaf])

    def find(self, y: int) -> int:
        """Leaf whose cumulative weight interval contains ``y`` (``0 <= y < total``)."""
        node = 1
        while node < self._width:
            left = int(self._left[node])
            if y < left:
                node = 2 * node
            else:
                y -= left
                node = 2 * node + 1
        return node - self._width

    def decrement(self, leaf: int) -> None:
        if self._leaf[leaf] <= 0:
            raise ValidationError(f"community {leaf} has no free slot")
        self._leaf[leaf] -= 1
        self.total -= 1
        node = leaf + self._width
        while node > 1:
            if node % 2 == 0:
                self._left[node // 2] -= 1
            node //= 2

    def prefix_weight(self, p: int) -> int:
        """Total weight of leaves ``0 .. p-1``."""
        if p <= 0:
            return 0
        if p >= self.C:
            return self.total
        # Walk towards leaf p and add every left sibling passed on the way.
        acc, node, lo, span = 0, 1, 0, self._width
        while node < self._width:
            span //= 2
            if p < lo + span:
                node = 2 * node
            else:
                acc += int(self._left[node])
                lo += span
                node = 2 * node + 1
        return acc

    def sample(self, limit: int, rng: np.random.Generator) -> int:
        if limit <= 0:
            raise ValidationError("no feasible community with a free slot")
        return self.find(int(rng.integers(limit)))


def tree_sample_and_decrement(tree: CommunityWeightTree, limit: int, rng: np.random.Generator) -> int:
    """Draw a community proportional to free slots within the first ``limit`` weight units and take one slot."""
    leaf = tree.sample(limit, rng)
    tree.decrement(leaf)
    return leaf


def _validate_non_increasing(values: np.ndarray, what: str) -> None:
    if values.size > 1 and np.any(np.diff(values) > 0):
        raise ValidationError(f"{what} must be non-increasing")


def compute_pv(sizes: np.ndarray | Sequence[int], din: np.ndarray | Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """Feasible community count and initial feasible weight per node.

    Args:
        sizes: Community sizes, non-increasing
        din: Constraint degrees, non-increasing

    Returns:
        ``(p, W)`` where node ``v`` may join communities ``0 .. p[v]-1``
        and ``W[v]`` is their total size
    """
    s = np.asarray(sizes, dtype=np.int64)
    d = np.asarray(din, dtype=np.int64)
    _validate_non_increasing(s, "community sizes")
    _validate_non_increasing(d, "internal degrees")
    # s is non-increasing, so #{c : s_c > d} is a search in the reversed array.
    p = s.size - np.searchsorted(s[::-1], d, side="right")
    if p.size and p.min() == 0:
        worst = int(d.max())
        raise ValidationError(f"internal degree {worst} does not fit the largest community ({int(s[0])})")
    prefix = np.cumsum(s)
    return p.astype(np.int64), prefix[p - 1] if p.size else np.empty(0, dtype=np.int64)


@dataclass
class CommunityAssignment:
    """Sorted (node, community) membership pairs."""

    nodes: np.ndarray
    communities: np.ndarray
    n_nodes: int
    n_communities: int

    @classmethod
    def from_pairs(cls, nodes: Sequence[int] | np.ndarray, communities: Sequence[int] | np.ndarray,
                   n_nodes: int | None = None, n_communities: int | None = None) -> "CommunityAssignment":
        nd = np.asarray(nodes, dtype=np.int64)
        cm = np.asarray(communities, dtype=np.int64)
        order = np.lexsort((cm, nd))
        nd, cm = nd[order], cm[order]
        return cls(
            nodes=nd,
            communities=cm,
            n_nodes=n_nodes if n_nodes is not None else (int(nd.max()) + 1 if nd.size else 0),
            n_communities=n_communities if n_communities is not None else (int(cm.max()) + 1 if cm.size else 0),
        )

    def __len__(self) -> int:
        return int(self.nodes.size)

    def community_sizes(self) -> np.ndarray:
        return np.bincount(self.communities, minlength=self.n_communities)

    def memberships_per_node(self) -> np.ndarray:
        return np.bincount(self.nodes, minlength=self.n_nodes)

    def communities_of(self, node: int) -> list[int]:
        lo, hi = np.searchsorted(self.nodes, [node, node + 1])
        return self.communities[lo:hi].tolist()

    def members(self, community: int) -> np.ndarray:
        return np.sort(self.nodes[self.communities == community])

    def node_sets(self) -> list[frozenset[int]]:
        bounds = np.searchsorted(self.nodes, np.arange(self.n_nodes + 1))
        return [frozenset(self.communities[bounds[v]:bounds[v + 1]].tolist()) for v in range(self.n_nodes)]

    def duplicates(self) -> int:
        if len(self) < 2:
            return 0
        same = (self.nodes[1:] == self.nodes[:-1]) & (self.communities[1:] == self.communities[:-1])
        return int(same.sum())

    def violations(self, sizes: np.ndarray | Sequence[int], constraint: np.ndarray | Sequence[int]) -> list[str]:
        """Human-readable list of broken size, constraint and duplicate rules (empty when valid)."""
        s = np.asarray(sizes, dtype=np.int64)
        c = np.asarray(constraint, dtype=np.int64)
        problems: list[str] = []
        got = np.bincount(self.communities, minlength=s.size)
        if got.size != s.size or np.any(got != s):
            problems.append("community sizes differ from the requested sizes")
        bad = s[self.communities] <= c[self.nodes]
        if np.any(bad):
            problems.append(f"{int(bad.sum())} memberships in communities not larger than the internal degree")
        if self.duplicates():
            problems.append(f"{self.duplicates()} duplicate memberships")
        return problems


@dataclass
class MembershipRepairResult:
    assignment: CommunityAssignment
    success: bool
    swaps: int = 0
    remaining: int = 0
    error: str | None = None


def repair_duplicate_memberships(
    assignment: CommunityAssignment,
    feasible: np.ndarray | Sequence[int],
    seed: SeedLike,
    attempts: int = REPAIR_ATTEMPTS,
) -> MembershipRepairResult:
    """Remove duplicate (node, community) pairs by exchanging communities with random memberships.

    An exchange of memberships ``(v, c)`` and ``(w, k)`` is accepted when ``k``
    is feasible for and new to ``v`` and ``c`` is feasible for and new to ``w``,
    so sizes and constraints are preserved.

    Args:
        assignment: Assignment possibly holding duplicate pairs
        feasible: Per node count ``p`` of feasible communities
        seed: Seed or generator
        attempts: Random partners tried per duplicate before giving up

    Returns:
        MembershipRepairResult; ``success`` is False if a duplicate could not be removed
    """
    rng = as_rng(seed, "membership-repair")
    p = np.asarray(feasible, dtype=np.int64)
    nodes = assignment.nodes.tolist()
    comms = assignment.communities.tolist()
    held: dict[int, dict[int, int]] = {}
    for v, c in zip(nodes, comms, strict=True):
        held.setdefault(v, {})
        held[v][c] = held[v].get(c, 0) + 1
    dup_idx = [i for i in range(1, len(nodes)) if nodes[i] == nodes[i - 1] and comms[i] == comms[i - 1]]
    swaps = 0
    failed = 0
    total = len(nodes)
    for i in dup_idx:
        v, c = nodes[i], comms[i]
        for j in rng.integers(0, total, size=attempts).tolist():
            w, k = nodes[j], comms[j]
            if k == c or w == v:
                continue
            if k >= p[v] or k in held[v] or c >= p[w] or c in held[w]:
                continue
            held[v][c] -= 1
            held[v][k] = 1
            held[w][k] -= 1
            if held[w][k] == 0:
                del held[w][k]
            held[w][c] = 1
            comms[i], comms[j] = k, c
            swaps += 1
            break
        else:
            failed += 1
    repaired = CommunityAssignment.from_pairs(nodes, comms, assignment.n_nodes, assignment.n_communities)
    if failed:
        logger.error("could not remove %d duplicate memberships", failed)
        return MembershipRepairResult(
            repaired, False, swaps, failed, error=f"{failed} duplicate memberships left after {attempts} attempts each"
        )
    return MembershipRepairResult(repaired, True, swaps)


@dataclass
class AssignmentResult:
    success: bool
    assignment: CommunityAssignment | None = None
    deferred: int = 0
    endgame_moves: int = 0
    repaired: int = 0
    error: str | None = None
    feasible: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))


def assign(
    sizes: np.ndarray | Sequence[int],
    din: np.ndarray | Sequence[int],
    nu: np.ndarray | Sequence[int],
    seed: SeedLike,
) -> AssignmentResult:
    """Assign ``nu[v]`` distinct communities to every node ``v``.

    Args:
        sizes: Community sizes, non-increasing; must sum to ``sum(nu)``
        din: Per-membership constraint degree of every node, non-increasing
        nu: Memberships per node
        seed: Seed or generator

    Returns:
        AssignmentResult with the assignment, or ``success=False`` and an error
    """
    s = np.asarray(sizes, dtype=np.int64)
    d = np.asarray(din, dtype=np.int64)
    k = np.asarray(nu, dtype=np.int64)
    if d.size != k.size:
        raise ValidationError("internal degrees and memberships must have equal length")
    if k.size and k.min() < 1:
        raise ValidationError("every node needs at least one membership")
    if int(s.sum()) != int(k.sum()):
        raise ValidationError(f"community sizes sum to {int(s.sum())} but nodes need {int(k.sum())} memberships")
    p, _ = compute_pv(s, d)
    if np.any(k > p):
        v = int(np.flatnonzero(k > p)[0])
        raise ValidationError(f"node {v} needs {int(k[v])} communities but only {int(p[v])} are large enough")
    rng = as_rng(seed, "assign")
    tree = CommunityWeightTree(s)
    n = int(k.size)
    held: list[set[int]] = [set() for _ in range(n)]
    pool_limit = min(int(k.sum()), POOL_FACTOR * int(s.size) * int(k.max(initial=1)))
    pending: list[int] = []

    for v in range(n):
        pv = int(p[v])
        for _ in range(int(k[v])):
            limit = tree.prefix_weight(pv)
            chosen = -1
            if limit > 0:
                for _ in range(RESAMPLE_ATTEMPTS):
                    c = tree.sample(limit, rng)
                    if c not in held[v]:
                        chosen = c
                        break
            if chosen < 0:
                pending.append(v)
                if len(pending) > pool_limit:
                    return AssignmentResult(False, deferred=len(pending), feasible=p,
                                            error=f"more than {pool_limit} memberships deferred")
                continue
            tree.decrement(chosen)
            held[v].add(chosen)

    duplicates: list[tuple[int, int]] = []
    moves = 0
    for v in pending:
        c, moved = _place_deferred(v, p, held, tree, rng)
        moves += moved
        if c is None:
            return AssignmentResult(False, deferred=len(pending), feasible=p,
                                    error=f"no feasible community left for node {v}")
        if c in held[v]:
            duplicates.append((v, c))
        else:
            held[v].add(c)
    if pending:
        logger.debug("endgame placed %d deferred memberships with %d moves", len(pending), moves)

    pairs_v = [v for v in range(n) for _ in held[v]] + [v for v, _ in duplicates]
    pairs_c = [c for v in range(n) for c in sorted(held[v])] + [c for _, c in duplicates]
    result = CommunityAssignment.from_pairs(pairs_v, pairs_c, n, int(s.size))
    repaired = 0
    if duplicates:
        fix = repair_duplicate_memberships(result, p, rng)
        if not fix.success:
            return AssignmentResult(False, fix.assignment, len(pending), moves, fix.swaps, fix.error, p)
        result, repaired = fix.assignment, fix.swaps
    return AssignmentResult(True, result, len(pending), moves, repaired, feasible=p)


def _place_deferred(
    v: int,
    p: np.ndarray,
    held: list[set[int]],
    tree: CommunityWeightTree,
    rng: np.random.Generator,
) -> tuple[int | None, int]:
    """Find a community for one deferred membership of ``v``; returns (community, moves made)."""
    pv = int(p[v])
    free = [c for c in range(tree.C) if tree.weight(c) > 0]
    fresh = [c for c in free if c < pv and c not in held[v]]
    if fresh:
        weights = np.asarray([tree.weight(c) for c in fresh], dtype=np.float64)
        c = fresh[int(rng.choice(len(fresh), p=weights / weights.sum()))]
        tree.decrement(c)
        return c, 0
    # Three-way move: some w gives up a community that suits v and takes a free slot instead.
    for target in rng.permutation(free).tolist():
        holders = [w for w in range(len(held)) if w != v and target < p[w] and target not in held[w]]
        for w in rng.permutation(holders).tolist() if holders else []:
            options = [c for c in held[w] if c < pv and c not in held[v]]
            if not options:
                continue
            c = options[int(rng.integers(len(options)))]
            held[w].discard(c)
            held[w].add(target)
            tree.decrement(target)
            return c, 1
    dupes = [c for c in free if c < pv]
    if dupes:
        c = dupes[int(rng.integers(len(dupes)))]
        tree.decrement(c)
        return c, 0
    return None, 0


def assign_nodes(
    sizes: np.ndarray | Sequence[int],
    constraint: np.ndarray | Sequence[int],
    nu: np.ndarray | Sequence[int],
    seed: SeedLike,
) -> AssignmentResult:
    """:func:`assign` for nodes in arbitrary order; returns pairs in the caller's node ids.

    Sizes are sorted non-increasing (community ids follow that order) and
    nodes are processed by decreasing constraint degree.
    """
    s = np.sort(np.asarray(sizes, dtype=np.int64))[::-1]
    c = np.asarray(constraint, dtype=np.int64)
    order = np.argsort(-c, kind="stable")
    result = assign(s, c[order], np.asarray(nu, dtype=np.int64)[order], seed)
    if result.assignment is not None:
        a = result.assignment
        result.assignment = CommunityAssignment.from_pairs(order[a.nodes], a.communities, a.n_nodes, a.n_communities)
    feasible = np.empty_like(result.feasible)
    if result.feasible.size:
        feasible[order] = result.feasible
    result.feasible = feasible
    return result
