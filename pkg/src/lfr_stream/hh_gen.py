"""Deterministic Havel-Hakimi realization over a run-length compressed degree list.

The sequence is kept as a doubly linked list of groups ``(b, n, delta)``:
``n`` consecutive node ids starting at ``b`` that all still need ``delta``
edges. Each iteration removes the minimum-degree node and connects it to the
nodes of highest residual degree, served from the end of the list. Groups
that were fully consumed keep consuming in later iterations as long as the
demand covers them; their degrees are then tracked implicitly through a
global iteration counter instead of being decremented one by one.
"""

import logging
from collections.abc import Iterator
from dataclasses import dataclass, field

import numpy as np

from lfr_stream.errors import ValidationError

logger = logging.getLogger(__name__)


class DegreeGroup:
    __slots__ = ("b", "n", "delta", "stable", "prev", "next")

    def __init__(self, b: int, n: int, delta: int) -> None:
        self.b = b
        self.n = n
        # For stable groups this holds effective degree + iteration counter.
        self.delta = delta
        self.stable = False
        self.prev: DegreeGroup | None = None
        self.next: DegreeGroup | None = None

    def __repr__(self) -> str:
        flag = ", stable" if self.stable else ""
        return f"DegreeGroup(b={self.b}, n={self.n}, delta={self.delta}{flag})"


class GroupList:
    """Doubly linked list of degree groups plus the global iteration counter."""

    def __init__(self) -> None:
        self.head: DegreeGroup | None = None
        self.tail: DegreeGroup | None = None
        self.counter = 0
        self.stable_head: DegreeGroup | None = None
        self.stable_nodes = 0
        self.nodes = 0
        self.size = 0

    def append(self, group: DegreeGroup) -> None:
        group.prev, group.next = self.tail, None
        if self.tail is None:
            self.head = group
        else:
            self.tail.next = group
        self.tail = group
        self.nodes += group.n
        self.size += 1

    def insert_before(self, anchor: DegreeGroup, group: DegreeGroup) -> None:
        group.prev, group.next = anchor.prev, anchor
        if anchor.prev is None:
            self.head = group
        else:
            anchor.prev.next = group
        anchor.prev = group
        self.size += 1

    def unlink(self, group: DegreeGroup) -> None:
        if group.prev is None:
            self.head = group.next
        else:
            group.prev.next = group.next
        if group.next is None:
            self.tail = group.prev
        else:
            group.next.prev = group.prev
        if self.stable_head is group:
            self.stable_head = group.next
        group.prev = group.next = None
        self.size -= 1

    def effective(self, group: DegreeGroup) -> int:
        return group.delta - self.counter if group.stable else group.delta

    def activate_stable_head(self) -> None:
        group = self.stable_head
        assert group is not None
        group.delta -= self.counter
        group.stable = False
        self.stable_nodes -= group.n
        self.stable_head = group.next

    def __iter__(self) -> Iterator[DegreeGroup]:
        group = self.head
        while group is not None:
            yield group
            group = group.next

    def state(self) -> list[tuple[int, int, int]]:
        """Snapshot of ``(b, n, effective degree)`` per group."""
        return [(g.b, g.n, self.effective(g)) for g in self]

    def expand(self) -> np.ndarray:
        """Residual degree of every node still in the list, in id order."""
        if self.head is None:
            return np.empty(0, dtype=np.int64)
        return np.repeat(
            np.asarray([self.effective(g) for g in self], dtype=np.int64),
            [g.n for g in self],
        )

    def check_invariants(self) -> None:
        """Strictly increasing effective degrees and gap-free ids along the list."""
        prev: DegreeGroup | None = None
        for g in self:
            assert g.n >= 1, f"empty group {g}"
            assert self.effective(g) >= 1, f"non-positive degree in {g}"
            if prev is not None:
                assert self.effective(prev) < self.effective(g), f"degrees not increasing at {g}"
                assert prev.b + prev.n == g.b, f"id gap before {g}"
                assert not (prev.stable and not g.stable), "active group after a stable one"
            prev = g


def _as_degree_array(degrees: np.ndarray | list[int] | tuple[int, ...]) -> np.ndarray:
    arr = np.asarray(degrees, dtype=np.int64)
    if arr.ndim != 1:
        raise ValidationError("degree sequence must be one-dimensional")
    if arr.size and arr.min() < 1:
        raise ValidationError("degree sequence entries must be positive")
    if arr.size > 1 and np.any(np.diff(arr) < 0):
        raise ValidationError("degree sequence must be non-decreasing")
    return arr


def compact(degrees: np.ndarray | list[int] | tuple[int, ...]) -> GroupList:
    """Compress a non-decreasing positive degree sequence into a :class:`GroupList`.

    Node ids are the 0-based positions in ``degrees``.
    """
    arr = _as_degree_array(degrees)
    groups = GroupList()
    if arr.size == 0:
        return groups
    starts = np.flatnonzero(np.r_[True, arr[1:] != arr[:-1]])
    counts = np.diff(np.r_[starts, arr.size])
    for b, n in zip(starts.tolist(), counts.tolist(), strict=True):
        groups.append(DegreeGroup(b, n, int(arr[b])))
    return groups


@dataclass
class HavelHakimiResult:
    """Collected output of a realization."""

    edges: np.ndarray
    graphical: bool
    unmet: int
    unmet_per_node: dict[int, int] = field(default_factory=dict)
    iterations: int = 0
    peak_groups: int = 0
    initial_groups: int = 0


class HavelHakimiStream:
    """Pull-based edge stream; ``graphical`` and ``unmet`` are final once exhausted.

    Iterating yields ``(u, v)`` with ``u < v`` in lexicographic order.
    :meth:`chunks` yields ``(u, neighbours)`` per extracted node instead.
    """

    def __init__(self, groups: GroupList, debug: bool = False, record: bool = False) -> None:
        self.groups = groups
        self.debug = debug
        self.record = record
        self.graphical = True
        self.unmet = 0
        self.unmet_per_node: dict[int, int] = {}
        self.iterations = 0
        self.initial_groups = groups.size
        self.peak_groups = groups.size
        self.states: list[list[tuple[int, int, int]]] = [groups.state()] if record else []

    def __iter__(self) -> Iterator[tuple[int, int]]:
        for u, targets in self.chunks():
            for v in targets.tolist():
                yield u, v

    def chunks(self) -> Iterator[tuple[int, np.ndarray]]:
        while self.groups.head is not None:
            u, targets = self._step()
            if targets.size:
                yield u, targets

    def _step(self) -> tuple[int, np.ndarray]:
        L = self.groups
        head = L.head
        assert head is not None
        if head.stable:
            L.activate_stable_head()
        degree = head.delta
        u = head.b
        head.b += 1
        head.n -= 1
        L.nodes -= 1
        if head.n == 0:
            L.unlink(head)

        demand = degree
        if demand > L.nodes:
            missing = demand - L.nodes
            logger.debug("node %d: demand %d exceeds %d remaining nodes", u, demand, L.nodes)
            self.graphical = False
            self.unmet += missing
            self.unmet_per_node[u] = missing
            demand = L.nodes

        while L.stable_nodes > demand:
            L.activate_stable_head()

        # Walk backwards over the active groups: whole groups first (C1), the
        # boundary group is split and its lowest ids are used (C2).
        rest = demand - L.stable_nodes
        cursor = L.stable_head.prev if L.stable_head is not None else L.tail
        consumed: list[DegreeGroup] = []
        fragment: DegreeGroup | None = None
        while rest > 0:
            assert cursor is not None
            if cursor.n <= rest:
                consumed.append(cursor)
                rest -= cursor.n
                cursor = cursor.prev
            else:
                fragment = DegreeGroup(cursor.b, rest, cursor.delta - 1)
                cursor.b += rest
                cursor.n -= rest
                L.insert_before(cursor, fragment)
                rest = 0

        pieces: list[np.ndarray] = []
        if fragment is not None:
            pieces.append(np.arange(fragment.b, fragment.b + fragment.n, dtype=np.int64))
        for g in reversed(consumed):
            pieces.append(np.arange(g.b, g.b + g.n, dtype=np.int64))
            g.delta -= 1
        if L.stable_head is not None and L.tail is not None:
            pieces.append(np.arange(L.stable_head.b, L.tail.b + L.tail.n, dtype=np.int64))
        targets = np.concatenate(pieces) if pieces else np.empty(0, dtype=np.int64)

        L.counter += 1
        if consumed:
            for g in consumed:
                g.delta += L.counter
                g.stable = True
                L.stable_nodes += g.n
            L.stable_head = consumed[-1]

        self._merge_stable_head()
        if fragment is not None:
            self._merge_fragment(fragment)

        self.iterations += 1
        self.peak_groups = max(self.peak_groups, L.size)
        if self.debug:
            L.check_invariants()
        if self.record:
            self.states.append(L.state())
        return u, targets

    def _merge_stable_head(self) -> None:
        L = self.groups
        sh = L.stable_head
        if sh is None:
            return
        if L.effective(sh) == 0:
            L.stable_nodes -= sh.n
            L.nodes -= sh.n
            L.unlink(sh)
            return
        prev = sh.prev
        if prev is not None and not prev.stable and prev.delta == L.effective(sh):
            prev.n += sh.n
            L.stable_nodes -= sh.n
            L.unlink(sh)

    def _merge_fragment(self, fragment: DegreeGroup) -> None:
        L = self.groups
        if fragment.delta == 0:
            L.nodes -= fragment.n
            L.unlink(fragment)
            return
        prev = fragment.prev
        if prev is not None and prev.delta == fragment.delta:
            prev.n += fragment.n
            L.unlink(fragment)

    def result(self) -> HavelHakimiResult:
        """Drain the stream and collect all edges."""
        rows: list[np.ndarray] = []
        for u, targets in self.chunks():
            block = np.empty((targets.size, 2), dtype=np.int64)
            block[:, 0] = u
            block[:, 1] = targets
            rows.append(block)
        edges = np.concatenate(rows) if rows else np.empty((0, 2), dtype=np.int64)
        if not self.graphical:
            logger.warning("degree sequence is not graphical: %d half-edges unmet", self.unmet)
        return HavelHakimiResult(
            edges=edges,
            graphical=self.graphical,
            unmet=self.unmet,
            unmet_per_node=dict(self.unmet_per_node),
            iterations=self.iterations,
            peak_groups=self.peak_groups,
            initial_groups=self.initial_groups,
        )


def hh_edges(groups: GroupList, debug: bool = False, record: bool = False) -> HavelHakimiStream:
    """Return the lazy edge stream realizing ``groups``."""
    return HavelHakimiStream(groups, debug=debug, record=record)


def realize(degrees: np.ndarray | list[int] | tuple[int, ...], debug: bool = False) -> HavelHakimiResult:
    """Realize a non-decreasing positive degree sequence; see :class:`HavelHakimiResult`."""
    return hh_edges(compact(degrees), debug=debug).result()


def realize_any(degrees: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Realize an arbitrary non-negative degree vector indexed by node id.

    Zero-degree nodes are skipped, the rest are realized in ascending degree
    order and relabelled back. Returns the sorted edge list (``u < v``) and the
    per-node unmet demand.
    """
    degrees = np.asarray(degrees, dtype=np.int64)
    if degrees.size and degrees.min() < 0:
        raise ValidationError("degrees must be non-negative")
    active = np.flatnonzero(degrees > 0)
    order = active[np.argsort(degrees[active], kind="stable")]
    result = realize(degrees[order])
    unmet = np.zeros(degrees.size, dtype=np.int64)
    for pos, missing in result.unmet_per_node.items():
        unmet[order[pos]] = missing
    if result.edges.size == 0:
        return np.empty((0, 2), dtype=np.int64), unmet
    mapped = order[result.edges]
    edges = np.sort(mapped, axis=1)
    idx = np.lexsort((edges[:, 1], edges[:, 0]))
    return edges[idx], unmet


def is_graphical(degrees: np.ndarray | list[int] | tuple[int, ...]) -> bool:
    """True iff some simple graph realizes ``degrees`` (non-decreasing, positive)."""
    stream = hh_edges(compact(degrees))
    for _ in stream.chunks():
        pass
    return stream.graphical
