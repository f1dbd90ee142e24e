"""Batched edge swaps on a lexicographically sorted edge list.

A swap ``(a, b, d)`` names two edge ids (positions in the sorted list at the
start of the current run) and a direction bit. Swaps are processed in runs,
and long runs in batches of bounded size; inside a batch the edges
requested by several swaps are linked into id chains, and every edge whose
existence a swap must know is linked into an existence chain, so each batch
needs only a constant number of scans over the edge list plus sorter and
priority-queue traffic. The result is identical to
applying the swaps one after another (:func:`sequential_swap_oracle`).
"""

import itertools
import logging
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from lfr_stream.em_primitives import BitStream, MemoryBudget, MinPQ, Sorter
from lfr_stream.errors import ValidationError
from lfr_stream.sampling import SeedLike, as_rng

logger = logging.getLogger(__name__)

Edge = tuple[int, int]

_RUN_STRUCTURES = 8


@dataclass(frozen=True)
class SwapDescriptor:
    a: int
    b: int
    d: bool


@dataclass(frozen=True)
class RunConfig:
    """Run and batch sizes of the pipeline.

    ``run_size`` swaps share one id space: ids refer to edge positions at the
    start of the run. A run is executed in batches of at most ``batch_size``
    swaps (``m // 8`` when unset), each simulated jointly; ids stay valid
    across the batches of a run and the list is re-sorted once per run.
    """

    run_size: int
    batch_size: int | None = None

    def __post_init__(self) -> None:
        if self.run_size < 1:
            raise ValidationError(f"run size must be >= 1, got {self.run_size}")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValidationError(f"batch size must be >= 1, got {self.batch_size}")

    @classmethod
    def default(cls, m: int) -> "RunConfig":
        return cls(max(1, m // 8))

    def batch(self, m: int) -> int:
        return min(self.run_size, self.batch_size or max(1, m // 8))


def _norm(x: int, y: int) -> Edge:
    return (x, y) if x <= y else (y, x)


def swapped_edges(ea: Sequence[int], eb: Sequence[int], d: bool) -> tuple[Edge, Edge]:
    """Exchange endpoints of two edges; results are normalized, loops are kept."""
    a1, a2 = int(ea[0]), int(ea[1])
    b1, b2 = int(eb[0]), int(eb[1])
    if d:
        return _norm(a1, b2), _norm(a2, b1)
    return _norm(a1, b1), _norm(a2, b2)


def _never_legal(t0: Edge, t1: Edge) -> bool:
    return t0[0] == t0[1] or t1[0] == t1[1] or t0 == t1


def as_edge_array(edges: np.ndarray | Iterable[Sequence[int]]) -> np.ndarray:
    arr = np.asarray(edges if isinstance(edges, np.ndarray) else list(edges), dtype=np.int64)
    if arr.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValidationError(f"edge list must have shape (m, 2), got {arr.shape}")
    return arr


def check_edge_list(edges: np.ndarray, simple: bool) -> None:
    """Raise :class:`ValidationError` unless ``edges`` is sorted with ``u <= v`` (and simple if asked)."""
    if len(edges) == 0:
        return
    u, v = edges[:, 0], edges[:, 1]
    if np.any(u > v):
        raise ValidationError("edges must be normalized with u <= v")
    if np.any(u < 0):
        raise ValidationError("node ids must be non-negative")
    du, dv = np.diff(u), np.diff(v)
    if np.any((du < 0) | ((du == 0) & (dv < 0))):
        raise ValidationError("edge list is not lexicographically sorted")
    if simple:
        if np.any(u == v):
            raise ValidationError("edge list contains a self-loop")
        if np.any((du == 0) & (dv == 0)):
            raise ValidationError("edge list contains a multi-edge")


def as_swap_array(swaps: np.ndarray | Iterable[SwapDescriptor | Sequence[int]], m: int) -> np.ndarray:
    """Normalize swaps into a ``(k, 3)`` int64 array and validate the ids against ``m``."""
    if isinstance(swaps, np.ndarray):
        arr = swaps.astype(np.int64, copy=False)
    else:
        rows = [(s.a, s.b, int(s.d)) if isinstance(s, SwapDescriptor) else tuple(s) for s in swaps]
        arr = np.asarray(rows, dtype=np.int64)
    if arr.size == 0:
        return np.empty((0, 3), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValidationError(f"swaps must have shape (k, 3), got {arr.shape}")
    ids = arr[:, :2]
    if ids.min() < 0 or ids.max() >= m:
        raise ValidationError(f"swap edge id out of range for {m} edges")
    if np.any(arr[:, 0] == arr[:, 1]):
        raise ValidationError("a swap must name two distinct edge ids")
    return arr


def _to_array(rows: list[Edge]) -> np.ndarray:
    return np.asarray(rows, dtype=np.int64).reshape(-1, 2)


# ---------------------------------------------------------------------------
# Sequential reference
# ---------------------------------------------------------------------------

def sequential_swap_oracle(
    edges: np.ndarray | Iterable[Sequence[int]],
    swaps: np.ndarray | Iterable[SwapDescriptor | Sequence[int]],
    run_size: int | None = None,
    multigraph: bool = False,
) -> np.ndarray:
    """Apply swaps one by one against a multiplicity table of the current graph.

    Edge ids refer to positions in the list, which is re-sorted after every
    ``run_size`` swaps (once at the end when ``run_size`` is None).
    """
    arr = as_edge_array(edges)
    check_edge_list(arr, simple=not multigraph)
    sw = as_swap_array(swaps, len(arr))
    if len(sw) == 0:
        return arr.copy()
    size = run_size or len(sw)
    slots: list[Edge] = [(u, v) for u, v in arr.tolist()]
    for start in range(0, len(sw), size):
        counts = Counter(slots)
        for a, b, d in sw[start:start + size].tolist():
            ea, eb = slots[a], slots[b]
            t0, t1 = swapped_edges(ea, eb, bool(d))
            if _never_legal(t0, t1) or counts[t0] > 0 or counts[t1] > 0:
                continue
            counts[ea] -= 1
            counts[eb] -= 1
            counts[t0] += 1
            counts[t1] += 1
            slots[a], slots[b] = t0, t1
        slots.sort()
    return _to_array(slots)


# ---------------------------------------------------------------------------
# Batched pipeline
# ---------------------------------------------------------------------------

@dataclass
class RunStats:
    swaps: int
    legal: int = 0
    scans: int = 0
    configurations: list[int] = field(default_factory=list)
    existence_chains: int = 0
    independent_chains: int = 0


class _SwapRun:
    """One batch of the six-phase pipeline.

    ``edges`` is indexed by edge id; it is sorted only for the first batch of
    a run, later batches see the slots as left by the previous one.
    """

    def __init__(self, owner: "EdgeSwapper", edges: np.ndarray, swaps: np.ndarray, is_sorted: bool = True) -> None:
        self.owner = owner
        self.edges = edges
        self.is_sorted = is_sorted
        self.swaps: list[tuple[int, int, bool]] = [(a, b, bool(d)) for a, b, d in swaps.tolist()]
        self.stats = RunStats(swaps=len(self.swaps))
        self.rows: list[Edge] = []
        self.invalid = BitStream()
        self._open: list[Sorter | MinPQ] = []

    def _sorter(self, width: int, key_width: int | None = None) -> Sorter:
        s = Sorter(width, key_width, budget=self.owner.budget, spill_dir=self.owner.spill_dir, parts=_RUN_STRUCTURES)
        self._open.append(s)
        return s

    def _pq(self, payload_width: int) -> MinPQ:
        q = MinPQ(1, payload_width, budget=self.owner.budget, spill_dir=self.owner.spill_dir, parts=_RUN_STRUCTURES)
        self._open.append(q)
        return q

    def execute(self) -> np.ndarray:
        try:
            self._request_nodes()
            self._load_nodes()
            self._simulate()
            self._load_existence()
            self._perform()
            return self._update()
        finally:
            for structure in self._open:
                structure.close()

    def _request_nodes(self) -> None:
        self.edge_req = self._sorter(3)  # (edge id, swap, slot)
        for s, (a, b, _) in enumerate(self.swaps):
            self.edge_req.push((a, s, 0))
            self.edge_req.push((b, s, 1))
        self.edge_req.sort()

    def _load_nodes(self) -> None:
        """Scan the edge list once, answering the first request per id and chaining the rest."""
        self.edge_msg = self._sorter(4, key_width=2)  # (swap, slot, u, v)
        self.id_succ = self._sorter(4, key_width=2)  # (swap, slot, next swap, next slot)
        self.rows = [(u, v) for u, v in self.edges.tolist()]
        for eid, (u, v) in enumerate(self.rows):
            requests = self.edge_req.take_while((eid,))
            self.invalid.append(bool(requests))
            if not requests:
                continue
            _, s, p = requests[0]
            self.edge_msg.push((s, p, u, v))
            for (_, s1, p1), (_, s2, p2) in itertools.pairwise(requests):
                self.id_succ.push((s1, p1, s2, p2))
        self.stats.scans += 1
        self.edge_msg.sort()
        self.id_succ.sort()

    def _simulate(self) -> None:
        """Propagate every possible edge state and issue existence requests for all of them."""
        pq = self._pq(3)  # swap -> (slot, u, v)
        self.exist_req = self._sorter(4)  # (u, v, swap, kind); kind 0 asks, kind 1 may change
        for s, (_, _, d) in enumerate(self.swaps):
            states: tuple[set[Edge], set[Edge]] = (set(), set())
            for _, p, u, v in self.edge_msg.take_while((s,)):
                states[p].add((u, v))
            for p, u, v in pq.pop_all((s,)):
                states[p].add((u, v))
            s0, s1 = states
            self.stats.configurations.append(len(s0) * len(s1))
            out = (set(s0), set(s1))
            for e0 in s0:
                for e1 in s1:
                    t0, t1 = swapped_edges(e0, e1, d)
                    if _never_legal(t0, t1):
                        continue
                    out[0].add(t0)
                    out[1].add(t1)
                    self.exist_req.push((*t0, s, 0))
                    self.exist_req.push((*t1, s, 0))
            for e in s0 | s1:
                self.exist_req.push((*e, s, 1))
            for _, p, s2, p2 in self.id_succ.take_while((s,)):
                for e in sorted(out[p]):
                    pq.push((s2,), (p2, *e))
        self.exist_req.sort()

    def _load_existence(self) -> None:
        """Scan the edge list once to count multiplicities and build existence chains."""
        self.perform_pq = self._pq(4)  # swap -> (0, slot, u, v) | (1, u, v, count)
        self.exist_succ = self._sorter(4, key_width=3)  # (swap, u, v, next swap)
        rows = self.rows if self.is_sorted else sorted(self.rows)
        m, ptr = len(rows), 0
        while (head := self.exist_req.peek()) is not None:
            key = (head[0], head[1])
            group = self.exist_req.take_while(key)
            while ptr < m and rows[ptr] < key:
                ptr += 1
            count = 0
            while ptr < m and rows[ptr] == key:
                count += 1
                ptr += 1
            chain: list[list[int]] = []
            for _, _, s, kind in group:
                if chain and chain[-1][0] == s:
                    chain[-1][1] |= kind == 0
                else:
                    chain.append([s, int(kind == 0)])
            # Requests at the end of a chain only say "may change": nobody reads them.
            while chain and not chain[-1][1]:
                chain.pop()
            if not chain:
                continue
            self.stats.existence_chains += 1
            if len(chain) == 1:
                self.stats.independent_chains += 1
            if count:
                self.perform_pq.push((chain[0][0],), (1, key[0], key[1], count))
            for (s1, _), (s2, _) in itertools.pairwise(chain):
                self.exist_succ.push((s1, key[0], key[1], s2))
        self.stats.scans += 1
        self.exist_succ.sort()

    def _perform(self) -> None:
        self.updates = self._sorter(3)  # (edge id, u, v)
        self.edge_msg.rewind()
        self.id_succ.rewind()
        pq = self.perform_pq
        for s, (_, _, d) in enumerate(self.swaps):
            state: list[Edge] = [(-1, -1), (-1, -1)]
            counts: dict[Edge, int] = {}
            for _, p, u, v in self.edge_msg.take_while((s,)):
                state[p] = (u, v)
            for kind, x, y, z in pq.pop_all((s,)):
                if kind == 0:
                    state[x] = (y, z)
                else:
                    counts[(x, y)] = z
            e0, e1 = state
            t0, t1 = swapped_edges(e0, e1, d)
            if not _never_legal(t0, t1) and counts.get(t0, 0) == 0 and counts.get(t1, 0) == 0:
                self.stats.legal += 1
                for e, delta in ((e0, -1), (e1, -1), (t0, 1), (t1, 1)):
                    counts[e] = counts.get(e, 0) + delta
                new = (t0, t1)
            else:
                # Illegal swaps pass the unaltered source edges on.
                new = (e0, e1)
            for _, u, v, s2 in self.exist_succ.take_while((s,)):
                pq.push((s2,), (1, u, v, counts.get((u, v), 0)))
            forwarded = [False, False]
            for _, p, s2, p2 in self.id_succ.take_while((s,)):
                pq.push((s2,), (0, p2, *new[p]))
                forwarded[p] = True
            # The last swap of an id chain writes the slot back.
            for p in (0, 1):
                if not forwarded[p]:
                    self.updates.push((self.swaps[s][p], *new[p]))
        self.updates.sort()

    def _update(self) -> np.ndarray:
        """Write the requested slots back in id order; the third scan of the batch."""
        self.invalid.rewind()
        written = iter(self.updates)
        slots: list[Edge] = []
        for row in self.rows:
            if self.invalid.read():
                _, u, v = next(written)
                row = (u, v)
                self.owner.touched.add(row)
            slots.append(row)
        self.stats.scans += 1
        return _to_array(slots)


class EdgeSwapper:
    """Runs swap sequences through the batched pipeline.

    ``touched`` holds every edge value written by the most recent call
    (swapped or passed on unaltered); callers use it to restrict rescans.
    ``runs`` holds one :class:`RunStats` per executed batch.
    """

    def __init__(self, budget: MemoryBudget | None = None, spill_dir: str | None = None) -> None:
        self.budget = budget or MemoryBudget()
        self.spill_dir = spill_dir
        self.touched: set[Edge] = set()
        self.runs: list[RunStats] = []

    @property
    def scans(self) -> int:
        return sum(r.scans for r in self.runs)

    def run(
        self,
        edges: np.ndarray | Iterable[Sequence[int]],
        swaps: np.ndarray | Iterable[SwapDescriptor | Sequence[int]],
        cfg: RunConfig | None = None,
    ) -> np.ndarray:
        """Apply swaps to a simple sorted graph; the output is sorted and simple."""
        return self._run(edges, swaps, cfg, multigraph=False)

    def run_multigraph(
        self,
        edges: np.ndarray | Iterable[Sequence[int]],
        swaps: np.ndarray | Iterable[SwapDescriptor | Sequence[int]],
        cfg: RunConfig | None = None,
    ) -> np.ndarray:
        """Apply swaps to a sorted multigraph; swaps never create loops or parallel edges."""
        return self._run(edges, swaps, cfg, multigraph=True)

    def _run(
        self,
        edges: np.ndarray | Iterable[Sequence[int]],
        swaps: np.ndarray | Iterable[SwapDescriptor | Sequence[int]],
        cfg: RunConfig | None,
        multigraph: bool,
    ) -> np.ndarray:
        arr = as_edge_array(edges)
        check_edge_list(arr, simple=not multigraph)
        sw = as_swap_array(swaps, len(arr))
        cfg = cfg or RunConfig.default(len(arr))
        self.touched = set()
        self.runs = []
        batch = cfg.batch(len(arr))
        for start in range(0, len(sw), cfg.run_size):
            chunk = sw[start:start + cfg.run_size]
            for offset in range(0, len(chunk), batch):
                run = _SwapRun(self, arr, chunk[offset:offset + batch], is_sorted=offset == 0)
                arr = run.execute()
                self.runs.append(run.stats)
                logger.debug(
                    "batch %d: %d swaps, %d legal, %d scans",
                    len(self.runs), run.stats.swaps, run.stats.legal, run.stats.scans,
                )
            arr = arr[np.lexsort((arr[:, 1], arr[:, 0]))]
        return arr if len(sw) else arr.copy()


def run_swaps(
    edges: np.ndarray | Iterable[Sequence[int]],
    swaps: np.ndarray | Iterable[SwapDescriptor | Sequence[int]],
    cfg: RunConfig | None = None,
    budget: MemoryBudget | None = None,
) -> np.ndarray:
    return EdgeSwapper(budget).run(edges, swaps, cfg)


def run_swaps_multigraph(
    edges: np.ndarray | Iterable[Sequence[int]],
    swaps: np.ndarray | Iterable[SwapDescriptor | Sequence[int]],
    cfg: RunConfig | None = None,
    budget: MemoryBudget | None = None,
) -> np.ndarray:
    return EdgeSwapper(budget).run_multigraph(edges, swaps, cfg)


def apply_swaps(
    edges: np.ndarray,
    swaps: np.ndarray,
    cfg: RunConfig | None = None,
    in_memory: bool = False,
    swapper: EdgeSwapper | None = None,
) -> np.ndarray:
    """Dispatch to the in-memory oracle or the batched pipeline; both give the same graph."""
    cfg = cfg or RunConfig.default(len(edges))
    if in_memory:
        return sequential_swap_oracle(edges, swaps, run_size=cfg.run_size)
    return (swapper or EdgeSwapper()).run(edges, swaps, cfg)


def draw_random_swaps(m: int, k: int, seed: SeedLike) -> np.ndarray:
    """Draw ``k`` swaps with ``a != b`` uniform over ``[0, m)`` and a fair direction bit."""
    if m < 2:
        raise ValidationError(f"need at least two edges to swap, got {m}")
    rng = as_rng(seed, "swaps")
    a = rng.integers(0, m, size=k, dtype=np.int64)
    # Uniform over the m - 1 ids different from a.
    b = rng.integers(0, m - 1, size=k, dtype=np.int64)
    b += b >= a
    d = rng.integers(0, 2, size=k, dtype=np.int64)
    return np.stack([a, b, d], axis=1) if k else np.empty((0, 3), dtype=np.int64)


@dataclass
class DependencyStats:
    """Share of swaps per number of simulated edge configurations."""

    histogram: dict[int, float]
    swaps: int
    single_configuration: float
    independent_existence: float


def dependency_stats(
    edges: np.ndarray | Iterable[Sequence[int]],
    swaps: np.ndarray | Iterable[SwapDescriptor | Sequence[int]],
    cfg: RunConfig | None = None,
) -> DependencyStats:
    swapper = EdgeSwapper()
    swapper.run(edges, swaps, cfg)
    configs = Counter(c for run in swapper.runs for c in run.configurations)
    total = sum(configs.values())
    chains = sum(r.existence_chains for r in swapper.runs)
    independent = sum(r.independent_chains for r in swapper.runs)
    histogram = {k: v / total for k, v in sorted(configs.items())} if total else {}
    return DependencyStats(
        histogram=histogram,
        swaps=total,
        single_configuration=histogram.get(1, 0.0),
        independent_existence=independent / chains if chains else 1.0,
    )
