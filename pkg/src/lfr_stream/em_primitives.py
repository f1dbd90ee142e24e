"""Streaming containers with external-memory semantics.

All containers hold fixed-width integer records. When the resident part of a
container outgrows its share of the memory budget it is written to a spill
run (``.npy`` file inside a private temporary directory) and merged back
k-way when read. Ties are always resolved by insertion order.
"""

import heapq
import itertools
import logging
import tempfile
from collections.abc import Callable, Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Self, TypeVar

import numpy as np

from lfr_stream import settings
from lfr_stream.errors import UsageError, ValidationError

logger = logging.getLogger(__name__)

Record = tuple[int, ...]
T = TypeVar("T")

_READ_CHUNK = 4096
_MIN_RECORDS = 16


@dataclass(frozen=True)
class MemoryBudget:
    """Bytes of working memory the streaming containers may keep resident."""

    bytes: int = settings.MEMORY_BUDGET

    def __post_init__(self) -> None:
        if self.bytes <= 0:
            raise ValidationError(f"memory budget must be positive, got {self.bytes}")

    def records(self, width: int, parts: int = 1) -> int:
        """Return how many int64 records of ``width`` fields one of ``parts`` structures may hold."""
        per_record = 8 * width + 56  # tuple header plus boxed ints, roughly
        return max(_MIN_RECORDS, self.bytes // (max(1, parts) * per_record))


def _iter_run(path: Path) -> Iterator[Record]:
    data = np.load(path, mmap_mode="r")
    for start in range(0, len(data), _READ_CHUNK):
        for row in data[start:start + _READ_CHUNK].tolist():
            yield tuple(row)


class _SpillArea:
    """Lazily created temporary directory holding the spill runs of one container."""

    def __init__(self, spill_dir: str | None) -> None:
        self._spill_dir = spill_dir or settings.SPILL_DIR
        self._tmp: tempfile.TemporaryDirectory[str] | None = None
        self._count = 0

    def write(self, records: Sequence[Record], width: int) -> Path:
        if self._tmp is None:
            self._tmp = tempfile.TemporaryDirectory(prefix="lfr-stream-", dir=self._spill_dir)
        path = Path(self._tmp.name) / f"run-{self._count:05d}.npy"
        self._count += 1
        np.save(path, np.asarray(records, dtype=np.int64).reshape(len(records), width))
        logger.debug("Spilled %d records to %s", len(records), path)
        return path

    def close(self) -> None:
        if self._tmp is not None:
            self._tmp.cleanup()
            self._tmp = None


class Sorter:
    """Two-phase container: push records while filling, then stream them sorted.

    Records are tuples of ``width`` integers compared lexicographically on
    their first ``key_width`` fields. Equal keys keep their push order.
    """

    def __init__(
        self,
        width: int,
        key_width: int | None = None,
        budget: MemoryBudget | None = None,
        spill_dir: str | None = None,
        parts: int = 1,
    ) -> None:
        if width < 1:
            raise ValidationError("record width must be at least 1")
        self.width = width
        self.key_width = key_width or width
        self._key: Callable[[Record], Record] = lambda r: r[: self.key_width]
        self._capacity = (budget or MemoryBudget()).records(width, parts)
        self._spill = _SpillArea(spill_dir)
        self._buffer: list[Record] = []
        self._runs: list[Path] = []
        self._count = 0
        self._reading = False
        self._stream: Iterator[Record] = iter(())
        self._head: Record | None = None

    # -- filling ----------------------------------------------------------

    def push(self, record: Iterable[int]) -> None:
        if self._reading:
            raise UsageError("push on a sorter that is already in reading mode")
        rec = tuple(record)
        if len(rec) != self.width:
            raise ValidationError(f"expected record of width {self.width}, got {len(rec)}")
        self._buffer.append(rec)
        self._count += 1
        if len(self._buffer) >= self._capacity:
            self._buffer.sort(key=self._key)
            self._runs.append(self._spill.write(self._buffer, self.width))
            self._buffer = []

    def sort(self) -> Self:
        """Switch to reading mode; returns self for chaining."""
        if self._reading:
            raise UsageError("sorter already switched to reading mode")
        self._buffer.sort(key=self._key)
        self._reading = True
        self.rewind()
        return self

    # -- reading ----------------------------------------------------------

    @property
    def spilled_runs(self) -> int:
        return len(self._runs)

    def rewind(self) -> None:
        if not self._reading:
            raise UsageError("rewind before the sorter was sorted")
        if self._runs:
            streams = [_iter_run(p) for p in self._runs] + [iter(self._buffer)]
            self._stream = heapq.merge(*streams, key=self._key)
        else:
            self._stream = iter(self._buffer)
        self._head = next(self._stream, None)

    def peek(self) -> Record | None:
        """Return the next record without consuming it, ``None`` when exhausted."""
        if not self._reading:
            raise UsageError("stream requested before the sorter was sorted")
        return self._head

    def __iter__(self) -> Iterator[Record]:
        return self

    def __next__(self) -> Record:
        if not self._reading:
            raise UsageError("stream requested before the sorter was sorted")
        if self._head is None:
            raise StopIteration
        rec = self._head
        self._head = next(self._stream, None)
        return rec

    def take_while(self, prefix: Record) -> list[Record]:
        """Consume all leading records whose first ``len(prefix)`` fields equal ``prefix``."""
        out: list[Record] = []
        k = len(prefix)
        while self._head is not None and self._head[:k] == prefix:
            out.append(next(self))
        return out

    def __len__(self) -> int:
        return self._count

    def close(self) -> None:
        self._spill.close()
        self._buffer = []

    def __enter__(self) -> Self:
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()


def sorted_stream(items: Iterable[Iterable[int]], width: int, budget: MemoryBudget | None = None) -> list[Record]:
    """Push ``items`` through a :class:`Sorter` and return the sorted records."""
    with Sorter(width, budget=budget) as sorter:
        for item in items:
            sorter.push(item)
        return list(sorter.sort())


@dataclass(order=True)
class _Entry:
    priority: Record
    seq: int
    payload: Record = field(compare=False)


class MinPQ:
    """Min-priority queue over integer tuples; equal priorities pop in push order.

    When the in-memory heap reaches its quota it is flushed as one sorted
    run; runs are consumed lazily through a heap of run heads.
    """

    def __init__(
        self,
        priority_width: int,
        payload_width: int,
        budget: MemoryBudget | None = None,
        spill_dir: str | None = None,
        parts: int = 1,
    ) -> None:
        self.priority_width = priority_width
        self.payload_width = payload_width
        self._width = priority_width + 1 + payload_width
        self._capacity = (budget or MemoryBudget()).records(self._width, parts)
        self._spill = _SpillArea(spill_dir)
        self._heap: list[_Entry] = []
        self._heads: list[tuple[_Entry, int]] = []
        self._runs: list[Iterator[Record]] = []
        self._seq = itertools.count()
        self._size = 0

    def push(self, priority: Iterable[int], payload: Iterable[int] = ()) -> None:
        prio, pay = tuple(priority), tuple(payload)
        if len(prio) != self.priority_width or len(pay) != self.payload_width:
            raise ValidationError("priority or payload width does not match the queue")
        heapq.heappush(self._heap, _Entry(prio, next(self._seq), pay))
        self._size += 1
        if len(self._heap) >= self._capacity:
            self._flush()

    def _flush(self) -> None:
        records = [(*e.priority, e.seq, *e.payload) for e in sorted(self._heap)]
        run = _iter_run(self._spill.write(records, self._width))
        self._heap = []
        self._runs.append(run)
        self._advance(len(self._runs) - 1)

    def _advance(self, run_id: int) -> None:
        rec = next(self._runs[run_id], None)
        if rec is not None:
            k = self.priority_width
            heapq.heappush(self._heads, (_Entry(rec[:k], rec[k], rec[k + 1:]), run_id))

    def _min_source(self) -> int:
        """-1 for the heap, run index otherwise; raises when empty."""
        if self._size == 0:
            raise UsageError("pop from an empty priority queue")
        if not self._heads:
            return -1
        if not self._heap:
            return self._heads[0][1]
        return -1 if self._heap[0] < self._heads[0][0] else self._heads[0][1]

    def peek_priority(self) -> Record | None:
        if self._size == 0:
            return None
        src = self._min_source()
        return self._heap[0].priority if src < 0 else self._heads[0][0].priority

    def pop(self) -> tuple[Record, Record]:
        src = self._min_source()
        if src < 0:
            entry = heapq.heappop(self._heap)
        else:
            entry, _ = heapq.heappop(self._heads)
            self._advance(src)
        self._size -= 1
        return entry.priority, entry.payload

    def pop_all(self, priority: Record) -> list[Record]:
        """Pop every entry with exactly ``priority``; returns their payloads."""
        out: list[Record] = []
        while self._size and self.peek_priority() == priority:
            out.append(self.pop()[1])
        return out

    def __len__(self) -> int:
        return self._size

    def close(self) -> None:
        self._spill.close()


class BitStream:
    """Append-only packed bit sequence read back sequentially."""

    def __init__(self) -> None:
        self._bits = bytearray()
        self._len = 0
        self._cursor = 0

    def append(self, bit: bool) -> None:
        if self._len % 8 == 0:
            self._bits.append(0)
        if bit:
            self._bits[-1] |= 1 << (self._len % 8)
        self._len += 1

    def read(self) -> bool:
        if self._cursor >= self._len:
            raise UsageError("read past the end of the bit stream")
        i = self._cursor
        self._cursor += 1
        return bool(self._bits[i // 8] >> (i % 8) & 1)

    def rewind(self) -> None:
        self._cursor = 0

    def __iter__(self) -> Iterator[bool]:
        for i in range(self._len):
            yield bool(self._bits[i // 8] >> (i % 8) & 1)

    def __len__(self) -> int:
        return self._len


class TimeForwardProcessor:
    """Delivers messages along increasing event ids through a :class:`MinPQ`."""

    def __init__(self, payload_width: int, budget: MemoryBudget | None = None, spill_dir: str | None = None) -> None:
        self._pq = MinPQ(1, payload_width, budget=budget, spill_dir=spill_dir)
        self._last: int | None = None

    def send(self, recipient: int, payload: Iterable[int]) -> None:
        if self._last is not None and recipient <= self._last:
            raise UsageError(f"message for event {recipient} which was already processed (current {self._last})")
        self._pq.push((recipient,), payload)

    def receive(self, event: int) -> list[Record]:
        """Return all payloads addressed to ``event``; events must be visited in increasing order."""
        if self._last is not None and event <= self._last:
            raise UsageError(f"event {event} visited out of order")
        if len(self._pq) and (prio := self._pq.peek_priority()) is not None and prio[0] < event:
            raise UsageError(f"event {prio[0]} has pending messages but was skipped (visiting {event})")
        self._last = event
        return self._pq.pop_all((event,))

    def __len__(self) -> int:
        return len(self._pq)

    def close(self) -> None:
        self._pq.close()


def tfp_send_receive(
    events: Iterable[int],
    messages: Iterable[tuple[int, T]],
    emit: Callable[[int, list[T]], Iterable[tuple[int, T]]] | None = None,
    budget: MemoryBudget | None = None,
) -> dict[int, list[T]]:
    """Deliver ``messages`` (recipient, payload) to ``events`` in increasing order.

    Args:
        events: Event ids; processed in increasing order
        messages: Initial (recipient, payload) pairs
        emit: Optional callback invoked per event with its delivered payloads,
            returning further (recipient, payload) messages to forward
        budget: Memory budget for the underlying priority queue

    Returns:
        Mapping of every event id to the payloads delivered to it, in send order
    """
    payloads: list[Any] = []
    tfp = TimeForwardProcessor(1, budget=budget)

    def _send(recipient: int, payload: T) -> None:
        payloads.append(payload)
        tfp.send(recipient, (len(payloads) - 1,))

    try:
        for recipient, payload in messages:
            _send(recipient, payload)
        delivered: dict[int, list[T]] = {}
        for event in sorted(events):
            got = [payloads[idx] for (idx,) in tfp.receive(event)]
            delivered[event] = got
            if emit is not None:
                for recipient, payload in emit(event, got):
                    _send(recipient, payload)
        if len(tfp):
            raise UsageError(f"{len(tfp)} messages addressed to events that were never visited")
        return delivered
    finally:
        tfp.close()
