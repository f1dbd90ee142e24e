import numpy as np
import pytest

from lfr_stream.em_primitives import (
    BitStream,
    MemoryBudget,
    MinPQ,
    Sorter,
    TimeForwardProcessor,
    sorted_stream,
    tfp_send_receive,
)
from lfr_stream.errors import UsageError, ValidationError

# MemoryBudget tests


def test_memory_budget_rejects_non_positive():
    """Should refuse a zero byte budget."""
    with pytest.raises(ValidationError):
        MemoryBudget(0)


def test_memory_budget_records_has_floor():
    """Should always allow a small minimum number of records."""
    assert MemoryBudget(1).records(width=3) == 16


def test_memory_budget_records_split_between_parts():
    """Should give each of several structures a share of the budget."""
    budget = MemoryBudget(1 << 20)

    assert budget.records(2, parts=4) < budget.records(2)


# Sorter tests


def test_sorter_sorts_three_elements():
    """Should stream pushed records in ascending order."""
    assert sorted_stream([(3,), (1,), (2,)], width=1) == [(1,), (2,), (3,)]


def test_sorter_empty():
    """Should produce an empty stream when nothing was pushed."""
    with Sorter(1) as sorter:
        assert list(sorter.sort()) == []
        assert sorter.peek() is None


def test_sorter_push_after_sort_is_usage_error():
    """Should reject pushes once in reading mode."""
    with Sorter(1) as sorter:
        sorter.sort()
        with pytest.raises(UsageError):
            sorter.push((1,))


def test_sorter_stream_before_sort_is_usage_error():
    """Should reject reading while still filling."""
    with Sorter(1) as sorter:
        sorter.push((1,))
        with pytest.raises(UsageError):
            next(sorter)
        with pytest.raises(UsageError):
            sorter.peek()


def test_sorter_width_mismatch():
    """Should reject records of the wrong width."""
    with Sorter(2) as sorter, pytest.raises(ValidationError):
        sorter.push((1,))


def test_sorter_ties_keep_push_order():
    """Should order equal keys by insertion."""
    with Sorter(2, key_width=1) as sorter:
        for rec in [(1, 5), (0, 7), (1, 3), (0, 1)]:
            sorter.push(rec)
        assert list(sorter.sort()) == [(0, 7), (0, 1), (1, 5), (1, 3)]


def test_sorter_spills_and_matches_reference(isolated_spill_dir):
    """Should match an in-memory sort when the budget forces spill runs."""
    rng = np.random.default_rng(1)
    keys = rng.integers(0, 1 << 62, size=5000).tolist()
    with Sorter(1, budget=MemoryBudget(1)) as sorter:
        for k in keys:
            sorter.push((k,))
        sorter.sort()
        assert sorter.spilled_runs > 0
        assert [k for (k,) in sorter] == sorted(keys)
        assert any(isolated_spill_dir.iterdir())
    assert not any(isolated_spill_dir.iterdir())


def test_sorter_spilled_ties_keep_push_order():
    """Should keep insertion order of equal keys across spill runs."""
    with Sorter(2, key_width=1, budget=MemoryBudget(1)) as sorter:
        for i in range(100):
            sorter.push((i % 3, i))
        out = list(sorter.sort())
    for key in range(3):
        seq = [i for k, i in out if k == key]
        assert seq == sorted(seq)


def test_sorter_rewind_restarts_stream():
    """Should replay the whole stream after rewind."""
    with Sorter(1) as sorter:
        for k in (2, 1):
            sorter.push((k,))
        first = list(sorter.sort())
        sorter.rewind()
        assert list(sorter) == first == [(1,), (2,)]


def test_sorter_take_while():
    """Should consume exactly the records sharing a prefix."""
    with Sorter(2) as sorter:
        for rec in [(1, 1), (1, 2), (2, 0)]:
            sorter.push(rec)
        sorter.sort()
        assert sorter.take_while((1,)) == [(1, 1), (1, 2)]
        assert sorter.peek() == (2, 0)
        assert len(sorter) == 3


# MinPQ tests


def test_min_pq_pops_in_priority_order():
    """Should drain in non-decreasing priority order."""
    pq = MinPQ(1, 1)
    for prio, payload in [(5, 0), (1, 1), (3, 2)]:
        pq.push((prio,), (payload,))
    assert [pq.pop()[0][0] for _ in range(3)] == [1, 3, 5]
    assert len(pq) == 0


def test_min_pq_ties_pop_in_push_order_with_spill():
    """Should break ties by insertion order even after spilling."""
    pq = MinPQ(1, 1, budget=MemoryBudget(1))
    for i in range(200):
        pq.push((i % 4,), (i,))
    drained = [pq.pop() for _ in range(200)]
    pq.close()
    prios = [p for (p,), _ in drained]
    assert prios == sorted(prios)
    for key in range(4):
        payloads = [v for (p,), (v,) in drained if p == key]
        assert payloads == sorted(payloads)


def test_min_pq_pop_all():
    """Should pop every entry of one priority."""
    pq = MinPQ(1, 1)
    pq.push((2,), (9,))
    pq.push((1,), (7,))
    pq.push((1,), (8,))
    assert pq.pop_all((1,)) == [(7,), (8,)]
    assert pq.peek_priority() == (2,)


def test_min_pq_pop_empty():
    """Should raise a usage error when empty."""
    with pytest.raises(UsageError):
        MinPQ(1, 0).pop()


# BitStream tests


def test_bit_stream_read_order_equals_append_order():
    """Should read bits back in the order they were appended."""
    bits = [True, False, False, True, True, False, True, False, True, True]
    stream = BitStream()
    for b in bits:
        stream.append(b)
    assert [stream.read() for _ in bits] == bits
    assert list(stream) == bits
    with pytest.raises(UsageError):
        stream.read()
    stream.rewind()
    assert stream.read() is True


# TimeForwardProcessor tests


def test_tfp_direct_delivery():
    """Should deliver each payload to its recipient event."""
    got = tfp_send_receive([1, 2, 3], [(2, "x"), (3, "y"), (3, "z")])

    assert got == {1: [], 2: ["x"], 3: ["y", "z"]}


def test_tfp_no_messages():
    """Should deliver nothing when no messages were sent."""
    assert tfp_send_receive(range(3), []) == {0: [], 1: [], 2: []}


def test_tfp_forwarding_matches_adjacency_oracle():
    """Should deliver forwarded messages like a dictionary of lists would."""
    rng = np.random.default_rng(3)
    plan: dict[int, list[tuple[int, tuple[int, int]]]] = {e: [] for e in range(100)}
    expected: dict[int, list[tuple[int, int]]] = {e: [] for e in range(100)}
    for i in range(500):
        src = int(rng.integers(0, 99))
        dst = int(rng.integers(src + 1, 100))
        plan[src].append((dst, (src, i)))
        expected[dst].append((src, i))

    got = tfp_send_receive(range(100), [], emit=lambda e, _: plan[e], budget=MemoryBudget(1))

    assert {e: sorted(v) for e, v in got.items()} == {e: sorted(v) for e, v in expected.items()}


def test_tfp_message_to_processed_event():
    """Should reject a message addressed to the past."""
    tfp = TimeForwardProcessor(1)
    tfp.receive(5)
    with pytest.raises(UsageError):
        tfp.send(5, (0,))


def test_tfp_events_out_of_order():
    """Should reject visiting events in decreasing order."""
    tfp = TimeForwardProcessor(1)
    tfp.receive(5)
    with pytest.raises(UsageError):
        tfp.receive(4)


def test_tfp_skipped_event_with_messages():
    """Should reject skipping an event that still has messages waiting."""
    tfp = TimeForwardProcessor(1)
    tfp.send(2, (1,))
    tfp.send(4, (2,))
    with pytest.raises(UsageError):
        tfp.receive(4)


def test_tfp_skipping_silent_events_is_fine():
    """Should allow skipping events nobody wrote to."""
    tfp = TimeForwardProcessor(1)
    tfp.send(4, (2,))
    assert tfp.receive(1) == []
    assert tfp.receive(4) == [(2,)]


def test_tfp_send_receive_rejects_unvisited_recipient():
    """Should fail when a message targets an event outside the visited set."""
    with pytest.raises(UsageError):
        tfp_send_receive([1, 3], [(2, "x")])
    with pytest.raises(UsageError):
        tfp_send_receive([1, 2], [(5, "y")])
