import itertools
import math

import networkx as nx
import numpy as np
import pytest

from lfr_stream.errors import ValidationError
from lfr_stream.hh_gen import compact, hh_edges, is_graphical, realize, realize_any
from lfr_stream.sampling import PldParams, sample_monotonic_pld


def _assert_simple_realization(edges: np.ndarray, degrees: np.ndarray) -> None:
    assert np.all(edges[:, 0] < edges[:, 1])
    assert len({tuple(e) for e in edges.tolist()}) == len(edges)
    realized = np.bincount(edges.ravel(), minlength=degrees.size)
    assert realized.tolist() == degrees.tolist()


# compact tests


def test_compact_small_sequence(small_degrees):
    """Should group equal degrees into (first id, count, degree) triples."""
    assert compact(small_degrees).state() == [(0, 2, 1), (2, 2, 2), (4, 2, 3)]


def test_compact_singleton():
    """Should give one group for one node."""
    assert compact([5]).state() == [(0, 1, 5)]


def test_compact_single_group():
    """Should give one group for a constant sequence."""
    assert compact([2, 2, 2]).state() == [(0, 3, 2)]


def test_compact_expand_roundtrip():
    """Should reproduce the input when expanded."""
    degrees = sample_monotonic_pld(500, PldParams(1, 50, 2.0), seed=0)

    groups = compact(degrees)

    assert groups.expand().tolist() == degrees.tolist()
    assert groups.size == np.unique(degrees).size


@pytest.mark.parametrize("degrees", [[2, 1], [0, 1], [[1, 2]]])
def test_compact_rejects_invalid(degrees):
    """Should reject decreasing, non-positive or nested sequences."""
    with pytest.raises(ValidationError):
        compact(degrees)


# hh_edges tests


def test_hh_small_sequence_trace(small_degrees):
    """Should reproduce the list states and edges of the worked example."""
    stream = hh_edges(compact(small_degrees), debug=True, record=True)

    edges = [tuple(e) for e in stream]

    assert stream.states == [
        [(0, 2, 1), (2, 2, 2), (4, 2, 3)],
        [(1, 1, 1), (2, 3, 2), (5, 1, 3)],
        [(2, 4, 2)],
        [(3, 2, 1), (5, 1, 2)],
        [(4, 2, 1)],
        [],
    ]
    assert edges == [(0, 4), (1, 5), (2, 3), (2, 4), (3, 5), (4, 5)]
    assert stream.graphical


def test_hh_triangle():
    """Should realize three nodes of degree two as a triangle."""
    result = realize([2, 2, 2])

    assert result.edges.tolist() == [[0, 1], [0, 2], [1, 2]]
    assert result.graphical


def test_hh_odd_sum_is_not_graphical():
    """Should report one unmet half-edge for three degree-one nodes."""
    result = realize([1, 1, 1])

    assert not result.graphical
    assert result.unmet == 1
    assert result.edges.tolist() == [[0, 1]]


def test_hh_empty_sequence():
    """Should produce no edges for an empty sequence."""
    result = realize([])

    assert result.edges.shape == (0, 2)
    assert result.graphical


def test_hh_stream_is_lexicographic():
    """Should emit the edge stream in lexicographic order."""
    degrees = sample_monotonic_pld(2000, PldParams(1, 80, 2.0), seed=4)
    if degrees.sum() % 2:
        degrees[0] += 1
        degrees.sort()

    edges = realize(degrees).edges
    keys = edges[:, 0] * degrees.size + edges[:, 1]

    assert np.all(np.diff(keys) > 0)


@pytest.mark.parametrize("seed", range(5))
def test_hh_realizes_graphical_pld_samples(seed):
    """Should realize graphical powerlaw sequences exactly while keeping the list invariants."""
    degrees = sample_monotonic_pld(3000, PldParams(1, 100, 2.0), seed=seed)
    if degrees.sum() % 2:
        degrees[0] += 1
        degrees.sort()

    result = realize(degrees, debug=True)

    assert result.graphical
    _assert_simple_realization(result.edges, degrees)
    assert result.peak_groups <= 2 * result.initial_groups


def test_hh_non_graphical_output_is_still_simple():
    """Should drop only unmet half-edges when the sequence is not graphical."""
    degrees = np.array([1, 4, 4, 4])

    result = realize(degrees)

    assert not result.graphical
    realized = np.bincount(result.edges.ravel(), minlength=4)
    assert np.all(realized <= degrees)
    assert int((degrees - realized).sum()) == result.unmet
    assert len({tuple(e) for e in result.edges.tolist()}) == len(result.edges)


@pytest.mark.slow
def test_hh_peak_groups_grow_like_sqrt_n():
    """Should keep the group list below 3 sqrt(n) on large powerlaw samples."""
    n = 100_000
    for seed in range(9):
        degrees = sample_monotonic_pld(n, PldParams(1, n, 2.0), seed=seed)
        if degrees.sum() % 2:
            degrees[0] += 1
            degrees.sort()
        assert realize(degrees).peak_groups <= 3 * math.sqrt(n)


# is_graphical tests


def test_is_graphical_complete_graph():
    """Should accept K4."""
    assert is_graphical([3, 3, 3, 3])


def test_is_graphical_degree_too_large():
    """Should reject a degree exceeding n - 1."""
    assert not is_graphical([1, 3])


def test_is_graphical_matches_erdos_gallai():
    """Should agree with the Erdős-Gallai characterization on every small sequence."""
    for n in range(1, 8):
        for degrees in itertools.combinations_with_replacement(range(1, 7), n):
            expected = nx.is_graphical(list(degrees), method="eg")
            assert is_graphical(degrees) == expected, degrees


def _random_sequences(count: int, seed: int):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(1, 51))
        yield np.sort(rng.integers(1, max(2, n), size=n))


def test_is_graphical_matches_erdos_gallai_random():
    """Should agree with the Erdős-Gallai characterization on random sequences up to 50 nodes."""
    for degrees in _random_sequences(500, seed=0):
        assert is_graphical(degrees) == nx.is_graphical(degrees.tolist(), method="eg"), degrees.tolist()


@pytest.mark.slow
def test_is_graphical_matches_erdos_gallai_random_exhaustive():
    """Should agree with the Erdős-Gallai characterization on 10^4 random sequences."""
    for degrees in _random_sequences(10_000, seed=1):
        assert is_graphical(degrees) == nx.is_graphical(degrees.tolist(), method="eg"), degrees.tolist()


# realize_any tests


def test_realize_any_skips_isolated_nodes():
    """Should map edges back to original ids and skip zero degrees."""
    edges, unmet = realize_any(np.array([0, 2, 0, 1, 1]))

    assert edges.tolist() == [[1, 3], [1, 4]]
    assert unmet.tolist() == [0, 0, 0, 0, 0]


def test_realize_any_reports_unmet_per_node():
    """Should attribute the unmet demand to the original node id."""
    edges, unmet = realize_any(np.array([0, 3, 1]))

    assert edges.tolist() == [[1, 2]]
    assert unmet.tolist() == [0, 2, 0]


def test_realize_any_rejects_negative():
    """Should refuse negative degrees."""
    with pytest.raises(ValidationError):
        realize_any(np.array([1, -1]))
