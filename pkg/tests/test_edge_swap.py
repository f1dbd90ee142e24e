import numpy as np
import pytest

from lfr_stream.edge_swap import (
    EdgeSwapper,
    RunConfig,
    SwapDescriptor,
    apply_swaps,
    as_swap_array,
    check_edge_list,
    dependency_stats,
    draw_random_swaps,
    run_swaps,
    run_swaps_multigraph,
    sequential_swap_oracle,
    swapped_edges,
)
from lfr_stream.em_primitives import MemoryBudget
from lfr_stream.errors import ValidationError
from lfr_stream.hh_gen import realize
from lfr_stream.sampling import PldParams, sample_monotonic_pld


def _degrees(edges: np.ndarray, n: int) -> list[int]:
    return np.bincount(edges.ravel(), minlength=n).tolist()


def _run_sizes(m: int, k: int) -> list[int]:
    return sorted({1, max(1, m // 8), max(1, m // 2), max(1, k)})


# swapped_edges tests


def test_swapped_edges_without_direction():
    """Should pair first with first and second with second."""
    assert swapped_edges((1, 2), (3, 4), False) == ((1, 3), (2, 4))


def test_swapped_edges_with_direction():
    """Should pair first with second and second with first."""
    assert swapped_edges((1, 2), (3, 4), True) == ((1, 4), (2, 3))


def test_swapped_edges_keeps_loops():
    """Should report the self-loop so the caller can skip the swap."""
    assert swapped_edges((1, 2), (1, 3), False) == ((1, 1), (2, 3))


# sequential_swap_oracle tests


def test_oracle_legal_swap():
    """Should perform a legal swap."""
    out = sequential_swap_oracle([[0, 1], [2, 3]], [(0, 1, 1)])

    assert out.tolist() == [[0, 3], [1, 2]]


def test_oracle_skips_multi_edge():
    """Should skip a swap that would duplicate an existing edge."""
    edges = [[0, 1], [0, 2], [2, 3]]

    assert sequential_swap_oracle(edges, [(0, 2, 0)]).tolist() == edges


def test_oracle_empty_swaps():
    """Should leave the graph unchanged without swaps."""
    assert sequential_swap_oracle([[0, 1], [2, 3]], []).tolist() == [[0, 1], [2, 3]]


def test_oracle_accepts_descriptors():
    """Should accept SwapDescriptor objects."""
    out = sequential_swap_oracle([[0, 1], [2, 3]], [SwapDescriptor(0, 1, True)])

    assert out.tolist() == [[0, 3], [1, 2]]


# run_swaps tests


def test_run_swaps_legal_swap():
    """Should perform a single legal swap."""
    assert run_swaps([[0, 1], [2, 3]], [(0, 1, 1)]).tolist() == [[0, 3], [1, 2]]


def test_run_swaps_skips_multi_edge():
    """Should leave the graph unchanged when the only swap is illegal."""
    edges = [[0, 1], [0, 2], [2, 3]]

    assert run_swaps(edges, [(0, 2, 0)]).tolist() == edges


def test_run_swaps_shared_edge_within_run():
    """Should let the second swap see the result of the first one in the same run."""
    edges = [[0, 1], [2, 3], [4, 5]]
    swaps = [(0, 1, 0), (0, 2, 0)]

    out = run_swaps(edges, swaps, RunConfig(2))

    assert out.tolist() == [[0, 4], [1, 3], [2, 5]]
    assert out.tolist() == sequential_swap_oracle(edges, swaps, run_size=2).tolist()


def test_run_swaps_only_illegal_swaps():
    """Should return the input when every swap creates a loop."""
    edges = [[0, 1], [0, 2], [1, 2]]

    assert run_swaps(edges, [(0, 1, 0), (0, 2, 1)]).tolist() == edges


def test_run_swaps_empty():
    """Should copy the input when no swaps are given."""
    edges = np.array([[0, 1], [2, 3]])

    out = run_swaps(edges, [])

    assert out.tolist() == edges.tolist()
    assert out is not edges


@pytest.mark.parametrize("swaps", [[(0, 2, 0)], [(1, 1, 0)], [(0, 1)]])
def test_run_swaps_rejects_bad_descriptors(swaps):
    """Should reject out-of-range ids, identical ids and malformed descriptors."""
    with pytest.raises(ValidationError):
        run_swaps([[0, 1], [2, 3]], swaps)


def test_run_swaps_rejects_unsorted_or_multigraph():
    """Should insist on a sorted simple edge list."""
    with pytest.raises(ValidationError):
        run_swaps([[2, 3], [0, 1]], [(0, 1, 0)])
    with pytest.raises(ValidationError):
        run_swaps([[0, 1], [0, 1]], [(0, 1, 0)])


def test_run_swaps_spilling_budget_matches_oracle(make_simple_graph):
    """Should give the oracle's result when every structure spills to disk."""
    rng = np.random.default_rng(17)
    edges = make_simple_graph(rng, 25, 60)
    swaps = draw_random_swaps(len(edges), 300, rng)

    out = run_swaps(edges, swaps, RunConfig(40), budget=MemoryBudget(1))

    assert out.tolist() == sequential_swap_oracle(edges, swaps, run_size=40).tolist()


def _oracle_trial(seed: int, make_simple_graph) -> None:
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 30))
    m = int(rng.integers(2, min(120, n * (n - 1) // 2) + 1))
    edges = make_simple_graph(rng, n, m)
    m = len(edges)
    k = int(rng.integers(0, 10 * m + 1))
    swaps = draw_random_swaps(m, k, rng)
    for r in _run_sizes(m, k):
        swapper = EdgeSwapper()
        out = swapper.run(edges, swaps, RunConfig(r))
        assert out.tolist() == sequential_swap_oracle(edges, swaps, run_size=r).tolist()
        check_edge_list(out, simple=True)
        assert _degrees(out, n) == _degrees(edges, n)
        assert all(run.scans <= 3 for run in swapper.runs)


@pytest.mark.parametrize("seed", range(40))
def test_run_swaps_matches_oracle(seed, make_simple_graph):
    """Should agree exactly with sequential application on random instances."""
    _oracle_trial(seed, make_simple_graph)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(40, 1040))
def test_run_swaps_matches_oracle_exhaustive(seed, make_simple_graph):
    """Should agree exactly with sequential application on a large battery."""
    _oracle_trial(seed, make_simple_graph)


@pytest.mark.parametrize("seed", range(10))
def test_run_swaps_descriptor_order_is_irrelevant(seed, make_simple_graph):
    """Should give the same graph for (a, b, d) and (b, a, d)."""
    rng = np.random.default_rng(seed)
    edges = make_simple_graph(rng, 20, 40)
    swaps = draw_random_swaps(len(edges), 120, rng)

    out = run_swaps(edges, swaps, RunConfig(15))
    mirrored = run_swaps(edges, swaps[:, [1, 0, 2]], RunConfig(15))

    assert out.tolist() == mirrored.tolist()


def test_run_swaps_touched_covers_changed_edges(make_simple_graph):
    """Should record every edge written during the call."""
    rng = np.random.default_rng(8)
    edges = make_simple_graph(rng, 20, 40)
    swapper = EdgeSwapper()

    out = swapper.run(edges, draw_random_swaps(len(edges), 30, rng), RunConfig(10, batch_size=10))

    new_edges = {tuple(e) for e in out.tolist()} - {tuple(e) for e in edges.tolist()}
    assert new_edges <= swapper.touched
    assert len(swapper.runs) == 3


# batching tests


def test_run_config_batch_defaults_to_eighth_of_edges():
    """Should cap a batch at m // 8 swaps unless told otherwise."""
    assert RunConfig(100).batch(80) == 10
    assert RunConfig(4).batch(80) == 4
    assert RunConfig(100, batch_size=30).batch(80) == 30
    assert RunConfig(100).batch(3) == 1


def test_run_config_rejects_empty_batch():
    """Should refuse a batch size below one."""
    with pytest.raises(ValidationError):
        RunConfig(10, batch_size=0)


def test_run_swaps_splits_long_run_into_batches(make_simple_graph):
    """Should execute one long run as bounded batches with the run's id semantics."""
    rng = np.random.default_rng(21)
    edges = make_simple_graph(rng, 20, 40)
    swaps = draw_random_swaps(len(edges), 30, rng)
    swapper = EdgeSwapper()

    out = swapper.run(edges, swaps, RunConfig(30))

    assert [run.swaps for run in swapper.runs] == [5] * 6
    assert all(run.scans <= 3 for run in swapper.runs)
    assert out.tolist() == sequential_swap_oracle(edges, swaps, run_size=30).tolist()


@pytest.mark.parametrize("seed", range(3))
@pytest.mark.parametrize("factor", [1, 10])
def test_run_swaps_whole_sequence_as_one_run(seed, factor, make_simple_graph):
    """Should match the oracle when all k <= 10m swaps form a single run."""
    rng = np.random.default_rng(seed)
    edges = make_simple_graph(rng, 150, 600)
    m = len(edges)
    swaps = draw_random_swaps(m, factor * m, rng)
    swapper = EdgeSwapper()

    out = swapper.run(edges, swaps, RunConfig(len(swaps)))

    assert out.tolist() == sequential_swap_oracle(edges, swaps, run_size=len(swaps)).tolist()
    assert max(run.swaps for run in swapper.runs) == m // 8
    assert all(run.scans <= 3 for run in swapper.runs)


def test_run_swaps_multigraph_one_run_with_repeated_ids(make_multigraph):
    """Should follow long chains on the same id across batches."""
    rng = np.random.default_rng(4)
    edges = make_multigraph(rng, 30, 160)
    ids = np.repeat(np.arange(8), 40)
    partners = rng.integers(8, len(edges), size=ids.size)
    swaps = np.stack([ids, partners, rng.integers(0, 2, size=ids.size)], axis=1)

    out = run_swaps_multigraph(edges, swaps, RunConfig(len(swaps)))

    expected = sequential_swap_oracle(edges, swaps, run_size=len(swaps), multigraph=True)
    assert out.tolist() == expected.tolist()


# run_swaps_multigraph tests


def test_multigraph_swap_removes_loop():
    """Should replace a loop by two ordinary edges, keeping degrees."""
    out = run_swaps_multigraph([[0, 0], [1, 2]], [(0, 1, 0)])

    assert out.tolist() == [[0, 1], [0, 2]]


def test_multigraph_swap_reduces_multiplicity():
    """Should lower the multiplicity of a doubled edge."""
    out = run_swaps_multigraph([[0, 1], [0, 1], [2, 3]], [(1, 2, 1)])

    assert out.tolist() == [[0, 1], [0, 3], [1, 2]]


def test_multigraph_swap_onto_existing_copy_is_skipped():
    """Should skip a swap producing an edge that still has a copy."""
    edges = [[0, 1], [0, 1], [0, 2], [1, 3]]

    assert run_swaps_multigraph(edges, [(2, 3, 0)]).tolist() == edges


def _multigraph_trial(seed: int, make_multigraph) -> None:
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 15))
    edges = make_multigraph(rng, n, int(rng.integers(2, 40)))
    swaps = draw_random_swaps(len(edges), int(rng.integers(1, 5 * len(edges))), rng)
    for r in _run_sizes(len(edges), len(swaps)):
        out = run_swaps_multigraph(edges, swaps, RunConfig(r))
        expected = sequential_swap_oracle(edges, swaps, run_size=r, multigraph=True)
        assert out.tolist() == expected.tolist()
        assert _degrees(out, n) == _degrees(edges, n)


@pytest.mark.parametrize("seed", range(30))
def test_multigraph_matches_oracle(seed, make_multigraph):
    """Should agree with the multigraph oracle and preserve degrees."""
    _multigraph_trial(seed, make_multigraph)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(30, 1030))
def test_multigraph_matches_oracle_exhaustive(seed, make_multigraph):
    """Should agree with the multigraph oracle on a large battery."""
    _multigraph_trial(seed, make_multigraph)


# apply_swaps tests


def test_apply_swaps_in_memory_matches_pipeline(make_simple_graph):
    """Should give the same graph on both execution paths."""
    rng = np.random.default_rng(5)
    edges = make_simple_graph(rng, 30, 80)
    swaps = draw_random_swaps(len(edges), 400, rng)
    cfg = RunConfig(25)

    assert apply_swaps(edges, swaps, cfg, in_memory=True).tolist() == apply_swaps(edges, swaps, cfg).tolist()


# draw_random_swaps tests


def test_draw_random_swaps_two_edges():
    """Should always pick both ids when only two edges exist."""
    swaps = draw_random_swaps(2, 100, seed=1)

    assert {frozenset(row) for row in swaps[:, :2].tolist()} == {frozenset((0, 1))}


def test_draw_random_swaps_uniform_ids():
    """Should use every edge id about 2k/m times."""
    m, k = 100, 100_000
    swaps = draw_random_swaps(m, k, seed=2)
    freq = np.bincount(swaps[:, :2].ravel(), minlength=m)
    p = 2 / m
    sigma = np.sqrt(k * p * (1 - p))

    assert np.all(np.abs(freq - k * p) < 4 * sigma)
    assert np.all(swaps[:, 0] != swaps[:, 1])
    assert set(np.unique(swaps[:, 2]).tolist()) == {0, 1}


def test_draw_random_swaps_deterministic():
    """Should repeat for a fixed seed."""
    assert draw_random_swaps(50, 20, seed=9).tolist() == draw_random_swaps(50, 20, seed=9).tolist()


def test_draw_random_swaps_needs_two_edges():
    """Should reject graphs with fewer than two edges."""
    with pytest.raises(ValidationError):
        draw_random_swaps(1, 5, seed=0)


def test_as_swap_array_empty():
    """Should normalize an empty swap list."""
    assert as_swap_array([], 5).shape == (0, 3)


# dependency_stats tests


def test_dependency_stats_independent_swaps():
    """Should report one configuration per swap when no ids are shared."""
    edges = [[0, 1], [2, 3], [4, 5], [6, 7], [8, 9], [10, 11]]

    stats = dependency_stats(edges, [(0, 1, 0), (2, 3, 1), (4, 5, 0)], RunConfig(3))

    assert stats.histogram == {1: 1.0}
    assert stats.swaps == 3


def test_dependency_stats_unit_runs(make_simple_graph):
    """Should never see extra configurations when each run holds one swap."""
    rng = np.random.default_rng(3)
    edges = make_simple_graph(rng, 20, 50)

    stats = dependency_stats(edges, draw_random_swaps(len(edges), 50, rng), RunConfig(1))

    assert stats.single_configuration == 1.0


@pytest.mark.slow
def test_dependency_stats_powerlaw_graph():
    """Should leave most swaps without additional configurations at the default run size."""
    degrees = sample_monotonic_pld(4000, PldParams(2, 100, 2.0), seed=0)
    if degrees.sum() % 2:
        degrees[-1] += 1
    edges = realize(degrees).edges
    m = len(edges)

    stats = dependency_stats(edges, draw_random_swaps(m, m, seed=1), RunConfig.default(m))

    assert stats.single_configuration >= 0.7
