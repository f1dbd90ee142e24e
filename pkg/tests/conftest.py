import numpy as np
import pytest

from lfr_stream import settings
from lfr_stream.lfr_pipeline import LfrParams


@pytest.fixture(autouse=True)
def isolated_spill_dir(tmp_path, monkeypatch):
    """Keep sorter and priority-queue spill runs inside the test's tmp dir."""
    spill = tmp_path / "spill"
    spill.mkdir()
    monkeypatch.setattr(settings, "SPILL_DIR", str(spill))
    return spill


@pytest.fixture
def small_degrees():
    return np.array([1, 1, 2, 2, 3, 3])


@pytest.fixture
def small_multigraph():
    # Half-edge order 6,6,4,5,4,5,6,1,3,2,3,6 with labels shifted to 0-based.
    return np.array([[0, 5], [1, 2], [2, 5], [3, 4], [3, 4], [5, 5]])


@pytest.fixture
def small_lfr_params():
    return LfrParams(n=200, dmin=5, dmax=20, gamma=2.0, smin=20, smax=50, beta=1.0, mu=0.2)


def random_simple_graph(rng: np.random.Generator, n: int, m: int) -> np.ndarray:
    """Sorted simple graph with ``m`` distinct edges on ``n`` nodes."""
    iu, iv = np.triu_indices(n, k=1)
    pick = np.sort(rng.choice(iu.size, size=min(m, iu.size), replace=False))
    return np.stack([iu[pick], iv[pick]], axis=1).astype(np.int64)


def random_multigraph(rng: np.random.Generator, n: int, m: int) -> np.ndarray:
    """Sorted multigraph with loops and parallel edges allowed."""
    pairs = np.sort(rng.integers(0, n, size=(m, 2)), axis=1)
    return pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))].astype(np.int64)


@pytest.fixture
def make_simple_graph():
    return random_simple_graph


@pytest.fixture
def make_multigraph():
    return random_multigraph
