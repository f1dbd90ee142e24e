"""Seeded randomness: powerlaw integers, permutations and rounding helpers."""

import functools
import logging
import math
import zlib
from dataclasses import dataclass

import numpy as np

from lfr_stream.errors import ValidationError

logger = logging.getLogger(__name__)

SeedLike = int | np.random.Generator

# Above this support size the normalizer is accumulated with math.fsum.
_COMPENSATED_SUM_THRESHOLD = 1_000_000


def make_rng(seed: int, *tags: str | int) -> np.random.Generator:
    """Return an independent PCG64 stream derived from ``seed`` and ``tags``.

    Each tag is hashed (CRC-32) into the spawn key of a ``SeedSequence``, so
    ``make_rng(s, "hh")`` and ``make_rng(s, "intra", 3)`` never overlap.
    """
    if seed < 0:
        raise ValidationError(f"seed must be non-negative, got {seed}")
    spawn_key = tuple(zlib.crc32(str(tag).encode()) for tag in tags)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=spawn_key)))


def as_rng(seed: SeedLike, *tags: str | int) -> np.random.Generator:
    """Accept either an integer seed or an already constructed generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return make_rng(int(seed), *tags)


@dataclass(frozen=True)
class PldParams:
    """Powerlaw over the integers ``a <= k < b`` with ``P[k] ~ k**-gamma``."""

    a: int
    b: int
    gamma: float

    def __post_init__(self) -> None:
        if self.a < 1:
            raise ValidationError(f"powerlaw lower limit must be >= 1, got {self.a}")
        if self.b <= self.a:
            raise ValidationError(f"powerlaw upper limit must exceed lower limit ({self.a}), got {self.b}")
        if self.gamma < 1:
            raise ValidationError(f"powerlaw exponent must be >= 1, got {self.gamma}")

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.a, self.b, dtype=np.int64)

    def pmf(self) -> np.ndarray:
        weights = _weights(self.a, self.b, self.gamma)
        return weights / _normalizer(self.a, self.b, self.gamma)

    def cdf(self) -> np.ndarray:
        return _cdf(self.a, self.b, self.gamma)


def _weights(a: int, b: int, gamma: float) -> np.ndarray:
    return np.arange(a, b, dtype=np.float64) ** (-gamma)


@functools.lru_cache(maxsize=32)
def _normalizer(a: int, b: int, gamma: float) -> float:
    weights = _weights(a, b, gamma)
    if b - a > _COMPENSATED_SUM_THRESHOLD:
        return math.fsum(weights.tolist())
    return float(weights.sum())


@functools.lru_cache(maxsize=32)
def _cdf(a: int, b: int, gamma: float) -> np.ndarray:
    cdf = np.cumsum(_weights(a, b, gamma)) / _normalizer(a, b, gamma)
    cdf[-1] = 1.0
    cdf.setflags(write=False)
    return cdf


def pld_inverse_cdf(u: float, p: PldParams) -> int:
    """Return the smallest ``k`` in ``[a, b)`` whose CDF exceeds ``u``.

    Args:
        u: Uniform variate in ``[0, 1)``
        p: Powerlaw parameters

    Returns:
        The sampled integer
    """
    if not 0.0 <= u < 1.0:
        raise ValidationError(f"inverse CDF argument must lie in [0, 1), got {u}")
    return int(pld_inverse_cdf_array(np.asarray([u]), p)[0])


def pld_inverse_cdf_array(u: np.ndarray, p: PldParams) -> np.ndarray:
    cdf = p.cdf()
    idx = np.searchsorted(cdf, u, side="right")
    return p.a + np.minimum(idx, len(cdf) - 1).astype(np.int64)


def sample_pld(n: int, p: PldParams, seed: SeedLike) -> np.ndarray:
    """Draw ``n`` independent powerlaw integers (unsorted)."""
    rng = as_rng(seed, "pld")
    return pld_inverse_cdf_array(rng.random(n), p)


def sorted_uniforms(n: int, rng: np.random.Generator) -> np.ndarray:
    """Order statistics of ``n`` uniforms on ``[0, 1)``, generated front to back.

    The k-th minimum is obtained from the previous one by the running product
    of ``V_j ** (1 / (n - j))``, so the sequence can be streamed.
    """
    if n == 0:
        return np.empty(0, dtype=np.float64)
    log_gaps = np.log1p(-rng.random(n)) / np.arange(n, 0, -1, dtype=np.float64)
    u = -np.expm1(np.cumsum(log_gaps))
    return np.minimum(u, np.nextafter(1.0, 0.0))


def sample_monotonic_pld(n: int, p: PldParams, seed: SeedLike) -> np.ndarray:
    """Return a non-decreasing sample of ``n`` powerlaw integers.

    Distributed as the sorted outcome of ``n`` i.i.d. draws.
    """
    if n < 1:
        raise ValidationError(f"sample size must be >= 1, got {n}")
    rng = as_rng(seed, "monotonic-pld")
    return pld_inverse_cdf_array(sorted_uniforms(n, rng), p)


def random_permutation(n: int, seed: SeedLike) -> np.ndarray:
    if n < 0:
        raise ValidationError(f"permutation size must be >= 0, got {n}")
    return as_rng(seed, "permutation").permutation(n)


def randomized_round(x: float, rng: np.random.Generator) -> int:
    """Round ``x`` down or up at random so that the expectation equals ``x``."""
    if x < 0:
        raise ValidationError(f"cannot round negative value {x}")
    lo = math.floor(x)
    return lo + int(rng.random() < x - lo)


def randomized_round_array(x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    if np.any(x < 0):
        raise ValidationError("cannot round negative values")
    lo = np.floor(x)
    return (lo + (rng.random(x.shape) < x - lo)).astype(np.int64)


def even_split(d: int, parts: int, rng: np.random.Generator) -> list[int]:
    """Split ``d`` into ``parts`` values differing by at most one.

    The parts that receive the remainder are chosen uniformly at random.
    """
    if parts < 1:
        raise ValidationError(f"cannot split into {parts} parts")
    if d < 0:
        raise ValidationError(f"cannot split negative value {d}")
    base, rem = divmod(d, parts)
    out = [base] * parts
    if rem:
        for i in rng.choice(parts, size=rem, replace=False).tolist():
            out[i] += 1
    return out
