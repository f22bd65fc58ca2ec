"""Shared plumbing: error types, seeded RNG streams, binomial tables."""

from __future__ import annotations

import zlib
from concurrent.futures import ThreadPoolExecutor
from math import comb

import numpy as np


class InvalidParameterError(ValueError):
    """A parameter violates a documented precondition."""


class CapacityError(RuntimeError):
    """A requested object exceeds the configured size limits."""


class ConvergenceError(RuntimeError):
    """An iterative solver failed to reach its tolerance.

    Carries the best estimate produced so far in ``best``.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


# Default size limits.  All are overridable through function arguments;
# these values keep every desk-scale experiment comfortably in memory.
MAX_BASIS_DIM = 5_000_000
MAX_FULL_DIM = 1_000_000        # full-space state vectors (oracles)
DENSE_LIMIT = 4000              # dense symmetric-subspace matrices
FULL_DENSE_LIMIT = 4096         # dense full-space matrices
DENSE_TENSOR_LIMIT = 48         # N above which order-4 dense views are refused


def derived_rng(seed: int, tag: str, index: int = 0) -> np.random.Generator:
    """Deterministic per-purpose RNG stream.

    Streams are derived from (seed, tag, index) so independent trials and
    independent operations never share state, regardless of execution order
    or thread scheduling.
    """
    return np.random.default_rng(
        np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, zlib.crc32(tag.encode()), int(index)])
    )


def run_trials(fn, n_trials: int, threads: int = 1) -> list:
    """Evaluate fn(i) for i in range(n_trials), optionally on a thread pool.

    Results are returned in trial order, so output is independent of the
    thread count as long as each trial derives its own RNG stream.
    """
    if threads <= 1 or n_trials <= 1:
        return [fn(i) for i in range(n_trials)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n_trials)))


def binom_table(max_n: int) -> np.ndarray:
    """Pascal triangle as an int64 array B[a, b] = C(a, b), a, b <= max_n."""
    table = np.zeros((max_n + 1, max_n + 1), dtype=np.int64)
    for a in range(max_n + 1):
        table[a, 0] = 1
        for b in range(1, a + 1):
            table[a, b] = table[a - 1, b - 1] + table[a - 1, b]
    return table


def falling_factorial(n: int, k: int) -> int:
    """n (n-1) ... (n-k+1); zero whenever k > n >= 0."""
    out = 1
    for i in range(k):
        out *= n - i
    return out


def symmetric_dimension(n_modes: int, n_bos: int) -> int:
    """Number of occupation vectors: C(n_modes + n_bos - 1, n_bos)."""
    return comb(n_modes + n_bos - 1, n_bos)
