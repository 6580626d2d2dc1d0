"""Pair-accumulation kernels behind the sample Kendall's tau matrix.

Two interchangeable backends compute the same fixed-partition reduction:

* "numba": jitted kernels, chunks processed in parallel threads.
* "numpy": vectorized fallback, chunks processed serially in batches.

The pair index space {0, ..., T(T-1)/2 - 1} is split into ``N_CHUNKS``
contiguous chunks by a fixed formula. Each chunk accumulates its own partial
sum; partials are merged in ascending chunk order on a single thread. The
chunk grid never depends on the worker count, so results are bit-identical
for any ``workers`` value within a backend. Across backends the accumulation
order differs and agreement is ~1e-13, not bitwise.

Backend selection: the ``ROBUSTFACTORS_BACKEND`` environment variable, read at
import, set to "auto" (default: numba when importable), "numba", or "numpy".
"""

from __future__ import annotations

import math
import os

import numpy as np

__all__ = ["N_CHUNKS", "accumulate_pairs", "active_backend", "available_backends"]

N_CHUNKS = 64
_BATCH = 32768  # sub-batch length inside a chunk, numpy path only

try:
    import numba
    from numba import njit, prange

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    numba = None
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(func):
            return func

        return wrap

    prange = range

_env = os.environ.get("ROBUSTFACTORS_BACKEND", "auto").strip().lower()
if _env not in ("auto", "numba", "numpy"):
    raise ValueError(f"ROBUSTFACTORS_BACKEND must be auto, numba or numpy, got {_env!r}")
if _env == "auto":
    _BACKEND = "numba" if _HAVE_NUMBA else "numpy"
else:
    _BACKEND = _env
if _BACKEND == "numba" and not _HAVE_NUMBA:
    raise ImportError("ROBUSTFACTORS_BACKEND=numba but numba is not importable")


def active_backend() -> str:
    """Name of the backend selected at import time."""
    return _BACKEND


def available_backends() -> tuple[str, ...]:
    return ("numba", "numpy") if _HAVE_NUMBA else ("numpy",)


def _chunk_bounds(n_pairs: int) -> tuple[np.ndarray, np.ndarray]:
    """Fixed partition of the pair index space; empty chunks are legal."""
    edges = np.array([k * n_pairs // N_CHUNKS for k in range(N_CHUNKS + 1)], dtype=np.int64)
    return edges[:-1], edges[1:]


def _pair_of_index(p: int, T: int) -> tuple[int, int]:
    """Invert the linear pair index: p -> (i, j) with i < j.

    Pairs are ordered (0,1), (0,2), ..., (0,T-1), (1,2), ...; the count of
    pairs with first index < i is C(i) = i(2T-1-i)/2.
    """
    root = (2 * T - 1 - math.sqrt((2 * T - 1) ** 2 - 8 * p)) / 2.0
    i = int(root)
    # float guess can be off by one either way
    while i > 0 and i * (2 * T - 1 - i) // 2 > p:
        i -= 1
    while (i + 1) * (2 * T - 2 - i) // 2 <= p:
        i += 1
    j = i + 1 + (p - i * (2 * T - 1 - i) // 2)
    return i, j


# ---------------------------------------------------------------------------
# numba backend


@njit(cache=True)
def _chunk_sum_numba(Y, start, stop, buf):
    """Accumulate pairs [start, stop) into the lower triangle of buf."""
    T, N = Y.shape
    dropped = 0
    if start >= stop:
        return 0
    # invert the first linear index, then walk incrementally
    root = (2 * T - 1 - math.sqrt((2.0 * T - 1.0) ** 2 - 8.0 * start)) / 2.0
    i = int(root)
    while i > 0 and i * (2 * T - 1 - i) // 2 > start:
        i -= 1
    while (i + 1) * (2 * T - 2 - i) // 2 <= start:
        i += 1
    j = i + 1 + (start - i * (2 * T - 1 - i) // 2)
    diff = np.empty(N, dtype=np.float64)
    for _ in range(start, stop):
        s = 0.0
        for a in range(N):
            d = Y[i, a] - Y[j, a]
            diff[a] = d
            s += d * d
        if s > 0.0:
            inv = 1.0 / s
            for a in range(N):
                da = diff[a] * inv
                for b in range(a + 1):
                    buf[a, b] += da * diff[b]
        else:
            dropped += 1
        j += 1
        if j == T:
            i += 1
            j = i + 1
    return dropped


@njit(parallel=True, cache=True)
def _accumulate_numba(Y, starts, stops):
    n_chunks = starts.shape[0]
    N = Y.shape[1]
    partials = np.zeros((n_chunks, N, N), dtype=np.float64)
    dropped = np.zeros(n_chunks, dtype=np.int64)
    for k in prange(n_chunks):
        dropped[k] = _chunk_sum_numba(Y, starts[k], stops[k], partials[k])
    return partials, dropped


def _run_numba(Y, starts, stops, workers):
    if workers is not None and _HAVE_NUMBA:
        limit = min(int(workers), numba.config.NUMBA_NUM_THREADS)
        previous = numba.get_num_threads()
        numba.set_num_threads(max(1, limit))
        try:
            return _accumulate_numba(Y, starts, stops)
        finally:
            numba.set_num_threads(previous)
    return _accumulate_numba(Y, starts, stops)


# ---------------------------------------------------------------------------
# numpy backend


def _indices_of_range(p0: int, p1: int, T: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized pair-index inversion for linear indices [p0, p1)."""
    p = np.arange(p0, p1, dtype=np.int64)
    guess = (2 * T - 1 - np.sqrt((2.0 * T - 1.0) ** 2 - 8.0 * p)) / 2.0
    i = guess.astype(np.int64)
    for _ in range(3):
        i -= (i * (2 * T - 1 - i)) // 2 > p
        i += ((i + 1) * (2 * T - 2 - i)) // 2 <= p
    j = i + 1 + (p - (i * (2 * T - 1 - i)) // 2)
    return i, j


def _accumulate_numpy(Y, starts, stops):
    T, N = Y.shape
    n_chunks = starts.shape[0]
    partials = np.zeros((n_chunks, N, N), dtype=np.float64)
    dropped = np.zeros(n_chunks, dtype=np.int64)
    for k in range(n_chunks):
        for b0 in range(starts[k], stops[k], _BATCH):
            b1 = min(b0 + _BATCH, stops[k])
            idx_i, idx_j = _indices_of_range(b0, b1, T)
            D = Y[idx_i] - Y[idx_j]
            s = np.einsum("ij,ij->i", D, D)
            keep = s > 0.0
            dropped[k] += int((~keep).sum())
            if not keep.all():
                D = D[keep]
                s = s[keep]
            if D.shape[0]:
                partials[k] += D.T @ (D / s[:, None])
    return partials, dropped


# ---------------------------------------------------------------------------
# shared driver


def accumulate_pairs(Y: np.ndarray, workers: int | None = None, backend: str | None = None):
    """Sum of outer(d, d)/|d|^2 over all row pairs of Y, plus dropped count.

    Returns
    -------
    (np.ndarray, int)
        The N x N symmetric sum over retained pairs (not yet divided by the
        pair count) and the number of zero-difference pairs dropped.
    """
    Y = np.ascontiguousarray(Y, dtype=np.float64)
    T = Y.shape[0]
    n_pairs = T * (T - 1) // 2
    starts, stops = _chunk_bounds(n_pairs)
    chosen = backend or _BACKEND
    if chosen == "numba":
        if not _HAVE_NUMBA:
            raise ImportError("numba backend requested but numba is not importable")
        partials, dropped = _run_numba(Y, starts, stops, workers)
        total = np.zeros_like(partials[0])
        for k in range(partials.shape[0]):  # ascending merge, fixed order
            total += partials[k]
        # lower triangle was accumulated; mirror it
        total = total + total.T - np.diag(np.diag(total))
    elif chosen == "numpy":
        partials, dropped = _accumulate_numpy(Y, starts, stops)
        total = np.zeros_like(partials[0])
        for k in range(partials.shape[0]):
            total += partials[k]
        total = 0.5 * (total + total.T)  # gemm partials are symmetric up to rounding
    else:
        raise ValueError(f"unknown backend {chosen!r}")
    return total, int(dropped.sum())
