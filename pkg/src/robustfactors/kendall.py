"""Sample multivariate Kendall's tau matrix and population diagnostics.

The sample matrix is the average over all unordered row pairs of the outer
product of the normalized difference vector: a symmetric PSD matrix with unit
trace and spectral norm at most one. It is invariant to the radial part of an
elliptical distribution, which is what makes the factor-number criteria built
on it robust to heavy tails.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from ._errors import InvariantError
from ._kernels import accumulate_pairs, active_backend
from .elliptical import RngStream
from .panel import DataPanel

__all__ = [
    "KendallTauMatrix",
    "sample_kendall_tau",
    "sample_kendall_tau_parallel",
    "population_kendall_eigenvalues_oracle",
    "han_lower_bound",
    "save_matrix_binary",
    "load_matrix_binary",
    "verify_kendall_invariants",
]

_DUMP_VERSION = 1


@dataclass(frozen=True)
class KendallTauMatrix:
    """N x N sample multivariate Kendall's tau.

    Attributes
    ----------
    matrix : np.ndarray
        Symmetric PSD matrix with unit trace over retained pairs.
    n_pairs : int
        Number of pairs averaged (retained pairs).
    degenerate_pairs_dropped : int
        Zero-difference pairs dropped before averaging.
    """

    matrix: np.ndarray
    n_pairs: int
    degenerate_pairs_dropped: int = 0


def _panel_values(panel) -> np.ndarray:
    if isinstance(panel, DataPanel):
        if panel.has_missing:
            raise ValueError("panel has missing values; impute first")
        return panel.values
    values = np.asarray(panel, dtype=np.float64)
    if values.ndim != 2:
        raise ValueError("expected a T x N matrix")
    return values


def sample_kendall_tau(panel, backend: str | None = None) -> KendallTauMatrix:
    """Average outer(d, d)/|d|^2 over all T(T-1)/2 unordered row pairs.

    Pairs with zero difference are dropped and counted; the average runs over
    retained pairs, which keeps the trace exactly one up to rounding.

    Parameters
    ----------
    panel : DataPanel or np.ndarray
        T x N observations, T >= 2, no missing values.
    backend : str, optional
        Override the backend chosen at import ("numba" or "numpy").

    Returns
    -------
    KendallTauMatrix
    """
    return sample_kendall_tau_parallel(panel, workers=None, backend=backend)


def sample_kendall_tau_parallel(
    panel, workers: int | None = None, backend: str | None = None
) -> KendallTauMatrix:
    """Same value as :func:`sample_kendall_tau`, bit-identical for any workers.

    The pair index space is split into a fixed chunk grid independent of the
    worker count; per-chunk partial sums merge in ascending order, so the
    result does not depend on ``workers``.
    """
    Y = _panel_values(panel)
    T = Y.shape[0]
    if T < 2:
        raise ValueError("need at least two rows to form pairs")
    if workers is not None and workers < 1:
        raise ValueError("workers must be >= 1")
    total, dropped = accumulate_pairs(Y, workers=workers, backend=backend)
    n_pairs = T * (T - 1) // 2 - dropped
    if n_pairs == 0:
        raise ValueError("all row pairs are degenerate (constant panel)")
    matrix = total / n_pairs
    return KendallTauMatrix(matrix=matrix, n_pairs=n_pairs, degenerate_pairs_dropped=dropped)


def verify_kendall_invariants(kt: KendallTauMatrix) -> None:
    """Raise InvariantError unless kt satisfies its type contracts.

    Checks symmetry (1e-12), trace one (1e-10), positive semidefiniteness
    (smallest eigenvalue >= -1e-10) and spectral norm <= 1 + 1e-10.
    """
    M = kt.matrix
    if not np.isfinite(M).all():
        raise InvariantError("kendall matrix has non-finite entries")
    asym = float(np.abs(M - M.T).max())
    if asym > 1e-12:
        raise InvariantError(f"kendall matrix asymmetry {asym:.3e} exceeds 1e-12")
    trace_err = abs(float(np.trace(M)) - 1.0)
    if trace_err > 1e-10:
        raise InvariantError(f"kendall matrix trace deviates from 1 by {trace_err:.3e}")
    eigs = np.linalg.eigvalsh(0.5 * (M + M.T))
    if eigs[0] < -1e-10:
        raise InvariantError(f"kendall matrix not PSD: min eigenvalue {eigs[0]:.3e}")
    if eigs[-1] > 1.0 + 1e-10:
        raise InvariantError(f"kendall matrix spectral norm {eigs[-1]:.6f} exceeds 1")


def population_kendall_eigenvalues_oracle(
    sigma_eigenvalues, mc_draws: int, rng: RngStream
) -> np.ndarray:
    """Monte Carlo value of E[lambda_j g_j^2 / sum_i lambda_i g_i^2] per j.

    This is the population eigenvalue transfer map from the scatter spectrum
    to the Kendall's tau spectrum. The outputs sum to one up to rounding
    because the summands sum to one pointwise.

    Parameters
    ----------
    sigma_eigenvalues : array_like
        Nonnegative scatter eigenvalues, at least one positive.
    mc_draws : int
        Standard normal vectors averaged, >= 1.
    rng : RngStream
        Stream value; draws consume the directional lane.
    """
    lam = np.asarray(sigma_eigenvalues, dtype=np.float64)
    if lam.ndim != 1 or lam.size == 0:
        raise ValueError("sigma_eigenvalues must be a nonempty vector")
    if np.any(lam < 0):
        raise ValueError("sigma_eigenvalues must be nonnegative")
    if not np.any(lam > 0):
        raise ValueError("all scatter eigenvalues are zero")
    if mc_draws < 1:
        raise ValueError("mc_draws must be >= 1")
    q = lam.size
    gen = rng.generator(0)
    total = np.zeros(q, dtype=np.float64)
    done = 0
    block = 200_000
    while done < mc_draws:
        b = min(block, mc_draws - done)
        g2 = gen.standard_normal((b, q))
        np.square(g2, out=g2)
        weighted = g2 * lam
        total += (weighted / weighted.sum(axis=1, keepdims=True)).sum(axis=0)
        done += b
    return total / mc_draws


def han_lower_bound(sigma_eigenvalues, j: int, N: int) -> float:
    """Lower bound on the j-th Kendall's tau eigenvalue from the scatter spectrum.

    Evaluates lambda_j(S) / (Tr(S) + 4 |S|_F sqrt(log N) + 8 |S|_2 log N)
    times (1 - sqrt(3)/N^2), with natural log, |S|_F = sqrt(sum lambda_i^2)
    and |S|_2 the largest eigenvalue. ``j`` is 1-based on the descending
    spectrum.
    """
    lam = np.sort(np.asarray(sigma_eigenvalues, dtype=np.float64))[::-1]
    if not 1 <= j <= lam.size:
        raise ValueError(f"j must be in [1, {lam.size}], got {j}")
    if N < 2:
        raise ValueError("N must be >= 2")
    if lam[j - 1] == 0.0:
        return 0.0
    trace = float(lam.sum())
    fro = float(np.sqrt(np.sum(lam**2)))
    spec2 = float(lam[0])
    logn = np.log(N)
    denom = trace + 4.0 * fro * np.sqrt(logn) + 8.0 * spec2 * logn
    return float(lam[j - 1] / denom * (1.0 - np.sqrt(3.0) / N**2))


def save_matrix_binary(kt: KendallTauMatrix, path) -> None:
    """Dump the matrix as an 8-byte header (N, version as uint32) plus row-major float64."""
    M = kt.matrix
    with open(path, "wb") as fh:
        fh.write(struct.pack("<II", M.shape[0], _DUMP_VERSION))
        fh.write(np.ascontiguousarray(M, dtype="<f8").tobytes())


def load_matrix_binary(path) -> np.ndarray:
    """Read a matrix dumped by :func:`save_matrix_binary`."""
    with open(path, "rb") as fh:
        header = fh.read(8)
        if len(header) != 8:
            raise ValueError(f"{path}: truncated header")
        n, version = struct.unpack("<II", header)
        if version != _DUMP_VERSION:
            raise ValueError(f"{path}: unsupported dump version {version}")
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != n * n:
        raise ValueError(f"{path}: expected {n * n} values, found {data.size}")
    return data.reshape(n, n).astype(np.float64)


def backend_in_use() -> str:
    """Accumulation backend selected at import time ("numba" or "numpy")."""
    return active_backend()
