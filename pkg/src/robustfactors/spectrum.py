"""Eigenvalue extraction and the regularization shared by every criterion.

All five factor-number criteria consume an :class:`EigenSpectrum`: the
descending raw eigenvalues of either the Kendall's tau matrix or the
covariance-path Gram matrix, shifted by c/sqrt(min(N, T)), with tail sums and
the mock zero-factor eigenvalue precomputed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._errors import InvariantError, NumericalError

__all__ = ["EigenSpectrum", "eigenvalues_sym", "build_spectrum", "gram_eigenvalues"]


@dataclass(frozen=True)
class EigenSpectrum:
    """Descending spectrum with regularized values, tail sums and mock eigenvalue.

    Attributes
    ----------
    raw : np.ndarray
        lambda_j, j = 1..L, nonincreasing, clamped at zero.
    regularized : np.ndarray
        lambda_j + c * delta.
    delta : float
        1/sqrt(m), m = min(N, T).
    c : float
        Regularizer constant.
    mock_zero : float
        -1/log(delta), the artificial eigenvalue used when zero factors are
        allowed.
    tail_sums : np.ndarray
        tail_sums[j] = V_j = sum_{i > j} regularized[i-1], j = 0..L-1.
    """

    raw: np.ndarray
    regularized: np.ndarray
    delta: float
    c: float
    mock_zero: float
    tail_sums: np.ndarray

    @property
    def size(self) -> int:
        return self.raw.shape[0]

    def lam(self, j: int) -> float:
        """Regularized eigenvalue by 1-based index; j = 0 is the mock eigenvalue."""
        if j == 0:
            return self.mock_zero
        return float(self.regularized[j - 1])

    def tail(self, j: int) -> float:
        """V_j for j = 0..L-1; V_{-1} extends the telescoping identity with the mock value."""
        if j == -1:
            return float(self.tail_sums[0]) + self.mock_zero
        return float(self.tail_sums[j])


def eigenvalues_sym(matrix, top_k: int | None = None, check: bool = False) -> np.ndarray:
    """Descending eigenvalues of a symmetric matrix.

    Parameters
    ----------
    matrix : array_like
        N x N, symmetric to 1e-8 absolute, finite entries.
    top_k : int, optional
        Return only the top_k largest.
    check : bool
        Debug mode: also verify the reconstruction
        |Q L Q^T - A|_F <= 1e-8 |A|_F from the full decomposition.
    """
    A = np.asarray(matrix, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    if not np.isfinite(A).all():
        raise ValueError("matrix has non-finite entries")
    asym = float(np.abs(A - A.T).max())
    if asym > 1e-8:
        raise ValueError(f"matrix asymmetry {asym:.3e} exceeds 1e-8")
    S = 0.5 * (A + A.T)
    try:
        if check:
            vals, vecs = np.linalg.eigh(S)
            recon = (vecs * vals) @ vecs.T
            err = float(np.linalg.norm(recon - S))
            ref = float(np.linalg.norm(S))
            if err > 1e-8 * max(ref, 1e-300):
                raise InvariantError(
                    f"eigendecomposition reconstruction error {err:.3e} exceeds 1e-8 * |A|_F"
                )
        else:
            vals = np.linalg.eigvalsh(S)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    vals = vals[::-1]
    if top_k is not None:
        if top_k < 1:
            raise ValueError("top_k must be >= 1")
        vals = vals[:top_k]
    return np.ascontiguousarray(vals)


def build_spectrum(raw_eigenvalues, N: int, T: int, c: float, L: int | None = None) -> EigenSpectrum:
    """Assemble the regularized spectrum used by the criteria.

    Parameters
    ----------
    raw_eigenvalues : array_like
        Descending eigenvalues. Values below -1e-10 * max(lambda_1, 1) violate
        the PSD contract; negatives inside that rounding floor are clamped to
        zero. The floor scales with the top eigenvalue because eigensolver
        noise is relative, and covariance spectra of heavy-tailed panels can
        sit many orders of magnitude above one.
    N, T : int
        Panel dimensions; m = min(N, T) drives the regularizer.
    c : float
        Positive regularizer constant.
    L : int, optional
        Eigenvalues retained; defaults to min(N, T, len(raw)).
    """
    raw = np.asarray(raw_eigenvalues, dtype=np.float64).copy()
    if raw.ndim != 1 or raw.size == 0:
        raise ValueError("raw_eigenvalues must be a nonempty vector")
    if np.any(np.diff(raw) > 1e-12):
        raise ValueError("raw_eigenvalues must be nonincreasing")
    if not c > 0:
        raise ValueError("c must be positive")
    if N < 2 or T < 2:
        raise ValueError("N and T must be >= 2")
    if L is None:
        L = min(N, T, raw.size)
    if L == 0:
        raise ValueError("L must be >= 1")
    if L > raw.size:
        raise ValueError(f"L = {L} exceeds spectrum length {raw.size}")
    raw = raw[:L]
    floor = -1e-10 * max(float(raw[0]), 1.0)
    if raw[-1] < floor:
        raise InvariantError(
            f"spectrum fails PSD contract: min eigenvalue {raw[-1]:.3e} below {floor:.3e}"
        )
    np.clip(raw, 0.0, None, out=raw)
    m = min(N, T)
    delta = 1.0 / np.sqrt(m)
    regularized = raw + c * delta
    mock_zero = -1.0 / np.log(delta)
    # V_j = sum of regularized[j:]; the reverse cumulative sum makes the
    # telescoping identity V_{j-1} = V_j + regularized[j-1] hold exactly.
    tail_sums = np.cumsum(regularized[::-1])[::-1].copy()
    return EigenSpectrum(
        raw=raw,
        regularized=regularized,
        delta=float(delta),
        c=float(c),
        mock_zero=float(mock_zero),
        tail_sums=tail_sums,
    )


def gram_eigenvalues(Y) -> np.ndarray:
    """Descending spectrum of the covariance-path Gram matrix Y Y^T / (N T).

    Computed in the smaller dimension (T x T when T <= N, else N x N); the
    nonzero eigenvalues of the two Gram forms agree, which is the spectrum
    the ER/GR/TCR baselines consume.
    """
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim != 2:
        raise ValueError("Y must be a T x N matrix")
    T, N = Y.shape
    if T <= N:
        G = Y @ Y.T
    else:
        G = Y.T @ Y
    G /= N * T
    return eigenvalues_sym(G)
