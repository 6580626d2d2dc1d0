"""Seeded samplers for elliptical distributions.

Covers the multivariate Gaussian, the multivariate t for any positive degrees
of freedom (ν = 1 is the multivariate Cauchy), and the generic stochastic
representation μ + ξAU with U uniform on the unit sphere.

Determinism contract
--------------------
:class:`RngStream` is a value, not a stateful object. Each sampler derives
fresh counter-based generators (numpy Philox) from
``SeedSequence(entropy=master_seed, spawn_key=(stream_index, lane))`` and is a
pure function of its arguments: the same stream value always yields the same
sample. Normal variates use ``Generator.standard_normal`` (ziggurat); this
choice is fixed because bit-level reproducibility is part of the contract.

Lane layout: lane 0 carries directional/normal draws, lane 1 carries radial
draws (chi-square mixing variables, ξ). Because the Gaussian and Student-t
samplers consume identical lane-0 sequences, samples driven by the same stream
share directional components; dividing out the radial parts recovers identical
unit vectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "EllipticalSpec",
    "RngStream",
    "sample_gaussian",
    "sample_student_t",
    "sample_elliptical_generic",
]

_LANE_DIRECTIONAL = 0
_LANE_RADIAL = 1


@dataclass(frozen=True)
class RngStream:
    """Addressable random stream: (master_seed, stream_index).

    Streams with identical coordinates produce identical sequences; distinct
    indices are independent for this package's purposes. Replication k of a
    Monte Carlo run uses stream_index = k.
    """

    master_seed: int
    stream_index: int = 0

    def __post_init__(self):
        if self.stream_index < 0:
            raise ValueError("stream_index must be nonnegative")

    def generator(self, lane: int = 0) -> np.random.Generator:
        """Fresh Philox generator for (master_seed, stream_index, lane)."""
        seq = np.random.SeedSequence(
            entropy=self.master_seed, spawn_key=(self.stream_index, lane)
        )
        return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True)
class EllipticalSpec:
    """Distribution family plus location and scatter factor.

    Parameters
    ----------
    family : str
        "gaussian" or "student_t".
    mu : np.ndarray
        Location d-vector.
    scatter_factor : np.ndarray
        d x q matrix A with A A^T = Σ. For diagonal Σ pass the elementwise
        square root.
    nu : float, optional
        Degrees of freedom; required (and > 0) when family is "student_t".
    """

    family: str
    mu: np.ndarray
    scatter_factor: np.ndarray
    nu: float | None = None

    def __post_init__(self):
        if self.family not in ("gaussian", "student_t"):
            raise ValueError(f"unknown family: {self.family!r}")
        mu = np.asarray(self.mu, dtype=np.float64)
        A = np.asarray(self.scatter_factor, dtype=np.float64)
        if A.ndim != 2:
            raise ValueError("scatter_factor must be a d x q matrix")
        if mu.ndim != 1 or mu.shape[0] != A.shape[0]:
            raise ValueError("mu length must equal scatter_factor row count")
        if self.family == "student_t":
            if self.nu is None or not self.nu > 0:
                raise ValueError("student_t requires nu > 0")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "scatter_factor", A)

    @property
    def dim(self) -> int:
        return self.scatter_factor.shape[0]

    @property
    def rank(self) -> int:
        return self.scatter_factor.shape[1]


def _directional_normals(n: int, q: int, rng: RngStream) -> np.ndarray:
    """n x q standard normals from the directional lane."""
    gen = rng.generator(_LANE_DIRECTIONAL)
    return gen.standard_normal((n, q))


def sample_gaussian(spec: EllipticalSpec, n: int, rng: RngStream) -> np.ndarray:
    """Draw n i.i.d. rows μ + A g with g standard normal in q dimensions.

    Parameters
    ----------
    spec : EllipticalSpec
        Must have family "gaussian".
    n : int
        Number of rows, >= 1.
    rng : RngStream
        Stream value; the call is pure.

    Returns
    -------
    np.ndarray
        n x d sample matrix.
    """
    if spec.family != "gaussian":
        raise ValueError("sample_gaussian requires a gaussian spec")
    if n < 1:
        raise ValueError("n must be >= 1")
    g = _directional_normals(n, spec.rank, rng)
    return spec.mu + g @ spec.scatter_factor.T


def sample_student_t(spec: EllipticalSpec, n: int, rng: RngStream) -> np.ndarray:
    """Draw n i.i.d. rows of a multivariate t_ν(μ, Σ) with Σ = A A^T.

    Generated as μ + A g sqrt(ν/w) with g standard normal and w chi-squared
    with ν degrees of freedom, independent. Exact for every ν > 0; ν = 1 is
    the multivariate Cauchy. Directional draws come from the same lane as
    :func:`sample_gaussian`, radial draws from a separate lane.
    """
    if spec.family != "student_t":
        raise ValueError("sample_student_t requires a student_t spec")
    if n < 1:
        raise ValueError("n must be >= 1")
    nu = float(spec.nu)  # validated > 0 at spec construction
    g = _directional_normals(n, spec.rank, rng)
    w = rng.generator(_LANE_RADIAL).chisquare(nu, size=n)
    scale = np.sqrt(nu / w)[:, None]
    return spec.mu + (g * scale) @ spec.scatter_factor.T


def sample_elliptical_generic(mu, A, xi_sampler, n: int, rng: RngStream) -> np.ndarray:
    """Draw n rows μ + ξ A u with u uniform on the q-sphere.

    Parameters
    ----------
    mu : array_like
        Location d-vector.
    A : array_like
        d x q scatter factor.
    xi_sampler : callable
        Called as ``xi_sampler(gen, n)`` with a numpy Generator from the
        radial lane; must return n positive scalars.
    n : int
        Number of rows.
    rng : RngStream
        Stream value.
    """
    mu = np.asarray(mu, dtype=np.float64)
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[1] < 1:
        raise ValueError("A must be d x q with q >= 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    g = _directional_normals(n, A.shape[1], rng)
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    # P(g = 0) is zero; guard anyway so a pathological draw fails loudly.
    if np.any(norms == 0.0):
        raise ValueError("degenerate directional draw")
    u = g / norms
    xi = np.asarray(xi_sampler(rng.generator(_LANE_RADIAL), n), dtype=np.float64)
    if xi.shape != (n,):
        raise ValueError("xi_sampler must return n scalars")
    if np.any(xi <= 0.0):
        raise ValueError("xi_sampler must yield positive values")
    return mu + (u * xi[:, None]) @ A.T
