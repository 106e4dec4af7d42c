"""Deformed-Wigner instances and their spectral ground truth.

The hard inputs studied here are rank-one deformations of a Gaussian
orthogonal ensemble matrix,

    M = lam * theta theta^T + W / sqrt(d),

with theta uniform on the unit sphere and W symmetric Gaussian noise
(off-diagonal variance 1, diagonal variance 2).  This module samples such
instances, exposes a full-eigendecomposition oracle for ground truth, and
checks membership in the bounded-eigenratio class (top eigenvalue positive
and dominant, every other eigenvalue at most gamma times it in magnitude).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Union

import numpy as np
from scipy.sparse.linalg import eigsh

Seed = Union[None, int, np.integer, np.random.Generator, np.random.SeedSequence]

#: Largest dimension the dense eigendecomposition oracle accepts by default.
SPECTRUM_DIM_CAP = 8192

#: Conservative value of E||W||/sqrt(d) for GOE noise, used by threshold
#: formulas that need a concrete constant.  The empirical estimate at
#: laboratory sizes sits a little below this (about 1.97 at d = 500).
KD_ASYMPTOTIC = 2.0


def as_rng(seed: Seed) -> np.random.Generator:
    """Coerce a seed, SeedSequence, or Generator into a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def trial_seed(seed: int, trial: int) -> int:
    """Per-trial stream seed: base seed XOR trial index (64-bit)."""
    return (int(seed) ^ int(trial)) & 0xFFFFFFFFFFFFFFFF


def _require_symmetric(M: np.ndarray, name: str = "M") -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    if not np.array_equal(M, M.T):
        raise ValueError(f"{name} must be exactly symmetric")
    return M


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    a.setflags(write=False)
    return a


def sample_goe(d: int, seed: Seed = None) -> np.ndarray:
    """Draw a d x d GOE matrix: N(0,1) above the diagonal, N(0,2) on it.

    Built as (X + X^T)/sqrt(2) for X with i.i.d. standard normal entries,
    which is exactly symmetric in floating point and has the stated
    entrywise variances.
    """
    if d < 1:
        raise ValueError(f"dimension must be positive, got {d}")
    rng = as_rng(seed)
    x = rng.standard_normal((d, d))
    return (x + x.T) / np.sqrt(2.0)


def sample_uniform_sphere(d: int, seed: Seed = None) -> np.ndarray:
    """Draw a uniform unit vector in R^d (normalized standard Gaussian)."""
    if d < 1:
        raise ValueError(f"dimension must be positive, got {d}")
    rng = as_rng(seed)
    while True:
        v = rng.standard_normal(d)
        norm = np.linalg.norm(v)
        if norm > 0:
            return v / norm


@dataclass(frozen=True)
class SpikedInstance:
    """A planted-spike matrix M = lam * theta theta^T + noise / sqrt(d)."""

    theta: np.ndarray
    lam: float
    noise: np.ndarray
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        theta = _frozen(self.theta)
        noise = _frozen(_require_symmetric(self.noise, "noise"))
        matrix = _frozen(_require_symmetric(self.matrix, "matrix"))
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "noise", noise)
        object.__setattr__(self, "matrix", matrix)
        if self.lam < 0 or not np.isfinite(self.lam):
            raise ValueError(f"spike strength must be finite and >= 0, got {self.lam}")
        if abs(np.linalg.norm(theta) - 1.0) > 1e-12:
            raise ValueError("theta must be a unit vector (tol 1e-12)")
        d = theta.shape[0]
        expected = self.lam * np.outer(theta, theta) + noise / np.sqrt(d)
        if np.max(np.abs(matrix - expected)) > 1e-10:
            raise ValueError("matrix does not equal lam*theta theta^T + noise/sqrt(d)")

    @property
    def dim(self) -> int:
        return self.theta.shape[0]


def make_spiked(d: int, lam: float, seed: Seed = None) -> SpikedInstance:
    """Sample theta uniform on the sphere, W from the GOE, and assemble M."""
    if d < 1:
        raise ValueError(f"dimension must be positive, got {d}")
    if lam < 0 or not np.isfinite(lam):
        raise ValueError(f"spike strength must be finite and >= 0, got {lam}")
    rng = as_rng(seed)
    theta = sample_uniform_sphere(d, rng)
    noise = sample_goe(d, rng)
    matrix = lam * np.outer(theta, theta) + noise / np.sqrt(d)
    matrix = (matrix + matrix.T) / 2.0
    return SpikedInstance(theta=theta, lam=float(lam), noise=noise, matrix=matrix)


@dataclass(frozen=True)
class SpectrumSummary:
    """Full eigendecomposition digest of a symmetric matrix.

    eigenvalues are sorted descending; eigenratio is max_{j>=2} |lam_j|/lam_1,
    defined only when lam_1 > 0 (None otherwise).
    """

    eigenvalues: np.ndarray
    top_vector: np.ndarray
    op_norm: float
    eigenratio: Optional[float]


def spectrum(M: np.ndarray, dim_cap: int = SPECTRUM_DIM_CAP) -> SpectrumSummary:
    """Dense symmetric eigendecomposition, capped at desk scale."""
    M = _require_symmetric(M)
    d = M.shape[0]
    if d > dim_cap:
        raise ValueError(f"spectrum oracle capped at d <= {dim_cap}, got {d}")
    vals, vecs = np.linalg.eigh(M)
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    top = vecs[:, order[0]]
    op_norm = float(max(abs(vals[0]), abs(vals[-1])))
    if vals[0] > 0 and d > 1:
        ratio = float(np.max(np.abs(vals[1:])) / vals[0])
    elif vals[0] > 0:
        ratio = 0.0
    else:
        ratio = None
    return SpectrumSummary(
        eigenvalues=_frozen(vals),
        top_vector=_frozen(top),
        op_norm=op_norm,
        eigenratio=ratio,
    )


def spectral_norm(M: np.ndarray) -> float:
    """Operator norm of a symmetric matrix.

    Uses the dense solver at small d and an iterative extreme-eigenvalue
    solve (deterministic start vector) at large d; the two agree to
    machine precision on symmetric input.
    """
    M = _require_symmetric(M)
    d = M.shape[0]
    if d <= 1024:
        vals = np.linalg.eigvalsh(M)
        return float(max(abs(vals[0]), abs(vals[-1])))
    v0 = np.full(d, 1.0 / np.sqrt(d))
    hi = eigsh(M, k=1, which="LA", v0=v0, tol=0)[0][0]
    lo = eigsh(M, k=1, which="SA", v0=v0, tol=0)[0][0]
    return float(max(abs(hi), abs(lo)))


class Membership(NamedTuple):
    """Result of the eigenratio-class test, with a violating index if any.

    witness is a 1-based eigenvalue index: 1 means the top eigenvalue itself
    fails (not positive, or not the largest in magnitude); j >= 2 points at
    the first eigenvalue with |lam_j| > gamma * lam_1.
    """

    is_member: bool
    witness: Optional[int]


def check_membership(M: np.ndarray, gamma: float) -> Membership:
    """Test lam_1(M) = ||M|| > 0 and |lam_j| <= gamma * lam_1 for all j >= 2."""
    if not (0 <= gamma < 1):
        raise ValueError(f"gamma must lie in [0, 1), got {gamma}")
    summary = spectrum(M)
    vals = summary.eigenvalues
    lam1 = vals[0]
    if lam1 <= 0 or abs(vals[-1]) > lam1:
        return Membership(False, 1)
    rest = np.abs(vals[1:])
    # a few ulps of slack so gamma = eigenratio(M) itself always passes
    bad = np.nonzero(rest > gamma * lam1 * (1.0 + 4 * np.finfo(float).eps))[0]
    if bad.size:
        return Membership(False, int(bad[0]) + 2)
    return Membership(True, None)


def rayleigh(M: np.ndarray, v: np.ndarray) -> float:
    """Rayleigh quotient v^T M v for a unit vector v (tol 1e-8)."""
    M = _require_symmetric(M)
    v = np.asarray(v, dtype=float)
    if abs(np.linalg.norm(v) - 1.0) > 1e-8:
        raise ValueError("rayleigh requires a unit vector (tol 1e-8)")
    return float(v @ M @ v)
