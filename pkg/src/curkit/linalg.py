"""Dense linear-algebra kernel: SVD, pseudoinverse, Schatten norms, volume.

Every matrix entering this module is validated to be a finite, real,
2-dimensional array.  All functions are pure and return fresh arrays, so
results can be shared freely between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SvdFactors",
    "as_matrix",
    "svd",
    "singular_values",
    "truncated_svd",
    "threshold_svd",
    "rank_truncate",
    "pinv",
    "pinv_thresholded",
    "pinv_truncated",
    "schatten_norm",
    "volume",
    "submatrix",
    "numerical_rank",
]

# Relative cutoff below which a singular value counts as zero for
# pseudoinversion.  sigma_i <= PINV_RANK_TOL * sigma_1 is treated as 0.
PINV_RANK_TOL = 1e-12

# Relative cutoff used when an integer rank has to be read off a spectrum.
RANK_TOL = 1e-10


def as_matrix(a) -> np.ndarray:
    """Validate and convert input to a finite float64 matrix.

    Accepts anything ``np.asarray`` understands.  Rejects empty arrays,
    wrong dimensionality, and non-finite entries (NaN/Inf).
    """
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got ndim={m.ndim}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"matrix must be non-empty, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError("matrix contains NaN or Inf entries")
    return m


def _check_indices(idx, n: int, what: str) -> np.ndarray:
    ix = np.asarray(list(idx), dtype=int)
    if ix.ndim != 1 or ix.size < 1:
        raise ValueError(f"{what} index list must be a non-empty 1-d sequence")
    if ix.min() < 0 or ix.max() >= n:
        raise IndexError(f"{what} index out of range [0, {n})")
    return ix


@dataclass(frozen=True)
class SvdFactors:
    """Singular value decomposition ``W @ diag(sigma) @ V.T``.

    ``W`` is m-by-r and ``V`` is n-by-r, both with orthonormal columns;
    ``sigma`` holds r non-negative values in non-increasing order.
    """

    W: np.ndarray
    sigma: np.ndarray
    V: np.ndarray

    @property
    def r(self) -> int:
        return self.sigma.size

    def compose(self) -> np.ndarray:
        """Multiply the factors back into a dense matrix."""
        return (self.W * self.sigma) @ self.V.T


def svd(a) -> SvdFactors:
    """Full (economy) SVD with a deterministic sign convention.

    The first nonzero entry of every right singular vector is made
    non-negative, with the matching left vector flipped alongside, so
    repeated runs and platform BLAS variations compare equal.
    """
    m = as_matrix(a)
    w, s, vt = np.linalg.svd(m, full_matrices=False)
    v = vt.T.copy()
    w = w.copy()
    for j in range(s.size):
        col = v[:, j]
        nz = np.flatnonzero(col)
        if nz.size and col[nz[0]] < 0.0:
            v[:, j] = -col
            w[:, j] = -w[:, j]
    return SvdFactors(W=w, sigma=s, V=v)


def singular_values(a) -> np.ndarray:
    """Singular values in non-increasing order."""
    return np.linalg.svd(as_matrix(a), compute_uv=False)


def truncated_svd(a, k: int) -> SvdFactors:
    """Top-``k`` singular triplets; composing them gives the best rank-k
    approximation in every unitarily invariant norm."""
    f = svd(a)
    if not 1 <= k <= f.r:
        raise ValueError(f"k must be in [1, {f.r}], got {k}")
    return SvdFactors(W=f.W[:, :k], sigma=f.sigma[:k], V=f.V[:, :k])


def rank_truncate(a, k: int) -> np.ndarray:
    """Best rank-``k`` approximation of ``a`` as a dense matrix."""
    return truncated_svd(a, k).compose()


def threshold_svd(a, tau: float) -> np.ndarray:
    """Zero out all singular values below ``tau`` (values >= tau survive).

    ``tau = 0`` reproduces the input up to SVD round-off.
    """
    if tau < 0:
        raise ValueError(f"threshold must be non-negative, got {tau}")
    f = svd(a)
    kept = np.where(f.sigma >= tau, f.sigma, 0.0)
    return (f.W * kept) @ f.V.T


def _pinv_from_factors(f: SvdFactors, keep: np.ndarray) -> np.ndarray:
    inv = np.zeros_like(f.sigma)
    inv[keep] = 1.0 / f.sigma[keep]
    return (f.V * inv) @ f.W.T


def pinv(a, rank_tol: float = PINV_RANK_TOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse.

    Singular values at or below ``rank_tol * sigma_1`` are treated as
    exact zeros; the default keeps anything more than 1e-12 above the
    leading singular value's scale.
    """
    if rank_tol < 0:
        raise ValueError(f"rank_tol must be non-negative, got {rank_tol}")
    f = svd(a)
    cutoff = rank_tol * (f.sigma[0] if f.sigma.size else 0.0)
    return _pinv_from_factors(f, f.sigma > cutoff)


def pinv_thresholded(a, tau: float, rank_tol: float = PINV_RANK_TOL) -> np.ndarray:
    """Pseudoinverse of the thresholded matrix, ``pinv(threshold_svd(a, tau))``,
    computed from a single SVD so it agrees bit-for-bit with ``pinv`` at tau=0."""
    if tau < 0:
        raise ValueError(f"threshold must be non-negative, got {tau}")
    f = svd(a)
    cutoff = rank_tol * (f.sigma[0] if f.sigma.size else 0.0)
    return _pinv_from_factors(f, (f.sigma >= tau) & (f.sigma > cutoff))


def pinv_truncated(a, k: int, rank_tol: float = PINV_RANK_TOL) -> np.ndarray:
    """Pseudoinverse of the best rank-``k`` approximation of ``a``."""
    f = svd(a)
    if not 1 <= k <= f.r:
        raise ValueError(f"k must be in [1, {f.r}], got {k}")
    cutoff = rank_tol * (f.sigma[0] if f.sigma.size else 0.0)
    keep = f.sigma > cutoff
    keep[k:] = False
    return _pinv_from_factors(f, keep)


def schatten_norm(a, p: float) -> float:
    """Schatten p-norm: the l_p norm of the singular-value vector.

    p=1 is the nuclear norm, p=2 the Frobenius norm, p=inf the spectral
    norm.  Any real p >= 1 is accepted.
    """
    if not p >= 1:
        raise ValueError(f"Schatten index must satisfy p >= 1, got {p}")
    s = singular_values(a)
    if math.isinf(p):
        return float(s[0])
    return float(np.linalg.norm(s, ord=p))


def volume(b) -> float:
    """Product of all min(m, n) singular values; zero for rank-deficient input."""
    return float(np.prod(singular_values(b)))


def submatrix(a, rows=None, cols=None) -> np.ndarray:
    """Select ``a[rows, cols]`` with repetition allowed (0-based indices).

    ``rows=None`` or ``cols=None`` keeps the full axis.
    """
    m = as_matrix(a)
    ri = np.arange(m.shape[0]) if rows is None else _check_indices(rows, m.shape[0], "row")
    ci = np.arange(m.shape[1]) if cols is None else _check_indices(cols, m.shape[1], "column")
    return m[np.ix_(ri, ci)]


def numerical_rank(a, tol: float = RANK_TOL) -> int:
    """Number of singular values exceeding ``tol * sigma_1``."""
    if tol < 0:
        raise ValueError(f"tol must be non-negative, got {tol}")
    s = singular_values(a)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))
