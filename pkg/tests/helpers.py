"""Shared builders for randomized test instances.

Everything is driven by explicit generators so every test is deterministic;
constructions assert their own structural properties (exact rank, forced
rank deficiency) rather than trusting chance.
"""

from __future__ import annotations

import numpy as np

from curkit.bounds import mu_for
from curkit.linalg import schatten_norm

# conditioning floor for accepted random instances: keeps numerical-rank
# decisions at tol 1e-10 unambiguous
_COND_FLOOR = 1e-8


def rank_k_matrix(rng: np.random.Generator, m: int, n: int, k: int) -> np.ndarray:
    """Random m-by-n matrix of exact rank k (Gaussian factor product)."""
    a = rng.standard_normal((m, k)) @ rng.standard_normal((k, n))
    s = np.linalg.svd(a, compute_uv=False)
    assert s[k - 1] > _COND_FLOOR * s[0], "degenerate draw; widen the conditioning floor"
    return a


def _block_rank(a: np.ndarray, idx_i: np.ndarray, idx_j: np.ndarray, k: int) -> bool:
    u = a[np.ix_(idx_i, idx_j)]
    s = np.linalg.svd(u, compute_uv=False)
    return s.size >= k and s[0] > 0 and s[k - 1] > _COND_FLOOR * s[0]


def skeleton_full_rank(rng, m, n, k, i_size, j_size):
    """(A, I, J) with rank(A) = rank(A[I, J]) = k and healthy conditioning."""
    assert k <= i_size <= m and k <= j_size <= n
    a = rank_k_matrix(rng, m, n, k)
    for _ in range(100):
        idx_i = np.sort(rng.choice(m, size=i_size, replace=False))
        idx_j = np.sort(rng.choice(n, size=j_size, replace=False))
        if _block_rank(a, idx_i, idx_j, k):
            return a, idx_i, idx_j
    raise AssertionError("could not find a well-conditioned skeleton in 100 draws")


def skeleton_deficient(rng, m, n, k, i_size, j_size):
    """(A, I, J) with rank(A) = k but rank(A[I, J]) < k.

    The rows of the left factor indexed by I are squeezed into a (k-1)-dim
    subspace, so the intersection block cannot reach rank k while the
    remaining rows keep A itself at full rank k.
    """
    assert k >= 1 and m - i_size >= k, "need enough untouched rows to keep rank(A)=k"
    idx_i = np.sort(rng.choice(m, size=i_size, replace=False))
    idx_j = np.sort(rng.choice(n, size=j_size, replace=False))
    x = rng.standard_normal((m, k))
    if k == 1:
        x[idx_i, :] = 0.0
    else:
        x[idx_i, :] = rng.standard_normal((i_size, k - 1)) @ rng.standard_normal((k - 1, k))
    a = x @ rng.standard_normal((k, n))

    s_a = np.linalg.svd(a, compute_uv=False)
    assert s_a[k - 1] > _COND_FLOOR * s_a[0], "degenerate deficient draw"
    s_u = np.linalg.svd(a[np.ix_(idx_i, idx_j)], compute_uv=False)
    assert s_u.size < k or s_u[0] == 0 or s_u[min(k, s_u.size) - 1] < 1e-10 * max(s_a[0], 1.0)
    return a, idx_i, idx_j


def bound_instance(rng, max_side=120, max_k=10, sigmas=(1e-5, 1e-3, 1e-1)):
    """Random (A, k, I, J, E) satisfying the standing rank assumptions."""
    m = int(rng.integers(15, max_side + 1))
    n = int(rng.integers(15, max_side + 1))
    k = int(rng.integers(1, min(max_k, min(m, n) // 2) + 1))
    i_size = int(rng.integers(k, min(m, 3 * k + 10) + 1))
    j_size = int(rng.integers(k, min(n, 3 * k + 10) + 1))
    a, idx_i, idx_j = skeleton_full_rank(rng, m, n, k, i_size, j_size)
    sigma = float(rng.choice(np.asarray(sigmas)))
    e = rng.normal(0.0, sigma, size=(m, n))
    return a, k, idx_i, idx_j, e


def shrink_noise_until(a, k, idx_i, idx_j, e, predicate, max_halvings=80):
    """Halve the noise until ``predicate(e)`` holds; the predicate must be
    monotone in the noise scale."""
    for _ in range(max_halvings):
        if predicate(e):
            return e
        e = e / 2.0
    raise AssertionError("noise did not shrink into the admissible region")


def noise_small_for_rank_u(a, k, idx_i, idx_j, e, ps=(1.0, 2.0, np.inf)):
    """Shrink noise until the rank-truncation bounds (including the
    linear-in-noise variant) are in force for all requested norms."""
    u = a[np.ix_(idx_i, idx_j)]
    sigma_k = np.linalg.svd(u, compute_uv=False)[k - 1]

    def small(err):
        return all(4.0 * mu_for(p) * schatten_norm(err, p) < sigma_k for p in ps)

    return shrink_noise_until(a, k, idx_i, idx_j, e, small)
