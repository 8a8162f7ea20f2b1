"""Row/column index selection: random samplers and maximal-volume heuristics.

All samplers are driven by a counter-based Philox generator keyed on a
64-bit seed, so identical (seed, parameters) pairs reproduce identical
index sets bit-for-bit, and parallel callers can derive disjoint streams
with :func:`spawn_rng`.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterator

import numpy as np

from .linalg import RANK_TOL, as_matrix, numerical_rank

__all__ = [
    "IndexSet",
    "RngSeed",
    "derive_seed",
    "spawn_rng",
    "uniform_sample",
    "length_sample",
    "leverage_scores",
    "leverage_sample",
    "maxvol_select",
    "subset_volume",
    "exhaustive_maxvol",
    "certify_maxvol",
    "t_factor",
    "t_factor_frobenius",
]

# 64-bit unsigned seed for all samplers.
RngSeed = int

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class IndexSet:
    """An ordered list of 0-based indices into an axis of length ``dim``.

    Duplicates are legal (with-replacement samplers produce them);
    deterministic selectors such as maxvol always return distinct indices.
    """

    indices: tuple[int, ...]
    dim: int

    def __post_init__(self):
        if len(self.indices) < 1:
            raise ValueError("index set must contain at least one index")
        for i in self.indices:
            if not 0 <= i < self.dim:
                raise IndexError(f"index {i} out of range [0, {self.dim})")
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices)

    def one_based(self) -> tuple[int, ...]:
        return tuple(i + 1 for i in self.indices)

    @classmethod
    def from_one_based(cls, indices, dim: int) -> "IndexSet":
        return cls(tuple(int(i) - 1 for i in indices), dim)

    def distinct(self) -> bool:
        return len(set(self.indices)) == len(self.indices)


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_seed(seed: RngSeed, *subids: int) -> int:
    """Mix integer subids into a seed, giving a decorrelated 64-bit subseed.

    Used to hand every trial of an experiment its own deterministic stream.
    """
    mix = int(seed) & _MASK64
    for part in subids:
        mix = _splitmix64(mix ^ (int(part) & _MASK64))
    return mix


def spawn_rng(seed: RngSeed, *subids: int) -> np.random.Generator:
    """Philox generator for ``seed``, optionally forked by integer subids.

    Distinct subid tuples yield statistically independent streams while
    staying fully deterministic in (seed, subids).
    """
    key = int(seed) & _MASK64
    if subids:
        key |= derive_seed(seed, *subids) << 64
    return np.random.Generator(np.random.Philox(key=key))


def _as_indices(idx) -> np.ndarray:
    """Accept an IndexSet or any integer sequence; return an int array."""
    if isinstance(idx, IndexSet):
        return np.asarray(idx.indices, dtype=int)
    return np.asarray(list(idx), dtype=int)


def uniform_sample(n: int, count: int, seed: RngSeed) -> IndexSet:
    """``count`` indices drawn i.i.d. uniformly from ``[0, n)`` with replacement."""
    if n < 1:
        raise ValueError(f"axis length must be >= 1, got {n}")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    rng = spawn_rng(seed)
    return IndexSet(tuple(rng.integers(0, n, size=count).tolist()), n)


def _axis_weights(a: np.ndarray, axis: str) -> np.ndarray:
    if axis == "cols":
        return np.sum(a * a, axis=0)
    if axis == "rows":
        return np.sum(a * a, axis=1)
    raise ValueError(f"axis must be 'rows' or 'cols', got {axis!r}")


def length_sample(a, count: int, axis: str, seed: RngSeed) -> IndexSet:
    """Sample with replacement, index i drawn proportionally to the squared
    row/column length ``||a_i||^2 / ||a||_F^2``."""
    m = as_matrix(a)
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    w = _axis_weights(m, axis)
    total = w.sum()
    if total == 0.0:
        raise ValueError("length sampling is undefined for a zero matrix")
    rng = spawn_rng(seed)
    idx = rng.choice(w.size, size=count, replace=True, p=w / total)
    return IndexSet(tuple(idx.tolist()), w.size)


def leverage_scores(a, k: int, axis: str = "cols") -> np.ndarray:
    """Rank-``k`` leverage scores: squared row norms of the top-k singular
    vectors divided by k, so the scores form a probability vector."""
    from .linalg import truncated_svd

    m = as_matrix(a)
    rank = numerical_rank(m, RANK_TOL)
    if not 1 <= k <= rank:
        raise ValueError(f"k must be in [1, rank={rank}], got {k}")
    f = truncated_svd(m, k)
    if axis == "cols":
        basis = f.V
    elif axis == "rows":
        basis = f.W
    else:
        raise ValueError(f"axis must be 'rows' or 'cols', got {axis!r}")
    return np.sum(basis * basis, axis=1) / k


def leverage_sample(a, count: int, k: int, axis: str, seed: RngSeed) -> IndexSet:
    """Sample with replacement from the rank-``k`` leverage-score distribution."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    scores = leverage_scores(a, k, axis)
    rng = spawn_rng(seed)
    idx = rng.choice(scores.size, size=count, replace=True, p=scores / scores.sum())
    return IndexSet(tuple(idx.tolist()), scores.size)


# Relative tolerance for volume-gain comparisons in the greedy selector;
# gains this close count as ties and the lowest index wins.
_MAXVOL_TIE_TOL = 1e-12


def maxvol_select(q, count: int) -> IndexSet:
    """Greedy large-volume row selection from an m-by-k matrix ``q``.

    Seeds with the k pivot rows of partially pivoted Gaussian elimination,
    then repeatedly appends the row giving the largest volume gain for the
    selected submatrix, until ``count`` distinct rows are chosen.  ``q`` is
    expected to have orthonormal (at least full-rank) columns.
    """
    Q = as_matrix(q)
    m, k = Q.shape
    if not k <= count <= m:
        raise ValueError(f"count must be in [{k}, {m}], got {count}")
    if numerical_rank(Q, RANK_TOL) < k:
        raise ValueError("column rank of q is below k; no nonzero-volume subset exists")

    # Pivoted-elimination seed: k rows of a nonsingular k-by-k submatrix.
    B = Q.copy()
    avail = np.ones(m, dtype=bool)
    selected: list[int] = []
    for j in range(k):
        col = np.where(avail, np.abs(B[:, j]), -1.0)
        i = int(np.argmax(col))
        selected.append(i)
        avail[i] = False
        rest = avail.copy()
        f = B[rest, j] / B[i, j]
        B[rest, j:] -= np.outer(f, B[i, j:])

    # Greedy additions: adding row x multiplies the squared volume by
    # 1 + x^T G^{-1} x with G the Gram matrix of the selection.
    gram = Q[selected].T @ Q[selected]
    while len(selected) < count:
        gains = np.einsum("ij,jk,ik->i", Q, np.linalg.inv(gram), Q)
        gains = np.maximum(gains, 0.0)
        gains[selected] = -1.0
        best = gains.max()
        # ties within relative tolerance resolve to the lowest index
        i = int(np.argmax(gains >= best * (1.0 - _MAXVOL_TIE_TOL)))
        selected.append(i)
        gram += np.outer(Q[i], Q[i])

    return IndexSet(tuple(sorted(selected)), m)


def subset_volume(q, rows) -> float:
    """Volume of the row subset ``q[rows, :]`` (product of singular values)."""
    Q = as_matrix(q)
    B = Q[_as_indices(rows)]
    g = np.linalg.det(B.T @ B)
    return float(np.sqrt(max(g, 0.0)))


def exhaustive_maxvol(q, size: int) -> tuple[tuple[int, ...], float]:
    """True maximal-volume row subset of the given size, by enumeration.

    Only feasible at desk scale; cost grows like C(m, size).
    """
    Q = as_matrix(q)
    m, k = Q.shape
    if not k <= size <= m:
        raise ValueError(f"size must be in [{k}, {m}], got {size}")
    best_vol = -1.0
    best: tuple[int, ...] = ()
    for subset in combinations(range(m), size):
        g = np.linalg.det(Q[list(subset)].T @ Q[list(subset)])
        vol = np.sqrt(max(g, 0.0))
        if vol > best_vol:
            best_vol = vol
            best = subset
    return best, float(best_vol)


def certify_maxvol(q, rows, rel_tol: float = 1e-9) -> bool:
    """Check by enumeration that ``rows`` attains the maximal volume among
    all equally sized row subsets (ties within ``rel_tol`` count)."""
    idx = _as_indices(rows)
    _, best_vol = exhaustive_maxvol(q, idx.size)
    return subset_volume(q, idx) >= best_vol * (1.0 - rel_tol)


def t_factor(k: int, m: int, size_i: int) -> float:
    """Spectral-norm growth factor ``sqrt(1 + k (m - |I|) / (|I| - k + 1))``
    bounding the pseudoinverse of a maximal-volume row subset."""
    if not 1 <= k <= size_i <= m:
        raise ValueError(f"need 1 <= k <= |I| <= m, got k={k}, |I|={size_i}, m={m}")
    return float(np.sqrt(1.0 + k * (m - size_i) / (size_i - k + 1.0)))


def t_factor_frobenius(k: int, m: int, size_i: int) -> float:
    """Frobenius variant ``sqrt(k + k (m - |I|) / (|I| - k + 1))``."""
    if not 1 <= k <= size_i <= m:
        raise ValueError(f"need 1 <= k <= |I| <= m, got k={k}, |I|={size_i}, m={m}")
    return float(np.sqrt(k + k * (m - size_i) / (size_i - k + 1.0)))
