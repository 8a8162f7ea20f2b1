"""CUR/skeleton approximations: factor extraction, the six product variants,
and verifiers for the exact-decomposition identities.

A CUR approximation of ``A`` keeps actual columns ``C = A[:, J]``, rows
``R = A[I, :]`` and their intersection ``U = A[I, J]`` and recombines them,
classically as ``C U^+ R``.  When ``rank(U) == rank(A)`` the recombination
is exact; the verifiers below check that equivalence and its consequences
with explicit residuals.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .linalg import RANK_TOL, as_matrix, pinv, schatten_norm, submatrix
from .sampling import _as_indices

__all__ = [
    "CurFactors",
    "CurVariant",
    "extract_cur",
    "approximate",
    "EquivalenceReport",
    "verify_exact_cur",
    "IdentityReport",
    "check_identities",
]


@dataclass(frozen=True)
class CurFactors:
    """Row/column skeleton of a matrix: ``C = A[:, J]``, ``U = A[I, J]``,
    ``R = A[I, :]`` for 0-based index lists ``I`` and ``J``."""

    I: tuple[int, ...]
    J: tuple[int, ...]
    C: np.ndarray
    U: np.ndarray
    R: np.ndarray


@dataclass(frozen=True)
class CurVariant:
    """How the skeleton factors are recombined.

    kind:
        ``plain``            -> C U^+ R
        ``thresholded``      -> C [U]_tau^+ R           (needs ``tau``)
        ``rank_u``           -> C (U_k)^+ R             (needs ``rank``)
        ``projection``       -> C C^+ A R^+ R
        ``projection_rank``  -> C_k C_k^+ A R_k^+ R_k   (needs ``rank``)
        ``post_truncated``   -> (C U^+ R)_k             (needs ``rank``)
    """

    kind: str
    rank: int | None = None
    tau: float | None = None

    _KINDS = (
        "plain",
        "thresholded",
        "rank_u",
        "projection",
        "projection_rank",
        "post_truncated",
    )

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown variant {self.kind!r}; expected one of {self._KINDS}")
        if self.kind == "thresholded":
            if self.tau is None or self.tau < 0:
                raise ValueError("thresholded variant needs tau >= 0")
        elif self.kind in ("rank_u", "projection_rank", "post_truncated"):
            if self.rank is None or self.rank < 1:
                raise ValueError(f"{self.kind} variant needs rank >= 1")

    @classmethod
    def plain(cls):
        return cls("plain")

    @classmethod
    def thresholded(cls, tau: float):
        return cls("thresholded", tau=tau)

    @classmethod
    def rank_u(cls, k: int):
        return cls("rank_u", rank=k)

    @classmethod
    def projection(cls):
        return cls("projection")

    @classmethod
    def projection_rank(cls, k: int):
        return cls("projection_rank", rank=k)

    @classmethod
    def post_truncated(cls, k: int):
        return cls("post_truncated", rank=k)


def extract_cur(a, rows, cols) -> CurFactors:
    """Slice the C, U, R factors of ``a`` for the given index lists."""
    m = as_matrix(a)
    ri = _as_indices(rows)
    ci = _as_indices(cols)
    return CurFactors(
        I=tuple(ri.tolist()),
        J=tuple(ci.tolist()),
        C=submatrix(m, None, ci),
        U=submatrix(m, ri, ci),
        R=submatrix(m, ri, None),
    )


def approximate(f: CurFactors, variant: CurVariant, a=None) -> np.ndarray:
    """Evaluate one CUR recombination of the factors ``f``.

    ``a`` is the matrix the projection variants act on (the matrix the
    factors were extracted from); the non-projection variants ignore it.
    """
    kind = variant.kind
    if kind in ("projection", "projection_rank"):
        if a is None:
            raise ValueError(f"variant {kind!r} needs the source matrix")
        a = as_matrix(a)

    if kind in ("rank_u", "projection_rank", "post_truncated"):
        if variant.rank > min(len(f.I), len(f.J)):
            raise ValueError(
                f"rank {variant.rank} exceeds the selected {len(f.I)}x{len(f.J)} block"
            )

    if kind == "plain":
        return f.C @ linalg.pinv_thresholded(f.U, 0.0) @ f.R
    if kind == "thresholded":
        return f.C @ linalg.pinv_thresholded(f.U, variant.tau) @ f.R
    if kind == "rank_u":
        return f.C @ linalg.pinv_truncated(f.U, variant.rank) @ f.R
    if kind == "projection":
        return f.C @ pinv(f.C) @ a @ pinv(f.R) @ f.R
    if kind == "projection_rank":
        ck = linalg.rank_truncate(f.C, variant.rank)
        rk = linalg.rank_truncate(f.R, variant.rank)
        return ck @ pinv(ck) @ a @ pinv(rk) @ rk
    # post_truncated
    return linalg.rank_truncate(f.C @ linalg.pinv_thresholded(f.U, 0.0) @ f.R, variant.rank)


def _rel(residual: float, scale: float) -> float:
    return residual / max(scale, np.finfo(float).tiny)


@dataclass
class EquivalenceReport:
    """Outcome of the five-way exact-decomposition equivalence check.

    ``conditions`` maps condition names to booleans; ``residuals`` carries
    the relative residual behind each matrix-equality condition.  All five
    conditions must agree for a numerically consistent instance.
    """

    rank_a: int
    rank_u: int
    rank_c: int
    rank_r: int
    tol: float
    conditions: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)

    @property
    def consistent(self) -> bool:
        vals = list(self.conditions.values())
        return all(vals) or not any(vals)

    @property
    def exact(self) -> bool:
        return all(self.conditions.values())

    def to_dict(self) -> dict:
        return {
            "ranks": {"a": self.rank_a, "c": self.rank_c, "u": self.rank_u, "r": self.rank_r},
            "tol": self.tol,
            "conditions": dict(self.conditions),
            "residuals": dict(self.residuals),
            "consistent": self.consistent,
            "exact": self.exact,
        }


def verify_exact_cur(a, rows, cols, tol: float = 1e-8) -> EquivalenceReport:
    """Check the five equivalent characterizations of an exact CUR
    decomposition, plus the middle-inverse identity ``U^+ = C^+ A R^+``.

    Rank equalities use :func:`curkit.linalg.numerical_rank` and matrix
    equalities use relative Frobenius residuals against ``tol``.
    """
    m = as_matrix(a)
    f = extract_cur(m, rows, cols)
    a_pinv = pinv(m)
    u_pinv = pinv(f.U)

    rank_a = linalg.numerical_rank(m, RANK_TOL)
    rank_u = linalg.numerical_rank(f.U, RANK_TOL)
    rank_c = linalg.numerical_rank(f.C, RANK_TOL)
    rank_r = linalg.numerical_rank(f.R, RANK_TOL)

    norm_a = np.linalg.norm(m)
    res_cur = _rel(np.linalg.norm(m - f.C @ u_pinv @ f.R), norm_a)
    res_proj = _rel(
        np.linalg.norm(m - f.C @ pinv(f.C) @ m @ pinv(f.R) @ f.R), norm_a
    )
    res_pinv = _rel(
        np.linalg.norm(a_pinv - pinv(f.R) @ f.U @ pinv(f.C)), np.linalg.norm(a_pinv)
    )
    res_mid = _rel(
        np.linalg.norm(u_pinv - pinv(f.C) @ m @ pinv(f.R)), np.linalg.norm(u_pinv)
    )

    rep = EquivalenceReport(rank_a=rank_a, rank_u=rank_u, rank_c=rank_c, rank_r=rank_r, tol=tol)
    rep.conditions = {
        "rank_u_equals_rank_a": rank_u == rank_a,
        "cur_reconstructs": res_cur <= tol,
        "projection_reconstructs": res_proj <= tol,
        "pinv_factorizes": res_pinv <= tol,
        "ranks_c_r_equal_a": rank_c == rank_a and rank_r == rank_a,
    }
    rep.residuals = {
        "cur_reconstructs": res_cur,
        "projection_reconstructs": res_proj,
        "pinv_factorizes": res_pinv,
        "middle_inverse": res_mid,
    }
    return rep


@dataclass
class IdentityReport:
    """Relative residuals of the projection/middle-matrix identities that
    hold for exact CUR decompositions, plus the norm equalities tying
    ``C U^+`` and ``U^+ R`` to singular-vector submatrices."""

    precondition_ok: bool
    rank_a: int
    rank_u: int
    residuals: dict = field(default_factory=dict)
    norm_equalities: dict = field(default_factory=dict)

    def max_residual(self) -> float:
        vals = list(self.residuals.values()) + list(self.norm_equalities.values())
        return max(vals)

    def to_dict(self) -> dict:
        return {
            "precondition_ok": self.precondition_ok,
            "rank_a": self.rank_a,
            "rank_u": self.rank_u,
            "residuals": dict(self.residuals),
            "norm_equalities": dict(self.norm_equalities),
        }


def check_identities(a, rows, cols, tol: float = 1e-8) -> IdentityReport:
    """Measure the exact-CUR identities on one instance.

    ``U = R A^+ C`` is checked unconditionally; the projection identities,
    ``U^+ = C^+ A R^+``, and the norm equalities require
    ``rank(U) == rank(A)`` and are still reported (with
    ``precondition_ok=False``) when that fails.
    """
    m = as_matrix(a)
    f = extract_cur(m, rows, cols)
    a_pinv = pinv(m)
    u_pinv = pinv(f.U)
    c_pinv = pinv(f.C)
    r_pinv = pinv(f.R)

    rank_a = linalg.numerical_rank(m, RANK_TOL)
    rank_u = linalg.numerical_rank(f.U, RANK_TOL)

    residuals = {
        "u_equals_r_apinv_c": _rel(
            np.linalg.norm(f.U - f.R @ a_pinv @ f.C), np.linalg.norm(f.U)
        ),
        "cpinv_c_equals_upinv_u": _rel(
            np.linalg.norm(c_pinv @ f.C - u_pinv @ f.U), max(1.0, np.linalg.norm(c_pinv @ f.C))
        ),
        "r_rpinv_equals_u_upinv": _rel(
            np.linalg.norm(f.R @ r_pinv - f.U @ u_pinv), max(1.0, np.linalg.norm(f.R @ r_pinv))
        ),
        "a_apinv_equals_c_cpinv": _rel(
            np.linalg.norm(m @ a_pinv - f.C @ c_pinv), max(1.0, np.linalg.norm(m @ a_pinv))
        ),
        "apinv_a_equals_rpinv_r": _rel(
            np.linalg.norm(a_pinv @ m - r_pinv @ f.R), max(1.0, np.linalg.norm(a_pinv @ m))
        ),
        "upinv_equals_cpinv_a_rpinv": _rel(
            np.linalg.norm(u_pinv - c_pinv @ m @ r_pinv), np.linalg.norm(u_pinv)
        ),
    }

    # Norm equalities ||C U^+|| = ||W_k(I,:)^+|| and ||U^+ R|| = ||V_k(J,:)^+||
    # (the same values also equal ||A R^+|| and ||C^+ A|| respectively),
    # compared in the nuclear, Frobenius and spectral norms.
    norm_eq = {}
    if rank_a >= 1:
        k = rank_a
        fsvd = linalg.truncated_svd(m, k)
        w_sub = fsvd.W[list(f.I), :]
        v_sub = fsvd.V[list(f.J), :]
        cu = f.C @ u_pinv
        ur = u_pinv @ f.R
        ar = m @ r_pinv
        ca = c_pinv @ m
        for p in (1.0, 2.0, np.inf):
            w_norm = schatten_norm(pinv(w_sub), p)
            v_norm = schatten_norm(pinv(v_sub), p)
            tag = {1.0: "p1", 2.0: "p2"}.get(p, "pinf")
            norm_eq[f"cu_pinv_{tag}"] = _rel(abs(schatten_norm(cu, p) - w_norm), max(1.0, w_norm))
            norm_eq[f"a_rpinv_{tag}"] = _rel(abs(schatten_norm(ar, p) - w_norm), max(1.0, w_norm))
            norm_eq[f"upinv_r_{tag}"] = _rel(abs(schatten_norm(ur, p) - v_norm), max(1.0, v_norm))
            norm_eq[f"cpinv_a_{tag}"] = _rel(abs(schatten_norm(ca, p) - v_norm), max(1.0, v_norm))

    return IdentityReport(
        precondition_ok=(rank_u == rank_a),
        rank_a=rank_a,
        rank_u=rank_u,
        residuals=residuals,
        norm_equalities=norm_eq,
    )
