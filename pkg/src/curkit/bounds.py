"""Perturbation bounds for CUR approximations of a noisy low-rank matrix.

Setting: a rank-k matrix ``A`` is observed as ``A + E`` and skeleton factors
are taken from the noisy matrix.  Each ``bound_*`` function evaluates one
upper bound on the reconstruction error in a Schatten p-norm, measures the
actual error alongside, and reports every summand so the intermediate
inequalities can be checked independently.

Constants follow Stewart's pseudoinverse perturbation theory: the factor
``mu`` is sqrt(2) for the Frobenius norm, the golden ratio for the spectral
norm, and 3 for every other unitarily invariant norm considered here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .cur import CurVariant, approximate, extract_cur
from .linalg import RANK_TOL, as_matrix, schatten_norm
from .sampling import _as_indices, certify_maxvol, t_factor

__all__ = [
    "NormSpec",
    "NoiseDecomposition",
    "BoundReport",
    "MaxvolBounds",
    "StewartReport",
    "perturbation_terms",
    "singular_vector_terms",
    "bound_projection",
    "bound_thresholded",
    "bound_plain",
    "bound_rank_u",
    "bound_projection_rank",
    "bound_maxvol",
    "weyl_gap",
    "mirsky_gap",
    "stewart_pinv_check",
]

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0

# Relative slack granted to floating-point comparisons of proven inequalities.
INEQ_SLACK = 1e-8


@dataclass(frozen=True)
class NormSpec:
    """A Schatten index together with its pseudoinverse-perturbation constant."""

    p: float
    mu: float

    def __post_init__(self):
        if not self.p >= 1:
            raise ValueError(f"Schatten index must satisfy p >= 1, got {self.p}")
        if abs(self.mu - mu_for(self.p)) > 1e-15:
            raise ValueError(f"mu={self.mu} does not match p={self.p}")

    @classmethod
    def for_p(cls, p: float) -> "NormSpec":
        return cls(p=float(p), mu=mu_for(p))


def mu_for(p: float) -> float:
    """Perturbation constant for the Schatten p-norm."""
    if not p >= 1:
        raise ValueError(f"Schatten index must satisfy p >= 1, got {p}")
    if p == 2:
        return math.sqrt(2.0)
    if math.isinf(p):
        return GOLDEN_RATIO
    return 3.0


def _normspec(norm) -> NormSpec:
    if isinstance(norm, NormSpec):
        return norm
    return NormSpec.for_p(float(norm))


@dataclass(frozen=True)
class NoiseDecomposition:
    """A noise matrix and its submatrices aligned to index sets (I, J)."""

    E: np.ndarray
    I: tuple[int, ...]
    J: tuple[int, ...]
    E_I: np.ndarray
    E_J: np.ndarray
    E_IJ: np.ndarray

    @classmethod
    def split(cls, e, rows, cols) -> "NoiseDecomposition":
        m = as_matrix(e)
        ri = _as_indices(rows)
        ci = _as_indices(cols)
        return cls(
            E=m,
            I=tuple(ri.tolist()),
            J=tuple(ci.tolist()),
            E_I=linalg.submatrix(m, ri, None),
            E_J=linalg.submatrix(m, None, ci),
            E_IJ=linalg.submatrix(m, ri, ci),
        )


@dataclass
class BoundReport:
    """One evaluated inequality: measured error, bound value, ingredients.

    ``rhs`` is the sharpest reported form; looser or specialised forms live
    in ``alternates``.  ``rhs`` is None when the bound's formula is not even
    defined for the instance (a failed smallness condition).
    """

    theorem: str
    p: float
    lhs: float
    rhs: float | None
    precondition_ok: bool
    terms: dict = field(default_factory=dict)
    alternates: dict = field(default_factory=dict)

    def satisfied(self, slack: float = INEQ_SLACK) -> bool:
        """True when the measured error is within the reported bound."""
        if self.rhs is None:
            return False
        return self.lhs <= self.rhs * (1.0 + slack)

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "p": self.p,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "precondition_ok": self.precondition_ok,
            "terms": dict(self.terms),
            "alternates": dict(self.alternates),
        }


def _schatten_of_values(s: np.ndarray, p: float) -> float:
    if s.size == 0:
        return 0.0
    if math.isinf(p):
        return float(np.max(s))
    return float(np.linalg.norm(s, ord=p))


def _pinv_values(a: np.ndarray) -> np.ndarray:
    """Singular values of the pseudoinverse of ``a``."""
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros(0)
    keep = s > linalg.PINV_RANK_TOL * s[0]
    return 1.0 / s[keep]


@dataclass
class PerturbationTerms:
    """All scalar ingredients entering the CUR perturbation bounds for one
    instance (A, k, I, J, E) in one Schatten norm."""

    p: float
    mu: float
    k: int
    noise: float
    noise_rows: float
    noise_cols: float
    noise_block: float
    w: float
    v: float
    w_spectral: float
    v_spectral: float
    sigma_k_u: float
    u_pinv: float
    u_pinv_spectral: float
    a_pinv: float
    a_pinv_spectral: float
    rank_ok: bool

    def as_dict(self) -> dict:
        return {
            "noise": self.noise,
            "noise_rows": self.noise_rows,
            "noise_cols": self.noise_cols,
            "noise_block": self.noise_block,
            "w": self.w,
            "v": self.v,
            "w_spectral": self.w_spectral,
            "v_spectral": self.v_spectral,
            "sigma_k_u": self.sigma_k_u,
            "u_pinv": self.u_pinv,
            "u_pinv_spectral": self.u_pinv_spectral,
            "a_pinv": self.a_pinv,
            "a_pinv_spectral": self.a_pinv_spectral,
        }


def perturbation_terms(a, k: int, rows, cols, e, norm) -> PerturbationTerms:
    """Compute the shared ingredients of the perturbation bounds.

    ``rank_ok`` records the standing assumption that the clean matrix and
    its selected column, row, and intersection blocks all have rank ``k``.
    """
    ns = _normspec(norm)
    m = as_matrix(a)
    err = as_matrix(e)
    if err.shape != m.shape:
        raise ValueError(f"noise shape {err.shape} does not match matrix shape {m.shape}")
    ri = _as_indices(rows)
    ci = _as_indices(cols)
    if not 1 <= k <= min(m.shape):
        raise ValueError(f"k must be in [1, {min(m.shape)}], got {k}")

    nd = NoiseDecomposition.split(err, ri, ci)
    f = extract_cur(m, ri, ci)

    fsvd = linalg.svd(m)
    w_sub = fsvd.W[ri][:, :k]
    v_sub = fsvd.V[ci][:, :k]
    w_vals = _pinv_values(w_sub)
    v_vals = _pinv_values(v_sub)
    u_vals = np.linalg.svd(f.U, compute_uv=False)
    sigma_k_u = float(u_vals[k - 1]) if u_vals.size >= k else 0.0
    u_pinv_vals = _pinv_values(f.U)
    a_pinv_vals = _pinv_values(m)

    rank_ok = (
        linalg.numerical_rank(m, RANK_TOL) == k
        and linalg.numerical_rank(f.C, RANK_TOL) == k
        and linalg.numerical_rank(f.U, RANK_TOL) == k
        and linalg.numerical_rank(f.R, RANK_TOL) == k
    )

    return PerturbationTerms(
        p=ns.p,
        mu=ns.mu,
        k=k,
        noise=schatten_norm(nd.E, ns.p),
        noise_rows=schatten_norm(nd.E_I, ns.p),
        noise_cols=schatten_norm(nd.E_J, ns.p),
        noise_block=schatten_norm(nd.E_IJ, ns.p),
        w=_schatten_of_values(w_vals, ns.p),
        v=_schatten_of_values(v_vals, ns.p),
        w_spectral=_schatten_of_values(w_vals, np.inf),
        v_spectral=_schatten_of_values(v_vals, np.inf),
        sigma_k_u=sigma_k_u,
        u_pinv=_schatten_of_values(u_pinv_vals, ns.p),
        u_pinv_spectral=_schatten_of_values(u_pinv_vals, np.inf),
        a_pinv=_schatten_of_values(a_pinv_vals, ns.p),
        a_pinv_spectral=_schatten_of_values(a_pinv_vals, np.inf),
        rank_ok=rank_ok,
    )


def singular_vector_terms(a, k: int, rows, cols, norm) -> tuple[float, float]:
    """Norms of the pseudoinverses of the selected singular-vector rows:
    ``(||W_k(I,:)^+||, ||V_k(J,:)^+||)`` in the requested Schatten norm."""
    ns = _normspec(norm)
    m = as_matrix(a)
    if linalg.numerical_rank(m, RANK_TOL) < k:
        raise ValueError(f"k={k} exceeds the numerical rank of the matrix")
    f = linalg.truncated_svd(m, k)
    w_vals = _pinv_values(f.W[_as_indices(rows)])
    v_vals = _pinv_values(f.V[_as_indices(cols)])
    return _schatten_of_values(w_vals, ns.p), _schatten_of_values(v_vals, ns.p)


def _measured_error(a, rows, cols, e, variant: CurVariant, p: float) -> float:
    m = as_matrix(a)
    noisy = m + as_matrix(e)
    f = extract_cur(noisy, rows, cols)
    approx = approximate(f, variant, noisy)
    return schatten_norm(m - approx, p)


def bound_projection(a, k: int, rows, cols, e, norm) -> BoundReport:
    """Error bound for the projection recombination ``C C^+ (A+E) R^+ R``
    built from noisy factors: linear in the noise, no dependence on ``U``."""
    t = perturbation_terms(a, k, rows, cols, e, norm)
    lhs = _measured_error(a, rows, cols, e, CurVariant.projection(), t.p)
    rhs = t.noise_rows * t.w + t.noise_cols * t.v + 3.0 * t.noise
    simplified = t.noise * (t.w + t.v + 3.0)
    return BoundReport(
        theorem="projection",
        p=t.p,
        lhs=lhs,
        rhs=rhs,
        precondition_ok=t.rank_ok,
        terms=t.as_dict(),
        alternates={"simplified": simplified},
    )


def bound_thresholded(a, k: int, rows, cols, e, tau: float, norm) -> BoundReport:
    """Error bound for ``C [U]_tau^+ R`` with singular-value threshold ``tau``.

    The primary form keeps every noise submatrix separate; the
    ``spectral_factors`` alternate re-derives it with the singular-vector
    and middle-inverse factors measured in the spectral norm, which is
    never larger.
    """
    if tau < 0:
        raise ValueError(f"threshold must be non-negative, got {tau}")
    t = perturbation_terms(a, k, rows, cols, e, norm)
    m = as_matrix(a)
    noisy = m + as_matrix(e)
    f_noisy = extract_cur(noisy, rows, cols)
    f_clean = extract_cur(m, rows, cols)

    u_thresh = linalg.threshold_svd(f_noisy.U, tau)
    thresh_vals = _pinv_values(u_thresh)
    u_thresh_pinv = _schatten_of_values(thresh_vals, t.p)
    u_thresh_pinv_spectral = _schatten_of_values(thresh_vals, np.inf)
    drift = schatten_norm(u_thresh - f_clean.U, t.p)

    lhs = _measured_error(a, rows, cols, e, CurVariant.thresholded(tau), t.p)

    def assembled(w, v, upinv):
        first = w * t.noise_rows + v * t.noise_cols + w * v * (2.0 * t.noise_block + drift)
        second = upinv * (
            (w * t.noise_rows + v * t.noise_cols + w * v * t.noise_block) * t.noise_block
            + t.noise_rows * t.noise_cols
        )
        return first + second

    rhs = assembled(t.w, t.v, u_thresh_pinv)
    alternates = {
        "spectral_factors": assembled(t.w_spectral, t.v_spectral, u_thresh_pinv_spectral),
    }
    if tau == 0.0:
        # with no thresholding the bound collapses to the noise-norm form
        alternates["simplified"] = (
            t.w + t.v + 3.0 * t.w * t.v
        ) * t.noise + u_thresh_pinv * (t.w + t.v + t.w * t.v + 1.0) * t.noise**2

    terms = t.as_dict()
    terms.update(
        {
            "tau": float(tau),
            "u_thresh_pinv": u_thresh_pinv,
            "u_thresh_pinv_spectral": u_thresh_pinv_spectral,
            "u_thresh_drift": drift,
        }
    )
    return BoundReport(
        theorem="thresholded",
        p=t.p,
        lhs=lhs,
        rhs=rhs,
        precondition_ok=t.rank_ok,
        terms=terms,
        alternates=alternates,
    )


def bound_plain(a, k: int, rows, cols, e, norm) -> BoundReport:
    """Error bound for the plain recombination ``C U^+ R`` of noisy factors;
    identical to :func:`bound_thresholded` at ``tau = 0``."""
    rep = bound_thresholded(a, k, rows, cols, e, 0.0, norm)
    rep.theorem = "plain"
    return rep


def bound_rank_u(a, k: int, rows, cols, e, norm) -> BoundReport:
    """Error bound for ``C (U_k)^+ R`` where the middle block is truncated
    to the target rank before pseudoinversion.

    Defined only while ``sigma_k(U) > 2 mu ||E_IJ||``; the ``linearized``
    alternate applies under the stronger ``sigma_k(U) > 4 mu ||E||`` and is
    linear in the noise, and ``chosen_free`` replaces the middle-matrix
    factors with singular-vector and spectrum quantities of the clean
    matrix.
    """
    t = perturbation_terms(a, k, rows, cols, e, norm)
    lhs = _measured_error(a, rows, cols, e, CurVariant.rank_u(k), t.p)

    first = t.w * t.noise_rows + t.v * t.noise_cols + 4.0 * t.w * t.v * t.noise_block
    second_sum = (
        t.w * t.noise_rows * t.noise_block
        + t.v * t.noise_cols * t.noise_block
        + t.w * t.v * t.noise_block**2
        + t.noise_rows * t.noise_cols
    )

    small_enough = t.sigma_k_u > 2.0 * t.mu * t.noise_block
    denom = 1.0 - 2.0 * t.mu * t.u_pinv_spectral * t.noise_block
    rhs = first + (t.u_pinv / denom) * second_sum if denom > 0.0 else None

    alternates: dict = {}
    if t.sigma_k_u > 4.0 * t.mu * t.noise:
        half_mu = 1.0 / (2.0 * t.mu)
        alternates["linearized"] = (
            (1.0 + half_mu) * (t.w + t.v) + (4.0 + half_mu) * t.w * t.v + half_mu
        ) * t.noise
    denom_free = 1.0 - 2.0 * t.mu * t.w_spectral * t.v_spectral * t.a_pinv_spectral * t.noise_block
    if denom_free > 0.0:
        alternates["chosen_free"] = first + (t.w * t.v * t.a_pinv / denom_free) * second_sum

    terms = t.as_dict()
    terms["fraction_denominator"] = denom
    return BoundReport(
        theorem="rank_u",
        p=t.p,
        lhs=lhs,
        rhs=rhs,
        precondition_ok=t.rank_ok and small_enough,
        terms=terms,
        alternates=alternates,
    )


def bound_projection_rank(a, k: int, rows, cols, e, norm) -> BoundReport:
    """Error bound for the rank-truncated projection recombination
    ``C_k C_k^+ (A+E) R_k^+ R_k``: twice the projection bound's submatrix
    terms with a 3/2 noise term."""
    t = perturbation_terms(a, k, rows, cols, e, norm)
    lhs = _measured_error(a, rows, cols, e, CurVariant.projection_rank(k), t.p)
    rhs = 2.0 * (t.noise_rows * t.w + t.noise_cols * t.v + 1.5 * t.noise)
    simplified = 2.0 * t.noise * (t.w + t.v + 1.5)
    return BoundReport(
        theorem="projection_rank",
        p=t.p,
        lhs=lhs,
        rhs=rhs,
        precondition_ok=t.rank_ok,
        terms=t.as_dict(),
        alternates={"simplified": simplified},
    )


@dataclass
class MaxvolBounds:
    """Index-set-independent bounds available when (I, J) are certified
    maximal-volume row subsets of the clean singular vectors."""

    certified: bool
    t_row: float
    t_col: float
    projection_rank: BoundReport
    rank_u: BoundReport


def bound_maxvol(a, k: int, rows, cols, e, norm, certify: bool = True) -> MaxvolBounds:
    """Evaluate the maximal-volume bounds, whose right-hand sides depend only
    on the dimensions through growth factors ``t``.

    When ``certify`` is set the index sets are checked by exhaustive
    enumeration to really attain the maximal volume; uncertified index sets
    yield ``precondition_ok=False`` on both reports.
    """
    t = perturbation_terms(a, k, rows, cols, e, norm)
    m = as_matrix(a)
    ri = _as_indices(rows)
    ci = _as_indices(cols)
    fsvd = linalg.truncated_svd(m, k)

    certified = False
    if certify:
        certified = certify_maxvol(fsvd.W, ri) and certify_maxvol(fsvd.V, ci)

    n_rows, n_cols = m.shape
    t_row = t_factor(k, n_rows, ri.size)
    t_col = t_factor(k, n_cols, ci.size)
    square = n_rows == n_cols and ri.size == ci.size

    lhs_proj = _measured_error(a, rows, cols, e, CurVariant.projection_rank(k), t.p)
    rhs_proj = (2.0 * t_row + 2.0 * t_col + 3.0) * t.noise
    alt_proj: dict = {}
    if square:
        alt_proj["square"] = (4.0 * t_row + 3.0) * t.noise
    proj_report = BoundReport(
        theorem="maxvol_projection_rank",
        p=t.p,
        lhs=lhs_proj,
        rhs=rhs_proj,
        precondition_ok=t.rank_ok and certified,
        terms={**t.as_dict(), "t_row": t_row, "t_col": t_col},
        alternates=alt_proj,
    )

    lhs_rank = _measured_error(a, rows, cols, e, CurVariant.rank_u(k), t.p)
    sigma_k_a = 1.0 / t.a_pinv_spectral if t.a_pinv_spectral > 0 else math.inf
    spectrum_ok = sigma_k_a >= 4.0 * t.mu * t_row * t_col * t.noise
    half_mu = 1.0 / (2.0 * t.mu)
    rhs_rank = (
        half_mu + (1.0 + half_mu) * (t_row + t_col) + (4.0 + half_mu) * t_row * t_col
    ) * t.noise
    alt_rank: dict = {}
    if square:
        alt_rank["square"] = (
            half_mu + (2.0 + 1.0 / t.mu) * t_row + (4.0 + half_mu) * t_row**2
        ) * t.noise
        # constants relaxed to their worst case over all admissible mu
        alt_rank["square_mu_free"] = (0.5 + 3.0 * t_row + 4.5 * t_row**2) * t.noise
    rank_report = BoundReport(
        theorem="maxvol_rank_u",
        p=t.p,
        lhs=lhs_rank,
        rhs=rhs_rank,
        precondition_ok=t.rank_ok and certified and spectrum_ok,
        terms={**t.as_dict(), "t_row": t_row, "t_col": t_col, "sigma_k_a": sigma_k_a},
        alternates=alt_rank,
    )

    return MaxvolBounds(
        certified=certified,
        t_row=t_row,
        t_col=t_col,
        projection_rank=proj_report,
        rank_u=rank_report,
    )


def _paired_spectra(b, btilde) -> tuple[np.ndarray, np.ndarray]:
    mb = as_matrix(b)
    mt = as_matrix(btilde)
    if mb.shape != mt.shape:
        raise ValueError(f"shape mismatch: {mb.shape} vs {mt.shape}")
    return linalg.singular_values(mb), linalg.singular_values(mt)


def weyl_gap(b, btilde) -> float:
    """Largest movement of any singular value between ``b`` and ``btilde``;
    never exceeds the spectral norm of the difference."""
    sb, st = _paired_spectra(b, btilde)
    return float(np.max(np.abs(sb - st)))


def mirsky_gap(b, btilde, norm) -> float:
    """Schatten norm of the vector of singular-value movements; never
    exceeds the same norm of the difference matrix."""
    ns = _normspec(norm)
    sb, st = _paired_spectra(b, btilde)
    return _schatten_of_values(np.abs(sb - st), ns.p)


@dataclass
class StewartReport:
    """Pseudoinverse perturbation check between ``b`` and ``btilde = b + e``.

    The equal-rank branch verifies
    ``||B^+ - Bt^+|| <= mu ||Bt^+||_2 ||B^+||_2 ||E||``; the rank-change
    branch verifies the analogous squared bound together with the lower
    bound ``1/||E||_2 <= ||B^+ - Bt^+||_2``.  The two-sided bracket on
    ``||Bt^+||`` applies when the ranks agree and the noise is small
    against ``sigma_k(B)``.
    """

    p: float
    mu: float
    rank_b: int
    rank_bt: int
    branch: str
    diff: float
    diff_spectral: float
    upper_rhs: float
    upper_ok: bool
    lower_rhs: float | None
    lower_ok: bool | None
    bracket_applicable: bool
    bracket_low: float | None
    bracket_high: float | None
    bracket_ok: bool | None


def stewart_pinv_check(b, btilde, norm, slack: float = 1e-9) -> StewartReport:
    """Evaluate the pseudoinverse perturbation inequalities on a pair."""
    ns = _normspec(norm)
    mb = as_matrix(b)
    mt = as_matrix(btilde)
    if mb.shape != mt.shape:
        raise ValueError(f"shape mismatch: {mb.shape} vs {mt.shape}")
    err = mt - mb
    noise = schatten_norm(err, ns.p)
    noise_spectral = schatten_norm(err, np.inf)

    b_vals = _pinv_values(mb)
    t_vals = _pinv_values(mt)
    b_pinv = linalg.pinv(mb)
    t_pinv = linalg.pinv(mt)
    diff_vals = np.linalg.svd(b_pinv - t_pinv, compute_uv=False)
    diff = _schatten_of_values(diff_vals, ns.p)
    diff_spectral = float(diff_vals[0]) if diff_vals.size else 0.0

    b_pinv2 = _schatten_of_values(b_vals, np.inf)
    t_pinv2 = _schatten_of_values(t_vals, np.inf)
    rank_b = linalg.numerical_rank(mb, RANK_TOL)
    rank_bt = linalg.numerical_rank(mt, RANK_TOL)

    if rank_b == rank_bt:
        branch = "equal_rank"
        upper_rhs = ns.mu * t_pinv2 * b_pinv2 * noise
        lower_rhs = None
        lower_ok = None
    else:
        branch = "rank_change"
        upper_rhs = ns.mu * max(t_pinv2, b_pinv2) ** 2 * noise
        lower_rhs = 1.0 / noise_spectral if noise_spectral > 0 else math.inf
        lower_ok = diff_spectral >= lower_rhs * (1.0 - slack)
    upper_ok = diff <= upper_rhs * (1.0 + slack)

    sigma_k_b = 1.0 / b_pinv2 if b_pinv2 > 0 else math.inf
    bracket_applicable = branch == "equal_rank" and sigma_k_b > ns.mu * noise
    bracket_low = bracket_high = None
    bracket_ok = None
    if bracket_applicable:
        b_norm = _schatten_of_values(b_vals, ns.p)
        t_norm = _schatten_of_values(t_vals, ns.p)
        bracket_low = b_norm / (1.0 + ns.mu * b_pinv2 * noise)
        bracket_high = b_norm / (1.0 - ns.mu * b_pinv2 * noise)
        bracket_ok = (
            bracket_low * (1.0 - slack) <= t_norm <= bracket_high * (1.0 + slack)
        )

    return StewartReport(
        p=ns.p,
        mu=ns.mu,
        rank_b=rank_b,
        rank_bt=rank_bt,
        branch=branch,
        diff=diff,
        diff_spectral=diff_spectral,
        upper_rhs=upper_rhs,
        upper_ok=upper_ok,
        lower_rhs=lower_rhs,
        lower_ok=lower_ok,
        bracket_applicable=bracket_applicable,
        bracket_low=bracket_low,
        bracket_high=bracket_high,
        bracket_ok=bracket_ok,
    )
