"""Synthetic matrix generators and desk-scale experiment drivers.

The experiment protocol: build a low-rank matrix, add noise, repeatedly
sample column (and row) index sets of growing size, and record the relative
reconstruction error of each rank-enforcement variant next to the truncated
SVD baseline.  Symmetric inputs reuse the column index set for the rows, so
the row factor is exactly the transposed column factor.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from . import bounds, linalg
from .cur import CurVariant, approximate, extract_cur
from .linalg import as_matrix, pinv, rank_truncate, schatten_norm
from .sampling import (
    IndexSet,
    derive_seed,
    leverage_sample,
    length_sample,
    maxvol_select,
    spawn_rng,
    uniform_sample,
)

__all__ = [
    "gen_spsd_lowrank",
    "gen_noise",
    "gen_decay_spectrum",
    "gen_hilbert",
    "gen_gaussian_kernel",
    "relative_error",
    "CounterexampleReport",
    "rank_truncation_counterexample",
    "TruncationOrderReport",
    "nystrom_truncation_check",
    "general_truncation_check",
    "ExperimentConfig",
    "TrialResult",
    "run_experiment",
    "summarize",
    "write_results_csv",
    "write_summary_json",
    "config_from_dict",
    "load_config",
]

# fixed stream tags so generator, noise, and trial draws never collide
_STREAM_MATRIX = 0x6D61
_STREAM_NOISE = 0x6E6F
_STREAM_COLS = 0x636F
_STREAM_ROWS = 0x726F


def _orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-ish random orthogonal matrix with a deterministic sign fix."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    d = np.sign(np.diag(r))
    d[d == 0.0] = 1.0
    return q * d


def gen_spsd_lowrank(n: int, k: int, seed: int) -> np.ndarray:
    """Random SPSD matrix of exact rank ``k``: the Gram matrix of the best
    rank-k approximation of a square Gaussian matrix."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    rng = spawn_rng(seed, _STREAM_MATRIX)
    g = rng.standard_normal((n, n))
    gk = rank_truncate(g, k)
    a = gk @ gk.T
    return (a + a.T) / 2.0


def gen_noise(n: int, kind: str, sigma: float, seed: int) -> np.ndarray:
    """Random symmetric noise with Gaussian entries of standard deviation
    ``sigma``: ``spsd`` squares the draw into a PSD matrix, ``symmetric``
    averages it with its transpose (indefinite)."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    rng = spawn_rng(seed, _STREAM_NOISE)
    h = rng.normal(0.0, sigma, size=(n, n))
    if kind == "spsd":
        e = h @ h.T
        return (e + e.T) / 2.0
    if kind == "symmetric":
        return (h + h.T) / 2.0
    raise ValueError(f"noise kind must be 'spsd' or 'symmetric', got {kind!r}")


def gen_decay_spectrum(n: int, kind: str, c: float, plateau: int, seed: int) -> np.ndarray:
    """Random square matrix with prescribed singular-value decay: a plateau
    of ones followed by ``exp(-c*i)`` or ``i**-c`` at 1-based position i."""
    if not 0 <= plateau < n:
        raise ValueError(f"need 0 <= plateau < n, got plateau={plateau}, n={n}")
    if c <= 0:
        raise ValueError(f"decay parameter must be positive, got {c}")
    positions = np.arange(1, n + 1, dtype=float)
    if kind == "exp":
        sigma = np.exp(-c * positions)
    elif kind == "poly":
        sigma = positions**-c
    else:
        raise ValueError(f"decay kind must be 'exp' or 'poly', got {kind!r}")
    sigma[:plateau] = 1.0
    rng = spawn_rng(seed, _STREAM_MATRIX)
    w = _orthogonal(rng, n)
    v = _orthogonal(rng, n)
    return (w * sigma) @ v.T


def gen_hilbert(n: int) -> np.ndarray:
    """Hilbert matrix ``H[i, j] = 1 / (i + j - 1)`` (1-based), the classic
    ill-conditioned SPD test matrix."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    idx = np.arange(n, dtype=float)
    return 1.0 / (idx[:, None] + idx[None, :] + 1.0)


def gen_gaussian_kernel(b) -> np.ndarray:
    """Gaussian kernel matrix of the columns of ``b``:
    ``K[i, j] = exp(-||b_i - b_j||^2)``, SPSD with unit diagonal."""
    m = as_matrix(b)
    gram = m.T @ m
    sq = np.diag(gram)
    d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * gram, 0.0)
    k = np.exp(-d2)
    k = (k + k.T) / 2.0
    np.fill_diagonal(k, 1.0)
    return k


def relative_error(a, ahat, norm) -> float:
    """``||a - ahat|| / ||a||`` in the requested Schatten norm."""
    p = norm.p if isinstance(norm, bounds.NormSpec) else float(norm)
    m = as_matrix(a)
    h = as_matrix(ahat)
    if m.shape != h.shape:
        raise ValueError(f"shape mismatch: {m.shape} vs {h.shape}")
    denom = schatten_norm(m, p)
    if denom == 0.0:
        raise ValueError("relative error is undefined for a zero matrix")
    return schatten_norm(m - h, p) / denom


@dataclass
class CounterexampleReport:
    """Spectra and Schatten norms showing that truncating after the skeleton
    product can be strictly worse than truncating the middle block, for one
    explicit indefinite 3x3 matrix."""

    epsilon: float
    matrix: np.ndarray
    spectrum_rank_u: tuple[float, float, float]
    spectrum_post_truncated: tuple[float, float, float]
    norms_rank_u: dict
    norms_post_truncated: dict
    rank_u_strictly_better: dict
    passed: bool


def rank_truncation_counterexample(epsilon: float) -> CounterexampleReport:
    """Build the 3x3 matrix whose rank-1 skeleton reconstructions order the
    two truncation strategies the wrong way round in every Schatten norm.

    The matrix keeps its large 2x2 corner block in the selected rows and
    columns; truncating the recombined product then throws that block away
    entirely, while truncating the middle block first keeps it.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    a = np.array(
        [
            [-1.0, 0.0, 10.0],
            [0.0, 1.0 + epsilon, 0.0],
            [10.0, 0.0, 100.0],
        ]
    )
    f = extract_cur(a, [0, 1], [0, 1])
    res_rank_u = a - approximate(f, CurVariant.rank_u(1))
    res_post = a - approximate(f, CurVariant.post_truncated(1))

    spec_rank_u = tuple(linalg.singular_values(res_rank_u).tolist())
    spec_post = tuple(linalg.singular_values(res_post).tolist())

    norms_rank_u = {}
    norms_post = {}
    strictly = {}
    for p in (1.0, 2.0, np.inf):
        nu = schatten_norm(res_rank_u, p)
        npost = schatten_norm(res_post, p)
        norms_rank_u[p] = nu
        norms_post[p] = npost
        strictly[p] = nu < npost

    return CounterexampleReport(
        epsilon=epsilon,
        matrix=a,
        spectrum_rank_u=spec_rank_u,
        spectrum_post_truncated=spec_post,
        norms_rank_u=norms_rank_u,
        norms_post_truncated=norms_post,
        rank_u_strictly_better=strictly,
        passed=all(strictly.values()),
    )


@dataclass
class TruncationOrderReport:
    """Nuclear-norm errors of truncating after versus during the skeleton
    product, and whether truncating after was at least as good."""

    nuclear_error_post_truncated: float
    nuclear_error_rank_u: float
    post_no_worse: bool


def nystrom_truncation_check(kernel, cols, r: int, slack: float = 1e-10) -> TruncationOrderReport:
    """For an SPSD matrix and column set J (rows reused, so the row factor
    is the transposed column factor), compare truncating the recombined
    product against truncating the middle block, in the nuclear norm."""
    k = as_matrix(kernel)
    if k.shape[0] != k.shape[1] or np.max(np.abs(k - k.T)) > 1e-10 * max(np.max(np.abs(k)), 1.0):
        raise ValueError("kernel matrix must be symmetric")
    ci = cols.indices if isinstance(cols, IndexSet) else tuple(int(i) for i in cols)
    c = k[:, list(ci)]
    u = c[list(ci), :]
    post = rank_truncate(c @ pinv(u) @ c.T, r)
    during = c @ linalg.pinv_truncated(u, r) @ c.T
    err_post = schatten_norm(k - post, 1.0)
    err_during = schatten_norm(k - during, 1.0)
    # absolute floor keeps the comparison meaningful when both errors are
    # pure round-off (exactly recoverable instances)
    tol = slack * max(err_during, schatten_norm(k, 1.0))
    return TruncationOrderReport(
        nuclear_error_post_truncated=err_post,
        nuclear_error_rank_u=err_during,
        post_no_worse=err_post <= err_during + tol,
    )


def general_truncation_check(a, rows, cols, r: int, slack: float = 1e-10) -> TruncationOrderReport:
    """The same comparison for a general (not necessarily SPSD) matrix with
    independent row and column selections; the ordering can fail here."""
    m = as_matrix(a)
    f = extract_cur(m, rows, cols)
    post = m - approximate(f, CurVariant.post_truncated(r))
    during = m - approximate(f, CurVariant.rank_u(r))
    err_post = schatten_norm(post, 1.0)
    err_during = schatten_norm(during, 1.0)
    tol = slack * max(err_during, schatten_norm(m, 1.0))
    return TruncationOrderReport(
        nuclear_error_post_truncated=err_post,
        nuclear_error_rank_u=err_during,
        post_no_worse=err_post <= err_during + tol,
    )


_GENERATORS = ("spsd_lowrank", "decay_exp", "decay_poly", "hilbert")
_NOISE_KINDS = ("spsd", "symmetric", "none")
_SAMPLERS = ("uniform", "length", "leverage", "maxvol")
_VARIANTS = ("plain", "projection", "post_truncated", "rank_u", "projection_rank")
_SYMMETRIC_GENERATORS = {"spsd_lowrank": True, "hilbert": True, "decay_exp": False, "decay_poly": False}


@dataclass
class ExperimentConfig:
    """Full description of one experiment run; identical configs (seed
    included) reproduce byte-identical results."""

    generator: str
    size: int
    rank: int
    column_counts: tuple[int, ...]
    trials: int
    sampler: str = "uniform"
    noise: str = "none"
    sigma: float = 1e-3
    norm: float = 2.0
    seed: int = 0
    decay_c: float = 0.5
    plateau: int = 10
    variants: tuple[str, ...] = ("post_truncated", "rank_u", "projection_rank")
    compute_bounds: bool = False
    symmetric: bool | None = None

    def resolved_symmetric(self) -> bool:
        if self.symmetric is not None:
            return self.symmetric
        return _SYMMETRIC_GENERATORS[self.generator]

    def validate(self) -> None:
        if self.generator not in _GENERATORS:
            raise ValueError(f"generator must be one of {_GENERATORS}, got {self.generator!r}")
        if self.noise not in _NOISE_KINDS:
            raise ValueError(f"noise must be one of {_NOISE_KINDS}, got {self.noise!r}")
        if self.sampler not in _SAMPLERS:
            raise ValueError(f"sampler must be one of {_SAMPLERS}, got {self.sampler!r}")
        for v in self.variants:
            if v not in _VARIANTS:
                raise ValueError(f"variant must be one of {_VARIANTS}, got {v!r}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not 1 <= self.rank <= self.size:
            raise ValueError(f"rank must be in [1, size], got {self.rank}")
        if len(self.column_counts) < 1:
            raise ValueError("column_counts must not be empty")
        for x in self.column_counts:
            if not self.rank <= x <= self.size:
                raise ValueError(
                    f"column counts must lie in [rank, size] = [{self.rank}, {self.size}], got {x}"
                )
        if self.noise != "none" and self.sigma <= 0:
            raise ValueError(f"sigma must be positive with noise, got {self.sigma}")
        if not self.norm >= 1:
            raise ValueError(f"norm must satisfy p >= 1, got {self.norm}")
        if self.generator in ("decay_exp", "decay_poly"):
            if not 0 <= self.plateau < self.size:
                raise ValueError(f"plateau must be in [0, size), got {self.plateau}")
            if self.decay_c <= 0:
                raise ValueError(f"decay_c must be positive, got {self.decay_c}")


@dataclass
class TrialResult:
    """One measured reconstruction error."""

    variant: str
    column_count: int
    trial: int
    relative_error: float
    bound_rhs: float | None = None
    precondition_ok: bool | None = None
    seed: int = 0


def _generate_matrix(cfg: ExperimentConfig) -> np.ndarray:
    if cfg.generator == "spsd_lowrank":
        return gen_spsd_lowrank(cfg.size, cfg.rank, cfg.seed)
    if cfg.generator == "decay_exp":
        return gen_decay_spectrum(cfg.size, "exp", cfg.decay_c, cfg.plateau, cfg.seed)
    if cfg.generator == "decay_poly":
        return gen_decay_spectrum(cfg.size, "poly", cfg.decay_c, cfg.plateau, cfg.seed)
    return gen_hilbert(cfg.size)


def _sample_axis(cfg: ExperimentConfig, noisy: np.ndarray, count: int, axis: str, seed: int) -> IndexSet:
    n = noisy.shape[1] if axis == "cols" else noisy.shape[0]
    if cfg.sampler == "uniform":
        return uniform_sample(n, count, seed)
    if cfg.sampler == "length":
        return length_sample(noisy, count, axis, seed)
    if cfg.sampler == "leverage":
        return leverage_sample(noisy, count, cfg.rank, axis, seed)
    basis = linalg.truncated_svd(noisy, cfg.rank)
    return maxvol_select(basis.V if axis == "cols" else basis.W, count)


def _variant_of(name: str, k: int) -> CurVariant:
    if name == "plain":
        return CurVariant.plain()
    if name == "projection":
        return CurVariant.projection()
    if name == "post_truncated":
        return CurVariant.post_truncated(k)
    if name == "rank_u":
        return CurVariant.rank_u(k)
    return CurVariant.projection_rank(k)


def run_experiment(cfg: ExperimentConfig) -> list[TrialResult]:
    """Run the sampling/reconstruction protocol and return one record per
    (variant, column count, trial), including the SVD baseline rows."""
    cfg.validate()
    a = _generate_matrix(cfg)
    if cfg.noise == "none":
        e = np.zeros_like(a)
    else:
        e = gen_noise(cfg.size, cfg.noise, cfg.sigma, cfg.seed)
    noisy = a + e
    p = cfg.norm

    baseline = relative_error(a, rank_truncate(noisy, cfg.rank), p)
    symmetric = cfg.resolved_symmetric()

    results: list[TrialResult] = []
    for x in cfg.column_counts:
        for trial in range(cfg.trials):
            cols = _sample_axis(cfg, noisy, x, "cols", derive_seed(cfg.seed, _STREAM_COLS, x, trial))
            if symmetric:
                rows: IndexSet = cols
            else:
                rows = _sample_axis(cfg, noisy, x, "rows", derive_seed(cfg.seed, _STREAM_ROWS, x, trial))
            f = extract_cur(noisy, rows, cols)
            for name in cfg.variants:
                approx = approximate(f, _variant_of(name, cfg.rank), noisy)
                err = relative_error(a, approx, p)
                rhs = None
                pre = None
                if cfg.compute_bounds and cfg.noise != "none" and name in ("rank_u", "projection_rank"):
                    fn = bounds.bound_rank_u if name == "rank_u" else bounds.bound_projection_rank
                    rep = fn(a, cfg.rank, rows, cols, e, p)
                    rhs = None if rep.rhs is None else rep.rhs / schatten_norm(a, p)
                    pre = rep.precondition_ok
                results.append(
                    TrialResult(name, x, trial, err, rhs, pre, cfg.seed)
                )
            results.append(TrialResult("svd_baseline", x, trial, baseline, None, None, cfg.seed))
    return results


def summarize(results: list[TrialResult]) -> list[dict]:
    """Mean/min/max relative error per (variant, column count)."""
    groups: dict[tuple[str, int], list[float]] = {}
    for r in results:
        groups.setdefault((r.variant, r.column_count), []).append(r.relative_error)
    out = []
    for (variant, count) in sorted(groups, key=lambda kv: (kv[0], kv[1])):
        vals = groups[(variant, count)]
        out.append(
            {
                "variant": variant,
                "column_count": count,
                "mean": float(np.mean(vals)),
                "min": float(np.min(vals)),
                "max": float(np.max(vals)),
            }
        )
    return out


def _fmt(x: float | None) -> str:
    if x is None:
        return ""
    return format(float(x), ".17g")


def write_results_csv(results: list[TrialResult], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["variant", "column_count", "trial", "relative_error", "bound_rhs", "precondition_ok"]
        )
        for r in results:
            writer.writerow(
                [
                    r.variant,
                    r.column_count,
                    r.trial,
                    _fmt(r.relative_error),
                    _fmt(r.bound_rhs),
                    "" if r.precondition_ok is None else str(r.precondition_ok).lower(),
                ]
            )


def write_summary_json(results: list[TrialResult], path) -> None:
    rows = summarize(results)
    with open(path, "w") as fh:
        json.dump(rows, fh, indent=2, sort_keys=True)
        fh.write("\n")


_CONFIG_TYPES = {
    "generator": str,
    "size": int,
    "rank": int,
    "column_counts": list,
    "trials": int,
    "sampler": str,
    "noise": str,
    "sigma": (int, float),
    "norm": (int, float, str),
    "seed": int,
    "decay_c": (int, float),
    "plateau": int,
    "variants": list,
    "compute_bounds": bool,
    "symmetric": bool,
}
_REQUIRED_KEYS = ("generator", "size", "rank", "column_counts", "trials")


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Build and validate a config from parsed JSON/TOML data, rejecting
    unknown keys and wrong types with a usable message."""
    if not isinstance(raw, dict):
        raise ValueError("experiment config must be a table/object of key-value pairs")
    unknown = sorted(set(raw) - set(_CONFIG_TYPES))
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    missing = [k for k in _REQUIRED_KEYS if k not in raw]
    if missing:
        raise ValueError(f"missing required config keys: {', '.join(missing)}")
    for key, val in raw.items():
        expect = _CONFIG_TYPES[key]
        ok = isinstance(val, expect)
        if ok and isinstance(val, bool) and expect is not bool:
            ok = False
        if not ok:
            raise ValueError(f"config key {key!r} has wrong type {type(val).__name__}")

    data = dict(raw)
    if "norm" in data:
        data["norm"] = parse_norm(data["norm"])
    if "column_counts" in data:
        data["column_counts"] = tuple(int(x) for x in data["column_counts"])
    if "variants" in data:
        data["variants"] = tuple(str(v) for v in data["variants"])
    cfg = ExperimentConfig(**data)
    cfg.validate()
    return cfg


def parse_norm(value) -> float:
    """Accept 1 / 2 / inf spellings of a Schatten index."""
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "infinity", "spectral"):
            return math.inf
        if text in ("nuclear", "nuc"):
            return 1.0
        if text in ("frobenius", "fro"):
            return 2.0
        value = float(text)
    p = float(value)
    if not p >= 1:
        raise ValueError(f"norm must satisfy p >= 1, got {p}")
    return p


def load_config(path) -> ExperimentConfig:
    """Load an experiment config from a JSON or TOML file."""
    text = open(path, "rb").read()
    if str(path).lower().endswith(".toml"):
        try:
            import tomllib  # py >= 3.11
        except ModuleNotFoundError:
            import tomli as tomllib
        raw = tomllib.loads(text.decode())
    else:
        raw = json.loads(text.decode())
    return config_from_dict(raw)
