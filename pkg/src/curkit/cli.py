"""Command-line interface.

Subcommands: ``approx`` (build one skeleton approximation), ``verify``
(exact-decomposition equivalence report), ``bounds`` (perturbation-bound
table for a noisy instance), ``experiment`` (sampling sweeps from a config
file), ``counterexample`` (the explicit 3x3 rank-truncation ordering
failure), and ``maxvol`` (greedy large-volume row selection).

Indices on the command line are 1-based.  Exit codes: 0 success, 2 usage or
config error, 3 numerical precondition failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import bounds as bounds_mod
from . import experiments, linalg
from .cur import CurVariant, approximate, extract_cur, verify_exact_cur
from .experiments import parse_norm
from .matio import read_matrix, write_matrix
from .sampling import (
    IndexSet,
    derive_seed,
    leverage_sample,
    length_sample,
    maxvol_select,
    t_factor,
    t_factor_frobenius,
    uniform_sample,
)

__all__ = ["main"]


class _PrecondFailure(RuntimeError):
    """A numerical precondition (rank, volume, inequality) failed."""


class _IoFailure(RuntimeError):
    """Reading or writing a data file failed."""


def _load(path) -> np.ndarray:
    try:
        return read_matrix(path)
    except (OSError, ValueError) as exc:
        raise _IoFailure(f"cannot read matrix from {path}: {exc}") from exc


def _save(path, a) -> None:
    try:
        write_matrix(path, a)
    except OSError as exc:
        raise _IoFailure(f"cannot write matrix to {path}: {exc}") from exc


def _parse_index_list(text: str, dim: int, what: str) -> IndexSet:
    try:
        raw = [int(tok) for tok in text.split(",") if tok.strip()]
        return IndexSet.from_one_based(raw, dim)
    except (ValueError, IndexError) as exc:
        raise ValueError(f"bad {what} index list {text!r}: {exc}") from exc


def _fmt6(x) -> str:
    if x is None:
        return "-"
    return format(float(x), ".6g")


def _norm_tag(p: float) -> str:
    if math.isinf(p):
        return "inf"
    return format(p, "g")


def _variant_from_args(args) -> CurVariant:
    kind = args.variant
    if kind == "thresholded":
        if args.tau is None:
            raise ValueError("--variant thresholded requires --tau")
        return CurVariant.thresholded(args.tau)
    if kind in ("rank_u", "projection_rank", "post_truncated"):
        if args.rank is None:
            raise ValueError(f"--variant {kind} requires --rank")
        return CurVariant(kind, rank=args.rank)
    return CurVariant(kind)


def cmd_approx(args) -> int:
    a = _load(args.matrix)
    m, n = a.shape

    explicit = args.rows is not None or args.cols is not None
    sampled = args.sampler is not None
    if explicit == sampled:
        raise ValueError("give either --rows/--cols or --sampler/--count, not both")
    if explicit:
        if args.rows is None or args.cols is None:
            raise ValueError("--rows and --cols must be given together")
        rows = _parse_index_list(args.rows, m, "row")
        cols = _parse_index_list(args.cols, n, "column")
    else:
        if args.count is None:
            raise ValueError("--sampler requires --count")
        rows, cols = _sample_both(a, args)

    variant = _variant_from_args(args)
    f = extract_cur(a, rows, cols)
    try:
        approx = approximate(f, variant, a)
    except ValueError as exc:
        raise _PrecondFailure(str(exc)) from exc

    _save(args.out, approx)
    print(f"rows: {','.join(map(str, rows.one_based()))}")
    print(f"cols: {','.join(map(str, cols.one_based()))}")
    print(f"wrote {args.out}")

    if args.truth is not None:
        truth = _load(args.truth)
        errors = {
            f"p{_norm_tag(p)}": experiments.relative_error(truth, approx, p)
            for p in (1.0, 2.0, math.inf)
        }
        record = {
            "rows": ",".join(map(str, rows.one_based())),
            "cols": ",".join(map(str, cols.one_based())),
            "variant": args.variant,
            "relative_error": errors,
        }
        sidecar = args.out + ".json"
        with open(sidecar, "w") as fh:
            json.dump(record, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"relative error (spectral): {_fmt6(errors['pinf'])}")
        print(f"wrote {sidecar}")
    return 0


def _sample_both(a, args) -> tuple[IndexSet, IndexSet]:
    sampler = args.sampler
    count = args.count
    seed = args.seed
    if sampler in ("leverage", "maxvol") and args.rank is None:
        raise ValueError(f"--sampler {sampler} requires --rank")
    if sampler == "uniform":
        return (
            uniform_sample(a.shape[0], count, derive_seed(seed, 0)),
            uniform_sample(a.shape[1], count, derive_seed(seed, 1)),
        )
    if sampler == "length":
        return (
            length_sample(a, count, "rows", derive_seed(seed, 0)),
            length_sample(a, count, "cols", derive_seed(seed, 1)),
        )
    if sampler == "leverage":
        return (
            leverage_sample(a, count, args.rank, "rows", derive_seed(seed, 0)),
            leverage_sample(a, count, args.rank, "cols", derive_seed(seed, 1)),
        )
    if sampler == "maxvol":
        try:
            f = linalg.truncated_svd(a, args.rank)
            return maxvol_select(f.W, count), maxvol_select(f.V, count)
        except ValueError as exc:
            raise _PrecondFailure(str(exc)) from exc
    raise ValueError(f"unknown sampler {sampler!r}")


def cmd_verify(args) -> int:
    a = _load(args.matrix)
    rows = _parse_index_list(args.rows, a.shape[0], "row")
    cols = _parse_index_list(args.cols, a.shape[1], "column")
    rep = verify_exact_cur(a, rows, cols, tol=args.tol)
    if args.json:
        print(json.dumps(rep.to_dict(), indent=2, sort_keys=True))
        return 0 if rep.consistent else 3
    print(f"rank(A)={rep.rank_a} rank(C)={rep.rank_c} rank(U)={rep.rank_u} rank(R)={rep.rank_r}")
    for name, ok in rep.conditions.items():
        res = rep.residuals.get(name)
        suffix = f"  residual={_fmt6(res)}" if res is not None else ""
        print(f"{name:28s} {'TRUE' if ok else 'FALSE'}{suffix}")
    print(f"middle_inverse residual      {_fmt6(rep.residuals['middle_inverse'])}")
    if not rep.consistent:
        print("equivalence check INCONSISTENT", file=sys.stderr)
        return 3
    print(f"equivalence: consistent ({'exact' if rep.exact else 'inexact'} decomposition)")
    return 0


_BOUND_IDS = ("projection", "thresholded", "plain", "rank_u", "projection_rank", "maxvol")


def cmd_bounds(args) -> int:
    noisy = _load(args.matrix)
    noise = _load(args.noise)
    if noisy.shape != noise.shape:
        raise ValueError(f"matrix shape {noisy.shape} does not match noise shape {noise.shape}")
    clean = noisy - noise
    k = args.rank
    if linalg.numerical_rank(clean) < k:
        print(
            f"error: --rank {k} exceeds the numerical rank "
            f"{linalg.numerical_rank(clean)} of (matrix - noise)",
            file=sys.stderr,
        )
        return 2
    rows = _parse_index_list(args.rows, clean.shape[0], "row")
    cols = _parse_index_list(args.cols, clean.shape[1], "column")
    p = parse_norm(args.norm)
    wanted = _BOUND_IDS if args.theorem == "all" else (args.theorem,)

    w, v = bounds_mod.singular_vector_terms(clean, k, rows, cols, p)
    mu = bounds_mod.mu_for(p)
    print(f"p={_norm_tag(p)}  mu={_fmt6(mu)}  w={_fmt6(w)}  v={_fmt6(v)}")
    print(f"{'bound':24s} {'pre':5s} {'lhs':>12s} {'rhs':>12s}  alternates")

    tau = args.tau if args.tau is not None else linalg.schatten_norm(noise, math.inf)
    reports = []
    for name in wanted:
        if name == "projection":
            reports.append(bounds_mod.bound_projection(clean, k, rows, cols, noise, p))
        elif name == "thresholded":
            reports.append(bounds_mod.bound_thresholded(clean, k, rows, cols, noise, tau, p))
        elif name == "plain":
            reports.append(bounds_mod.bound_plain(clean, k, rows, cols, noise, p))
        elif name == "rank_u":
            reports.append(bounds_mod.bound_rank_u(clean, k, rows, cols, noise, p))
        elif name == "projection_rank":
            reports.append(bounds_mod.bound_projection_rank(clean, k, rows, cols, noise, p))
        else:
            space = math.comb(clean.shape[0], len(rows)) + math.comb(clean.shape[1], len(cols))
            if space > 200_000:
                print(f"{'maxvol':24s} skipped: certification space too large ({space} subsets)")
                continue
            mv = bounds_mod.bound_maxvol(clean, k, rows, cols, noise, p)
            reports.extend([mv.projection_rank, mv.rank_u])

    for rep in reports:
        alts = " ".join(f"{key}={_fmt6(val)}" for key, val in sorted(rep.alternates.items()))
        print(
            f"{rep.theorem:24s} {'ok' if rep.precondition_ok else 'FAIL':5s} "
            f"{_fmt6(rep.lhs):>12s} {_fmt6(rep.rhs):>12s}  {alts}"
        )
    return 0


def cmd_experiment(args) -> int:
    try:
        cfg = experiments.load_config(args.config)
    except OSError as exc:
        raise _IoFailure(f"cannot read config {args.config}: {exc}") from exc
    if args.seed is not None:
        cfg.seed = args.seed
    if args.trials is not None:
        cfg.trials = args.trials
    cfg.validate()

    results = experiments.run_experiment(cfg)
    os.makedirs(args.out_dir, exist_ok=True)
    csv_path = os.path.join(args.out_dir, "results.csv")
    json_path = os.path.join(args.out_dir, "summary.json")
    try:
        experiments.write_results_csv(results, csv_path)
        experiments.write_summary_json(results, json_path)
    except OSError as exc:
        raise _IoFailure(f"cannot write results: {exc}") from exc

    print(f"wrote {csv_path}")
    print(f"wrote {json_path}")
    for row in experiments.summarize(results):
        print(
            f"{row['variant']:18s} x={row['column_count']:<5d} "
            f"mean={_fmt6(row['mean'])} min={_fmt6(row['min'])} max={_fmt6(row['max'])}"
        )
    return 0


def cmd_counterexample(args) -> int:
    rep = experiments.rank_truncation_counterexample(args.epsilon)
    print(f"epsilon = {_fmt6(rep.epsilon)}")
    print("residual spectrum, middle-block truncation:  "
          + " ".join(_fmt6(s) for s in rep.spectrum_rank_u))
    print("residual spectrum, post-product truncation:  "
          + " ".join(_fmt6(s) for s in rep.spectrum_post_truncated))
    for p in (1.0, 2.0, math.inf):
        print(
            f"p={_norm_tag(p):3s} middle-block={_fmt6(rep.norms_rank_u[p]):>10s} "
            f"post-product={_fmt6(rep.norms_post_truncated[p]):>10s} "
            f"strictly-better={rep.rank_u_strictly_better[p]}"
        )
    print("PASS" if rep.passed else "FAIL")
    return 0 if rep.passed else 3


def cmd_maxvol(args) -> int:
    a = _load(args.matrix)
    k = args.rank
    if linalg.numerical_rank(a) < k:
        raise _PrecondFailure(f"--rank {k} exceeds the numerical rank of the matrix")
    try:
        f = linalg.truncated_svd(a, k)
        rows = maxvol_select(f.W, args.count)
    except ValueError as exc:
        raise _PrecondFailure(str(exc)) from exc
    measured = linalg.schatten_norm(linalg.pinv(f.W[list(rows)]), math.inf)
    t = t_factor(k, a.shape[0], len(rows))
    tf = t_factor_frobenius(k, a.shape[0], len(rows))
    print(f"rows: {','.join(map(str, rows.one_based()))}")
    print(f"spectral growth bound t = {_fmt6(t)} (Frobenius variant {_fmt6(tf)})")
    print(f"measured ||W_k(I,:)^+||_2 = {_fmt6(measured)}")
    print(f"within maxvol bound: {'yes' if measured <= t * (1 + 1e-9) else 'no (heuristic pick)'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="curkit",
        description="Skeleton (CUR) approximations, perturbation bounds, and experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_approx = sub.add_parser("approx", help="build one skeleton approximation")
    p_approx.add_argument("matrix", help="input matrix file (.mtx/.mm or CSV)")
    p_approx.add_argument("--rows", help="1-based row indices, comma separated")
    p_approx.add_argument("--cols", help="1-based column indices, comma separated")
    p_approx.add_argument("--sampler", choices=("uniform", "length", "leverage", "maxvol"))
    p_approx.add_argument("--count", type=int, help="indices per axis when sampling")
    p_approx.add_argument("--seed", type=int, default=0)
    p_approx.add_argument(
        "--variant",
        required=True,
        choices=("plain", "thresholded", "rank_u", "projection", "projection_rank", "post_truncated"),
    )
    p_approx.add_argument("--rank", type=int, help="target rank for rank-enforcing variants")
    p_approx.add_argument("--tau", type=float, help="singular-value threshold")
    p_approx.add_argument("--truth", help="reference matrix for the error sidecar")
    p_approx.add_argument("--out", required=True, help="output matrix file")
    p_approx.set_defaults(func=cmd_approx)

    p_verify = sub.add_parser("verify", help="check the exact-decomposition equivalence")
    p_verify.add_argument("matrix")
    p_verify.add_argument("--rows", required=True)
    p_verify.add_argument("--cols", required=True)
    p_verify.add_argument("--tol", type=float, default=1e-8)
    p_verify.add_argument("--json", action="store_true", help="emit the report as JSON")
    p_verify.set_defaults(func=cmd_verify)

    p_bounds = sub.add_parser("bounds", help="evaluate perturbation bounds on a noisy instance")
    p_bounds.add_argument("matrix", help="observed (noisy) matrix file")
    p_bounds.add_argument("noise", help="noise matrix file; clean = matrix - noise")
    p_bounds.add_argument("--rank", type=int, required=True)
    p_bounds.add_argument("--rows", required=True)
    p_bounds.add_argument("--cols", required=True)
    p_bounds.add_argument("--norm", default="2", help="Schatten index: 1, 2, or inf")
    p_bounds.add_argument("--theorem", default="all", choices=("all",) + _BOUND_IDS)
    p_bounds.add_argument("--tau", type=float, help="threshold (default: spectral noise norm)")
    p_bounds.set_defaults(func=cmd_bounds)

    p_exp = sub.add_parser("experiment", help="run a sampling experiment from a config file")
    p_exp.add_argument("config", help="JSON or TOML experiment config")
    p_exp.add_argument("--out-dir", default=".")
    p_exp.add_argument("--seed", type=int)
    p_exp.add_argument("--trials", type=int)
    p_exp.set_defaults(func=cmd_experiment)

    p_ce = sub.add_parser("counterexample", help="rank-truncation ordering counterexample")
    p_ce.add_argument("--epsilon", type=float, required=True)
    p_ce.set_defaults(func=cmd_counterexample)

    p_mv = sub.add_parser("maxvol", help="greedy large-volume row selection")
    p_mv.add_argument("matrix")
    p_mv.add_argument("--rank", type=int, required=True)
    p_mv.add_argument("--count", type=int, required=True)
    p_mv.set_defaults(func=cmd_maxvol)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _IoFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except _PrecondFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
