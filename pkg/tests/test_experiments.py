"""Tests for matrix generators, the counterexample, the truncation-order
checks, and the experiment runner."""

import json
import math

import numpy as np
import pytest

from curkit import linalg
from curkit.experiments import (
    ExperimentConfig,
    config_from_dict,
    gen_decay_spectrum,
    gen_gaussian_kernel,
    gen_hilbert,
    gen_noise,
    gen_spsd_lowrank,
    general_truncation_check,
    load_config,
    nystrom_truncation_check,
    parse_norm,
    rank_truncation_counterexample,
    relative_error,
    run_experiment,
    summarize,
    write_results_csv,
)
from curkit.sampling import spawn_rng, uniform_sample


class TestSpsdLowrank:
    def test_symmetric_and_psd(self):
        a = gen_spsd_lowrank(30, 5, 1)
        np.testing.assert_array_equal(a, a.T)
        eig = np.linalg.eigvalsh(a)
        assert eig.min() >= -1e-12 * eig.max()
        assert np.sum(eig > 1e-10 * eig.max()) == 5

    def test_exact_rank(self):
        assert linalg.numerical_rank(gen_spsd_lowrank(25, 4, 2)) == 4

    def test_quadratic_form_nonnegative(self):
        a = gen_spsd_lowrank(20, 3, 3)
        rng = spawn_rng(99)
        for _ in range(100):
            x = rng.standard_normal(20)
            assert x @ a @ x >= -1e-10 * np.linalg.norm(a) * (x @ x)

    def test_rejects_bad_rank(self):
        with pytest.raises(ValueError):
            gen_spsd_lowrank(5, 6, 0)


class TestNoise:
    def test_spsd_kind_is_psd(self):
        e = gen_noise(40, "spsd", 1e-3, 4)
        eig = np.linalg.eigvalsh(e)
        assert eig.min() >= -1e-12 * max(eig.max(), 1e-30)

    def test_symmetric_kind_exact(self):
        e = gen_noise(40, "symmetric", 1e-3, 5)
        np.testing.assert_array_equal(e, e.T)

    def test_symmetric_entry_variance(self):
        # (H + H^T)/2 halves the off-diagonal variance and keeps the
        # diagonal at sigma^2; checked against those derived values
        sigma = 1e-3
        e = gen_noise(100, "symmetric", sigma, 6)
        off = e[~np.eye(100, dtype=bool)]
        assert np.var(off) == pytest.approx(sigma**2 / 2, rel=0.2)
        assert np.var(np.diag(e)) == pytest.approx(sigma**2, rel=0.5)

    def test_rejects_bad_kind(self):
        with pytest.raises(ValueError):
            gen_noise(10, "sparse", 1e-3, 0)

    def test_rejects_bad_sigma(self):
        with pytest.raises(ValueError):
            gen_noise(10, "spsd", 0.0, 0)


class TestDecaySpectrum:
    def test_exponential_value(self):
        a = gen_decay_spectrum(60, "exp", 0.5, 10, 7)
        s = linalg.singular_values(a)
        assert s[10] == pytest.approx(math.exp(-0.5 * 11), abs=1e-12)

    def test_polynomial_value(self):
        a = gen_decay_spectrum(60, "poly", 2.0, 10, 8)
        s = linalg.singular_values(a)
        assert s[11] == pytest.approx(1.0 / 144.0, abs=1e-12)

    def test_plateau_of_ones(self):
        a = gen_decay_spectrum(40, "exp", 1.0, 10, 9)
        s = linalg.singular_values(a)
        np.testing.assert_allclose(s[:10], 1.0, atol=1e-12)

    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            gen_decay_spectrum(10, "exp", 0.5, 10, 0)
        with pytest.raises(ValueError):
            gen_decay_spectrum(10, "exp", -1.0, 2, 0)
        with pytest.raises(ValueError):
            gen_decay_spectrum(10, "linear", 0.5, 2, 0)


class TestHilbert:
    def test_entries(self):
        h = gen_hilbert(4)
        assert h[0, 0] == 1.0
        assert h[1, 2] == pytest.approx(0.25)
        np.testing.assert_array_equal(h, h.T)

    def test_positive_definite_small(self):
        eig = np.linalg.eigvalsh(gen_hilbert(5))
        assert eig.min() > 0


class TestGaussianKernel:
    def test_unit_diagonal(self):
        b = spawn_rng(10).standard_normal((4, 9))
        k = gen_gaussian_kernel(b)
        np.testing.assert_array_equal(np.diag(k), np.ones(9))

    def test_duplicate_columns(self):
        b = spawn_rng(11).standard_normal((3, 5))
        b[:, 4] = b[:, 1]
        k = gen_gaussian_kernel(b)
        assert k[1, 4] == pytest.approx(1.0)

    def test_psd(self):
        b = spawn_rng(12).standard_normal((4, 10))
        eig = np.linalg.eigvalsh(gen_gaussian_kernel(b))
        assert eig.min() >= -1e-10

    def test_formula(self):
        b = spawn_rng(13).standard_normal((3, 6))
        k = gen_gaussian_kernel(b)
        d = np.linalg.norm(b[:, 0] - b[:, 3]) ** 2
        assert k[0, 3] == pytest.approx(math.exp(-d), rel=1e-12)


class TestRelativeError:
    def test_exact(self):
        a = spawn_rng(14).standard_normal((5, 5))
        assert relative_error(a, a, 2.0) == 0.0

    def test_zero_estimate(self):
        a = spawn_rng(15).standard_normal((5, 5))
        assert relative_error(a, np.zeros_like(a), 2.0) == pytest.approx(1.0)

    def test_homogeneity(self):
        a = spawn_rng(16).standard_normal((6, 4))
        for p in (1.0, 2.0, np.inf):
            assert relative_error(a, a / 2, p) == pytest.approx(0.5)

    def test_zero_matrix_rejected(self):
        with pytest.raises(ValueError):
            relative_error(np.zeros((2, 2)), np.zeros((2, 2)), 2.0)


class TestCounterexample:
    def test_reference_values_at_half(self):
        rep = rank_truncation_counterexample(0.5)
        np.testing.assert_allclose(rep.spectrum_post_truncated, (200.0, 1.5, 0.0), atol=1e-10)
        np.testing.assert_allclose(
            rep.spectrum_rank_u, (100.9806, 1.9806, 0.0), atol=1e-3
        )
        for p in (1.0, 2.0, np.inf):
            assert 100.0 <= rep.norms_rank_u[p] <= 103.0
            assert 200.0 <= rep.norms_post_truncated[p] <= 202.0
        assert rep.passed

    @pytest.mark.parametrize("eps", [0.1, 0.25, 0.5, 0.75, 0.9])
    def test_grid(self, eps):
        rep = rank_truncation_counterexample(eps)
        assert rep.passed
        assert rep.spectrum_post_truncated[1] == pytest.approx(1.0 + eps, abs=1e-10)

    def test_rejects_out_of_range(self):
        for eps in (0.0, 1.0, -0.5, 2.0):
            with pytest.raises(ValueError):
                rank_truncation_counterexample(eps)


class TestTruncationOrder:
    def test_exact_rank_both_zero(self):
        a = gen_spsd_lowrank(20, 4, 21)
        cols = uniform_sample(20, 8, 22)
        rep = nystrom_truncation_check(a, cols, 4)
        assert rep.nuclear_error_post_truncated <= 1e-8 * linalg.schatten_norm(a, 1)
        assert rep.post_no_worse

    def test_spsd_instance_holds(self):
        a = gen_spsd_lowrank(40, 6, 23)
        noisy = a + gen_noise(40, "spsd", 1e-3, 24)
        for seed in range(5):
            cols = uniform_sample(40, 12, 100 + seed)
            rep = nystrom_truncation_check(noisy, cols, 6)
            assert rep.post_no_worse

    def test_general_analogue_fails_on_indefinite_matrix(self):
        eps = 0.5
        a = np.array([[-1.0, 0.0, 10.0], [0.0, 1.0 + eps, 0.0], [10.0, 0.0, 100.0]])
        rep = general_truncation_check(a, [0, 1], [0, 1], 1)
        assert not rep.post_no_worse

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            nystrom_truncation_check(np.array([[1.0, 2.0], [0.0, 1.0]]), [0], 1)


def _tiny_config(**overrides):
    base = dict(
        generator="spsd_lowrank",
        size=24,
        rank=3,
        column_counts=(3, 8),
        trials=2,
        sampler="uniform",
        noise="spsd",
        sigma=1e-3,
        norm=1.0,
        seed=7,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


class TestRunExperiment:
    def test_zero_noise_exact_recovery(self):
        cfg = _tiny_config(noise="none", sampler="maxvol", column_counts=(4, 6))
        results = run_experiment(cfg)
        for r in results:
            assert r.relative_error <= 1e-8

    def test_baseline_matches_spectrum_ratio(self):
        cfg = ExperimentConfig(
            generator="hilbert",
            size=20,
            rank=4,
            column_counts=(6,),
            trials=1,
            sampler="maxvol",
            noise="none",
            norm=math.inf,
            seed=1,
        )
        results = run_experiment(cfg)
        s = linalg.singular_values(gen_hilbert(20))
        baseline = [r for r in results if r.variant == "svd_baseline"][0]
        assert baseline.relative_error == pytest.approx(s[4] / s[0], rel=1e-10)

    def test_byte_identical_reruns(self, tmp_path):
        cfg = _tiny_config()
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_results_csv(run_experiment(cfg), p1)
        write_results_csv(run_experiment(_tiny_config()), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_summary_shape(self):
        results = run_experiment(_tiny_config())
        rows = summarize(results)
        variants = {r["variant"] for r in rows}
        assert variants == {"post_truncated", "rank_u", "projection_rank", "svd_baseline"}
        counts = {r["column_count"] for r in rows}
        assert counts == {3, 8}
        for row in rows:
            assert row["min"] <= row["mean"] <= row["max"]

    def test_bound_columns_populated_when_requested(self):
        cfg = _tiny_config(compute_bounds=True, column_counts=(8,))
        results = run_experiment(cfg)
        rank_u_rows = [r for r in results if r.variant == "rank_u"]
        assert all(r.bound_rhs is not None for r in rank_u_rows)
        assert all(
            r.relative_error <= r.bound_rhs * (1 + 1e-8)
            for r in rank_u_rows
            if r.precondition_ok
        )

    def test_decay_generator_uses_independent_row_sampling(self):
        # non-symmetric generators draw rows and columns separately; with a
        # sharply decaying spectrum the errors still shrink with more samples
        cfg = ExperimentConfig(
            generator="decay_exp",
            size=80,
            rank=10,
            decay_c=0.5,
            plateau=10,
            column_counts=(12, 40),
            trials=3,
            sampler="uniform",
            noise="none",
            norm=math.inf,
            seed=5,
        )
        assert not cfg.resolved_symmetric()
        rows = summarize(run_experiment(cfg))
        by_key = {(r["variant"], r["column_count"]): r["mean"] for r in rows}
        for v in ("post_truncated", "rank_u", "projection_rank"):
            assert by_key[(v, 40)] <= by_key[(v, 12)]
        # baseline equals the first dropped singular value over sigma_1
        assert by_key[("svd_baseline", 12)] == pytest.approx(math.exp(-0.5 * 11), rel=1e-6)

    def test_rank_limited_variants_never_beat_truncated_svd_of_observed(self):
        # every rank-k recombination is a rank-<=k matrix, so its distance
        # to the observed matrix is at least the truncated-SVD distance, in
        # any unitarily invariant norm (per trial, not just on average)
        from curkit.cur import CurVariant, approximate, extract_cur
        from curkit.experiments import gen_spsd_lowrank
        from curkit.linalg import rank_truncate, schatten_norm

        rng = spawn_rng(31)
        k = 5
        a = gen_spsd_lowrank(50, k, 31)
        noisy = a + gen_noise(50, "spsd", 1e-3, 32)
        best = rank_truncate(noisy, k)
        for trial in range(10):
            cols = uniform_sample(50, 12, 300 + trial)
            f = extract_cur(noisy, cols, cols)
            for variant in (
                CurVariant.post_truncated(k),
                CurVariant.rank_u(k),
                CurVariant.projection_rank(k),
            ):
                approx = approximate(f, variant, noisy)
                for p in (1.0, 2.0, np.inf):
                    assert schatten_norm(noisy - best, p) <= schatten_norm(
                        noisy - approx, p
                    ) * (1 + 1e-10)

    def test_validation_runs_before_trials(self):
        with pytest.raises(ValueError):
            _tiny_config(column_counts=(2,)).validate()  # below rank
        with pytest.raises(ValueError):
            _tiny_config(trials=0).validate()
        with pytest.raises(ValueError):
            _tiny_config(sampler="sobol").validate()


class TestConfigParsing:
    def test_norm_spellings(self):
        assert parse_norm("inf") == math.inf
        assert parse_norm("nuclear") == 1.0
        assert parse_norm(2) == 2.0
        with pytest.raises(ValueError):
            parse_norm("0.3")

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError, match="unknown config key"):
            config_from_dict({"generator": "hilbert", "size": 5, "rank": 2,
                              "column_counts": [2], "trials": 1, "colour": "red"})

    def test_missing_key_rejected(self):
        with pytest.raises(ValueError, match="missing required"):
            config_from_dict({"generator": "hilbert"})

    def test_wrong_type_rejected(self):
        with pytest.raises(ValueError, match="wrong type"):
            config_from_dict({"generator": "hilbert", "size": "big", "rank": 2,
                              "column_counts": [2], "trials": 1})

    def test_json_round_trip(self, tmp_path):
        raw = {
            "generator": "spsd_lowrank",
            "size": 16,
            "rank": 2,
            "column_counts": [2, 4],
            "trials": 1,
            "noise": "spsd",
            "sigma": 1e-4,
            "norm": "inf",
            "seed": 3,
        }
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(raw))
        cfg = load_config(path)
        assert cfg.norm == math.inf
        assert cfg.column_counts == (2, 4)

    def test_toml_round_trip(self, tmp_path):
        path = tmp_path / "cfg.toml"
        path.write_text(
            'generator = "hilbert"\nsize = 12\nrank = 2\n'
            "column_counts = [2, 4]\ntrials = 1\nnoise = \"none\"\n"
        )
        cfg = load_config(path)
        assert cfg.generator == "hilbert"
        assert cfg.resolved_symmetric()

    def test_shipped_configs_are_valid(self):
        from pathlib import Path

        config_dir = Path(__file__).resolve().parent.parent / "configs"
        paths = sorted(config_dir.iterdir())
        assert len(paths) >= 3
        for path in paths:
            load_config(path).validate()
