import dataclasses
import math

import numpy as np
import pytest

import sievenorm as sn
from sievenorm.experiments import (
    ExperimentRow,
    SuiteConfig,
    kernel_gap_scan,
    lambda_l1_bounds,
    large_sieve_trials,
    mangoldt_weighted_sum_row,
    mobius_ramanujan_weighted_sum,
    prime_count_floor_row,
    prime_support_experiments,
    run_suite,
    squarefree_theorem_ratio,
    vaughan_V,
)


def brute_weighted_sum(tables, N, Q):
    total = 0.0
    for q in range(1, Q + 1):
        mq = tables.mobius[q]
        if mq == 0:
            continue
        inner = 0.0
        for n in range(1, N + 1):
            lam = tables.mangoldt[n]
            if lam:
                inner += (N - n) * lam * sn.ramanujan_sum(tables, q, -n)
        total += mq * inner
    return total


class TestWeightedSum:
    def test_matches_brute_force(self, tables):
        for N, Q in [(16, 1), (30, 5), (64, 8), (50, 7)]:
            fast = mobius_ramanujan_weighted_sum(tables, N, Q)
            assert fast == pytest.approx(brute_weighted_sum(tables, N, Q), rel=1e-12)

    def test_q1_is_chebyshev_weighted(self, tables):
        # c_1(n) = 1, so Q = 1 reduces to sum (N - n) Lambda(n)
        lam = tables.mangoldt[:17]
        expected = sum((16 - n) * lam[n] for n in range(1, 17))
        assert mobius_ramanujan_weighted_sum(tables, 16, 1) == pytest.approx(expected)

    def test_validation(self, tables):
        with pytest.raises(ValueError):
            mobius_ramanujan_weighted_sum(tables, 16, 0)
        with pytest.raises(ValueError):
            mobius_ramanujan_weighted_sum(tables, 16, 17)
        with pytest.raises(ValueError):
            mobius_ramanujan_weighted_sum(tables, tables.n_max + 1, 4)


class TestVaughanV:
    @pytest.mark.parametrize("N,Q", [(64, 4), (256, 16)])
    def test_routes_agree_tightly(self, tables, N, Q):
        rep = vaughan_V(tables, N, Q)
        assert rep.routes_agree
        assert rep.v_quadrature == pytest.approx(rep.v_spectral, rel=1e-9, abs=1e-6 * N * N)
        assert rep.target == pytest.approx(3.0 * Q * N * N / math.pi**2)

    def test_default_q(self, tables):
        rep = vaughan_V(tables, 256)
        assert rep.Q == 16

    def test_ratio_tightens_with_n(self, tables_mid):
        small = vaughan_V(tables_mid, 10**3)
        large = vaughan_V(tables_mid, 10**4)
        assert 0.7 <= large.ratio <= 1.3
        assert abs(large.ratio - 1.0) < abs(small.ratio - 1.0)

    def test_crude_magnitude_bound(self, tables):
        # |c_q| <= phi(q) termwise, so |V| <= sum_{q<=Q} phi(q) * sum (N-n) Lambda(n)
        N, Q = 128, 11
        rep = vaughan_V(tables, N, Q)
        lam = tables.mangoldt[: N + 1]
        cheb = float(np.dot(N - np.arange(N + 1), lam))
        crude = float(np.sum(tables.phi[1 : Q + 1])) * cheb
        assert abs(rep.v_spectral) <= crude


class TestKernelGapScan:
    @pytest.mark.parametrize("kind", ["gstar", "h", "h_truncated"])
    def test_invariants_hold_at_1024(self, tables, kind):
        row = kernel_gap_scan(tables, 1024, kind=kind)
        assert row.experiment == "kernel_gap"
        assert row.params["kind"] == kind and row.params["n"] == 1024
        assert row.params["m"] == 8192
        assert row.measured["invariant_ok"] is True
        assert row.passed is True
        assert row.measured["max_gap"] <= row.reference["certified_ceiling"]
        assert row.ratios["gap_over_certified"] <= 1.0
        if kind != "h_truncated":
            assert row.measured["min_kernel_value"] >= row.reference["nonneg_floor"]

    def test_default_p(self, tables):
        assert kernel_gap_scan(tables, 1024, kind="gstar").params["p"] == 5
        assert kernel_gap_scan(tables, 1024, kind="h").params["p"] == 32

    def test_truncation_fields(self, tables):
        row = kernel_gap_scan(tables, 256, kind="h_truncated")
        P = row.params["p"]
        assert row.measured["truncation_gap"] <= 3.5 * P
        assert row.reference["truncation_ceiling"] == 3.0 * P
        assert row.ratios["truncation_over_3p"] <= 3.5 / 3.0

    def test_low_resolution_warning(self, tables):
        with pytest.warns(UserWarning, match="under-resolve"):
            row = kernel_gap_scan(tables, 256, kind="h", M=512)
        assert "under-resolve" in row.detail

    def test_validation(self, tables):
        with pytest.raises(ValueError):
            kernel_gap_scan(tables, 256, kind="fejer")
        with pytest.raises(ValueError):
            kernel_gap_scan(tables, 256, kind="k_part3")


class TestSquarefreeRatio:
    def test_row_shape_and_autocorrelation(self, tables):
        row = squarefree_theorem_ratio(tables, 512, seed=42)
        assert row.experiment == "squarefree_l1"
        assert row.measured["invariant_ok"] is True
        assert row.passed is True
        assert "l1_autocorrelation" in row.measured
        assert row.measured["l1_autocorrelation"] <= row.reference["autocorrelation_bound"]
        assert row.ratios["ratio_mobius"] >= row.reference["empirical_floor"]

    def test_autocorrelation_gated_off_above_512(self, tables):
        row = squarefree_theorem_ratio(tables, 1024)
        assert "l1_autocorrelation" not in row.measured

    def test_odd_n_rejected(self, tables):
        with pytest.raises(ValueError):
            squarefree_theorem_ratio(tables, 15)


class TestPrimeSupport:
    def test_three_variants(self, tables):
        rows = prime_support_experiments(tables, 1024, seed=0)
        assert [r.params["variant"] for r in rows] == [
            "prime_indicator",
            "chi3_on_primes",
            "random_primes",
        ]
        for row in rows:
            assert row.experiment == "prime_l1"
            assert row.ratios["growth_ratio"] >= 0.1
            assert row.passed is True
        chi_row = rows[1]
        assert isinstance(chi_row.measured["chi3_prime_partial_sum"], int)

    def test_validation(self, tables):
        with pytest.raises(ValueError):
            prime_support_experiments(tables, 2)


class TestKernelAnnihilation:
    """The convolution of a kernel with sequences its coefficients avoid is 0.

    With M >= 2N + 1 grid points the discrete mean over beta = j/M picks out
    exactly the frequency-matched terms, so the result is an identity, not an
    approximation.
    """

    @pytest.mark.parametrize("P", [2, 3])
    def test_gstar_annihilates_squarefree_support(self, tables, rng, P):
        N = 64
        M = 2 * N + 2
        spec = sn.KernelSpec("gstar", N, P=P)
        seq = sn.coefficient_sequence(tables, "squarefree_random", N, seed=7)
        s_grid = sn.grid_eval_sequence(seq, M).values
        scale = N * float(np.sum(np.abs(seq.coeffs)))
        for alpha in rng.uniform(0, 1, 10):
            k_vals = np.array(
                [sn.eval_kernel(tables, spec, alpha - j / M) for j in range(M)]
            )
            mean = np.dot(k_vals, s_grid) / M
            assert abs(mean) <= 1e-6 * scale

    def test_h_truncated_annihilates_prime_support(self, tables, rng):
        from sievenorm.experiments import _random_prime_sequence

        N = 64
        M = 2 * N + 2
        spec = sn.KernelSpec("h_truncated", N, P=8)
        seq = _random_prime_sequence(tables, N, seed=11)
        s_grid = sn.grid_eval_sequence(seq, M).values
        scale = N * float(np.sum(np.abs(seq.coeffs)))
        for alpha in rng.uniform(0, 1, 10):
            k_vals = np.array(
                [sn.eval_kernel(tables, spec, alpha - j / M) for j in range(M)]
            )
            mean = np.dot(k_vals, s_grid) / M
            assert abs(mean) <= 1e-6 * scale

    def test_h_does_not_annihilate_small_primes(self, tables, rng):
        # the untruncated kernel keeps its low-frequency band, so the same
        # integral against a prime-supported sequence is decidedly nonzero
        N = 64
        M = 2 * N + 2
        spec = sn.KernelSpec("h", N, P=8)
        seq = sn.coefficient_sequence(tables, "prime_indicator", N)
        s_grid = sn.grid_eval_sequence(seq, M).values
        k_vals = np.array([sn.eval_kernel(tables, spec, -j / M) for j in range(M)])
        mean = np.dot(k_vals, s_grid) / M
        assert abs(mean) > 1e-3


class TestLambdaL1Bounds:
    def test_row_at_1024(self, tables):
        row = lambda_l1_bounds(tables, 1024)
        assert row.experiment == "lambda_l1"
        assert row.params["q"] == 32
        assert row.measured["invariant_ok"] is True
        assert row.passed is True
        assert row.measured["v_spectral"] == pytest.approx(
            mobius_ramanujan_weighted_sum(tables, 1024, 32)
        )
        assert row.measured["l1"] >= row.reference["analytic_lower"]
        assert 0.15 <= row.ratios["l1_over_sqrt_n"]
        assert row.ratios["l1_over_sqrt_nlogn"] <= math.sqrt(0.75)


class TestMangoldtWeightedSum:
    def test_band_at_2_14(self, tables_mid):
        row = mangoldt_weighted_sum_row(tables_mid, 1 << 14)
        assert 0.9 <= row.ratios["sum_over_target"] <= 1.1
        assert row.passed is True

    def test_small_n_records_without_gating(self, tables):
        row = mangoldt_weighted_sum_row(tables, 64)
        assert row.passed is True  # band only applies from 16384
        assert row.ratios["sum_over_target"] > 0

    def test_validation(self, tables):
        with pytest.raises(ValueError):
            mangoldt_weighted_sum_row(tables, 1)


class TestPrimeCountFloor:
    def test_holds_on_tables(self, tables):
        row = prime_count_floor_row(tables)
        assert row.passed is True
        assert row.measured["min_ratio"] > 1.0
        assert 17 <= row.measured["argmin_n"] <= tables.n_max

    def test_validation(self, tables):
        with pytest.raises(ValueError):
            prime_count_floor_row(tables, 16)


class TestLargeSieveTrials:
    def test_small_batch(self, tables):
        row = large_sieve_trials(tables, trials=25, seed=3, max_param=165)
        assert row.experiment == "large_sieve"
        assert row.params == {"trials": 25, "seed": 3, "max_param": 165}
        assert row.measured["max_ratio"] <= 1.0 + 1e-9
        assert row.measured["mean_ratio"] <= row.measured["max_ratio"]
        assert row.passed is True
        assert row.detail.startswith("worst:")

    def test_validation(self, tables):
        with pytest.raises(ValueError):
            large_sieve_trials(tables, trials=0)
        with pytest.raises(ValueError):
            large_sieve_trials(tables, trials=5, max_param=1)


def _strip_runtime(rows):
    return [dataclasses.replace(r, runtime_s=0.0) for r in rows]


class TestRunSuite:
    def test_empty_config(self):
        assert run_suite(SuiteConfig()) == []

    def test_single_experiment(self, tables):
        cfg = SuiteConfig(experiments=(("kernel_gap", {"n": 256, "kind": "gstar"}),))
        rows = run_suite(cfg, tables=tables)
        assert len(rows) == 1
        assert rows[0].experiment == "kernel_gap"
        assert rows[0].params["n"] == 256

    def test_errors_are_rows_not_exceptions(self, tables):
        cfg = SuiteConfig(
            experiments=(
                ("squarefree_l1", {"n": 15}),  # odd: raises inside the thunk
                ("mangoldt_weighted_sum", {"n": 64}),
            )
        )
        rows = run_suite(cfg, tables=tables)
        assert len(rows) == 2
        assert rows[0].passed is False
        assert "ValueError" in rows[0].detail
        assert rows[0].measured["invariant_ok"] is True  # not an invariant failure
        assert rows[1].passed is True

    def test_unknown_experiment_name(self, tables):
        cfg = SuiteConfig(experiments=(("bogus", {}),))
        rows = run_suite(cfg, tables=tables)
        assert len(rows) == 1
        assert rows[0].passed is False
        assert "unknown experiment" in rows[0].detail

    def test_unknown_parameter_is_captured(self, tables):
        cfg = SuiteConfig(experiments=(("kernel_gap", {"n": 64, "zeta": 1}),))
        rows = run_suite(cfg, tables=tables)
        assert len(rows) == 1
        assert rows[0].passed is False
        assert "zeta" in rows[0].detail

    def test_deterministic_modulo_runtime(self, tables):
        cfg = SuiteConfig(
            seed=5,
            experiments=(
                ("kernel_gap", {"n": [64, 128], "kind": "gstar"}),
                ("mangoldt_weighted_sum", {"n": 64}),
                ("large_sieve", {"trials": 5, "max_param": 22}),
            ),
        )
        a = run_suite(cfg, tables=tables)
        b = run_suite(cfg, tables=tables)
        assert _strip_runtime(a) == _strip_runtime(b)

    def test_workers_preserve_order_and_values(self, tables):
        base = (
            ("kernel_gap", {"n": [64, 128], "kind": "h"}),
            ("prime_l1", {"n": 64}),
            ("mangoldt_weighted_sum", {"n": [64, 128]}),
        )
        serial = run_suite(SuiteConfig(experiments=base, workers=1), tables=tables)
        threaded = run_suite(SuiteConfig(experiments=base, workers=2), tables=tables)
        assert _strip_runtime(serial) == _strip_runtime(threaded)

    def test_trend_summary_rows(self, tables):
        cfg = SuiteConfig(
            experiments=(
                ("squarefree_l1", {"n": [64, 128]}),
                ("lambda_kernel_integral", {"n": [64, 128]}),
            )
        )
        rows = run_suite(cfg, tables=tables)
        names = [r.experiment for r in rows]
        assert names.count("squarefree_l1_trend") == 1
        assert names.count("lambda_kernel_integral_trend") == 1
        trend = rows[names.index("squarefree_l1_trend")]
        assert trend.params["n"] == [64, 128]
        assert len(trend.measured["ratios"]) == 2


class TestInvariantViolations:
    def test_reporting(self):
        ok = ExperimentRow("a", {}, {"invariant_ok": True}, {}, {}, True, 0.0)
        bad = ExperimentRow("b", {"n": 4}, {"invariant_ok": False}, {}, {}, False, 0.0, "boom")
        legacy = ExperimentRow("c", {}, {}, {}, {}, True, 0.0)
        out = sn.invariant_violations([ok, bad, legacy])
        assert len(out) == 1
        assert "b" in out[0] and "boom" in out[0]


class TestExperimentRowCoercion:
    def test_numpy_scalars_become_plain(self):
        row = ExperimentRow(
            experiment="x",
            params={"n": np.int64(5)},
            measured={"v": np.float64(1.5), "flag": np.bool_(True)},
            reference={"arr": [np.float64(0.25), np.int64(2)]},
            ratios={},
            passed=np.bool_(True),
            runtime_s=np.float64(0.1),
        )
        assert type(row.params["n"]) is int
        assert type(row.measured["v"]) is float
        assert type(row.measured["flag"]) is bool
        assert [type(v) for v in row.reference["arr"]] == [float, int]
        assert type(row.passed) is bool
        assert type(row.runtime_s) is float
