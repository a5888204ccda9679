import csv
import hashlib
import json
import math
import struct

import numpy as np
import pytest

from plantmatch import harness
from plantmatch.harness import (
    EXPERIMENT_HEADER,
    MOMENT_HEADER,
    ExperimentConfig,
    Statistic,
    child_seed,
    experiment_row,
    moment_check,
    moment_rows,
    qq_points,
    run_error_experiment,
    run_llr_distribution,
    run_trials,
    signed_count_samples,
    summarize,
    sweep,
    write_results,
)
from plantmatch.inference import Hypothesis, theoretical_error
from plantmatch.models import ModelParams

INF = math.inf
AMBIENT = ModelParams.create(120, 0.3, lam=INF)
AVERAGE = ModelParams.create(120, 0.1, lam=INF, regime="equal-average")


class TestSeeds:
    def test_child_seed_is_hash_of_triple(self):
        digest = hashlib.blake2b(struct.pack("<QQB", 7, 3, 1), digest_size=8).digest()
        assert child_seed(7, 3, "planted") == int.from_bytes(digest, "little")

    def test_distinct_streams(self):
        seeds = {child_seed(1, i, arm) for i in range(500) for arm in ("null", "planted")}
        assert len(seeds) == 1000

    def test_negative_master_seed_wraps(self):
        assert child_seed(-1, 0, "null") == child_seed(2 ** 64 - 1, 0, "null")


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            ExperimentConfig(AMBIENT, trials=0, seed=1)
        with pytest.raises(ValueError):
            ExperimentConfig(AMBIENT, trials=5, seed=1, workers=0)
        with pytest.raises(ValueError):
            ExperimentConfig(AMBIENT, trials=5, seed=1, statistic="median")

    def test_key_ignores_workers(self):
        a = ExperimentConfig(AMBIENT, trials=10, seed=1, workers=1)
        b = ExperimentConfig(AMBIENT, trials=10, seed=1, workers=4)
        c = ExperimentConfig(AMBIENT, trials=10, seed=2)
        assert a.key() == b.key() != c.key()

    def test_m_max_only_for_series(self):
        assert "M_max" not in ExperimentConfig(AMBIENT, 10, 1).to_dict()
        P = ModelParams.create(20, 0.3, zeta=40)
        assert ExperimentConfig(P, 10, 1, "ce-llr", M_max=3).to_dict()["M_max"] == 3

    def test_statistic_parse(self):
        assert Statistic.parse("EdgeTest") is Statistic.EDGE_TEST
        assert Statistic.parse("approx_rhs") is Statistic.APPROX_RHS


class TestTrials:
    @pytest.mark.parametrize("statistic,params", [
        ("edge-test", AMBIENT), ("wedge-test", AVERAGE), ("approx-rhs", AVERAGE),
    ])
    def test_worker_count_does_not_matter(self, statistic, params):
        base = ExperimentConfig(params, trials=37, seed=11, statistic=statistic)
        one = run_trials(base, "planted")
        many = run_trials(ExperimentConfig(params, 37, 11, statistic, workers=3), "planted")
        assert one.tobytes() == many.tobytes()

    def test_counts_worker_invariant(self):
        a = signed_count_samples(AVERAGE, 25, 3, "null", workers=1)
        b = signed_count_samples(AVERAGE, 25, 3, "null", workers=2)
        assert a.shape == (25, 2) and a.tobytes() == b.tobytes()

    def test_prefix_stable(self):
        short = run_trials(ExperimentConfig(AMBIENT, 10, 5, "approx-rhs"), "null")
        long = run_trials(ExperimentConfig(AMBIENT, 30, 5, "approx-rhs"), "null")
        assert np.array_equal(short, long[:10])

    def test_bad_arm(self):
        with pytest.raises(ValueError):
            run_trials(ExperimentConfig(AMBIENT, 3, 1), "other")


class TestErrorExperiment:
    def test_vanishing_noise(self):
        P = ModelParams.create(200, 0.001, lam=INF)
        est = run_error_experiment(ExperimentConfig(P, 200, 1))
        assert est.total < 0.05

    def test_fields(self):
        est = run_error_experiment(ExperimentConfig(AMBIENT, 300, 2))
        assert 0 <= est.type1 <= 1 and 0 <= est.type2 <= 1
        assert est.total == est.type1 + est.type2
        assert est.se_total == pytest.approx(math.sqrt(
            est.type1 * (1 - est.type1) / 300 + est.type2 * (1 - est.type2) / 300))
        assert est.theoretical == theoretical_error(AMBIENT, "edge")

    @pytest.mark.parametrize("params,statistic", [
        (AMBIENT, "wedge-test"), (AVERAGE, "edge-test"), (AMBIENT, "exact-llr"),
    ])
    def test_mismatch(self, params, statistic):
        with pytest.raises(ValueError):
            run_error_experiment(ExperimentConfig(params, 5, 1, statistic))

    def test_theta_ordering_follows_theory(self):
        n = 900
        totals, theory = [], []
        for theta in (0.5, 1.0, 2.0):
            P = ModelParams.create(n, theta / math.sqrt(n), lam=INF, regime="equal-average")
            est = run_error_experiment(ExperimentConfig(P, 500, 3, "wedge-test"))
            totals.append(est.total)
            theory.append(est.theoretical)
        assert theory[0] < theory[1] < theory[2]
        assert totals[0] < totals[1] < totals[2]


class TestDistributions:
    def test_single_trial(self):
        P = ModelParams.create(50, 0.1, lam=INF, regime="equal-average")
        s = run_llr_distribution(ExperimentConfig(P, 1, 4, "approx-rhs"))
        assert s.mean == s.values[0] and s.var is None and not s.var_defined
        assert s.contiguity_z is None

    def test_summary_contiguity(self):
        rng = np.random.default_rng(0)
        good = rng.normal(-0.5, 1.0, 20000)
        bad = rng.normal(0.5, 1.0, 20000)
        P = AMBIENT
        assert abs(summarize(good, P, Hypothesis.NULL).contiguity_z) < 4
        assert abs(summarize(bad, P, Hypothesis.NULL).contiguity_z) > 10
        assert abs(summarize(-good, P, Hypothesis.PLANTED).contiguity_z) < 4

    def test_exact_llr_size_cap(self):
        P = ModelParams.create(40, 0.3, zeta=40)
        with pytest.raises(ValueError):
            run_llr_distribution(ExperimentConfig(P, 3, 1, "exact-llr"))

    def test_rejects_tests(self):
        with pytest.raises(ValueError):
            run_llr_distribution(ExperimentConfig(AMBIENT, 3, 1, "edge-test"))

    def test_exact_llr_small(self):
        P = ModelParams.create(10, 0.3, lam=INF)
        s = run_llr_distribution(ExperimentConfig(P, 50, 1, "exact-llr"), "planted")
        assert s.values.shape == (50,) and np.all(np.isfinite(s.values))
        assert s.predicted_mean == pytest.approx(s.predicted_var / 2)

    def test_average_regime_null_mean(self):
        n = 2500
        P = ModelParams.create(n, 1 / math.sqrt(n), lam=INF, regime="equal-average")
        s = run_llr_distribution(ExperimentConfig(P, 2000, 8, "approx-rhs"))
        assert abs(s.mean - (-1 / 4)) < 3 * s.se_mean
        assert abs(s.contiguity_z) < 3

    def test_qq_points(self):
        x, z = qq_points(np.random.default_rng(1).normal(size=200))
        assert x.shape == z.shape == (200,)
        assert np.all(np.diff(x) > 0) and np.all(np.diff(z) >= 0)
        assert np.corrcoef(x, z)[0, 1] > 0.98


class TestMoments:
    def test_rows_and_z_scores(self):
        P = ModelParams.create(60, 0.1, zeta=2, regime="equal-average")
        rows = moment_check(P, 2000, 9)
        assert len(rows) == 8
        assert {(r.quantity, r.arm) for r in rows} == {
            (q, a) for q in ("mean_edge", "var_edge", "mean_wedge", "var_wedge") for a in ("null", "planted")}
        assert all(abs(r.z) < 4 for r in rows)

    def test_needs_trials(self):
        with pytest.raises(ValueError):
            moment_check(AMBIENT, 50, 1)

    def test_workers(self):
        a = moment_check(AVERAGE, 120, 3, workers=1)
        b = moment_check(AVERAGE, 120, 3, workers=2)
        assert a == b


class TestOutput:
    def test_directory_output(self, tmp_path):
        cfg = ExperimentConfig(AMBIENT, 20, 1)
        rows = [experiment_row(cfg, run_error_experiment(cfg))]
        csv_path, json_path = write_results(rows, EXPERIMENT_HEADER, tmp_path / "out")
        assert csv_path.name.startswith("results-") and csv_path.suffix == ".csv"
        assert csv_path.read_text().splitlines()[0] == ",".join(EXPERIMENT_HEADER)
        data = json.loads(json_path.read_text())
        assert data["header"] == EXPERIMENT_HEADER and len(data["rows"]) == 1

    def test_nan_becomes_null(self, tmp_path):
        P = ModelParams.create(30, 0.1, lam=INF, regime="equal-average")
        rows = moment_rows(P, 100, 1, moment_check(P, 100, 1))
        rows[0]["z"] = math.nan
        _, json_path = write_results(rows, MOMENT_HEADER, tmp_path / "m.csv")
        assert json.loads(json_path.read_text())["rows"][0]["z"] is None

    def test_csv_is_deterministic(self, tmp_path):
        cfg = ExperimentConfig(AVERAGE, 40, 6, "wedge-test")
        a, _ = write_results([experiment_row(cfg, run_error_experiment(cfg))], EXPERIMENT_HEADER, tmp_path / "a.csv")
        b, _ = write_results([experiment_row(cfg, run_error_experiment(cfg))], EXPERIMENT_HEADER, tmp_path / "b.csv")
        assert a.read_bytes() == b.read_bytes()


class TestSweep:
    def test_empty(self):
        with pytest.raises(ValueError):
            sweep([])

    def test_single_cell(self):
        cfg = ExperimentConfig(AMBIENT, 30, 2)
        assert sweep([cfg]) == [experiment_row(cfg, run_error_experiment(cfg))]

    def test_failure_recorded(self):
        good = ExperimentConfig(AMBIENT, 10, 1)
        bad = ExperimentConfig(AMBIENT, 10, 1, "wedge-test")
        rows = sweep([bad, good])
        assert rows[0]["error"].startswith("ValueError") and rows[1]["error"] == ""

    def test_resume(self, tmp_path, monkeypatch):
        out = tmp_path / "sweep.csv"
        grid = [ExperimentConfig(AMBIENT, 10, s) for s in range(3)]
        first = sweep(grid, out)
        text = out.read_text()

        def boom(cfg):
            raise AssertionError("should not recompute")

        monkeypatch.setattr(harness, "run_error_experiment", boom)
        again = sweep(grid, out)
        assert [r["key"] for r in again] == [r["key"] for r in first]
        assert out.read_text() == text
        with open(out, newline="") as fh:
            assert len(list(csv.DictReader(fh))) == 3
