import csv

import numpy as np
import pytest

from rfvimp import DataError, SeedSpec
from rfvimp.experiments import (CvBenchmarkConfig, DatasetSource,
                                MonteCarloConfig, pairwise_from_raw_csv,
                                run_cv_benchmark, run_monte_carlo,
                                run_pairwise_comparison, write_pairwise_csv)

TINY_MC = dict(N_grid=(50,), IR_grid=(2.0,), replicates=2, ntree=15,
               seed=SeedSpec(5))


def read_bytes(path):
    return path.read_bytes()


class TestMonteCarlo:
    def test_deterministic_reports(self, tmp_path):
        cfg = MonteCarloConfig(**TINY_MC)
        run_monte_carlo(cfg, tmp_path / "a")
        run_monte_carlo(cfg, tmp_path / "b")
        for name in ("summary.csv", "importance_quantiles.csv",
                     "raw_importance.csv"):
            assert read_bytes(tmp_path / "a" / name) == \
                read_bytes(tmp_path / "b" / name)

    def test_worker_count_does_not_change_results(self, tmp_path):
        run_monte_carlo(MonteCarloConfig(**TINY_MC, workers=1), tmp_path / "w1")
        run_monte_carlo(MonteCarloConfig(**TINY_MC, workers=2), tmp_path / "w2")
        for name in ("summary.csv", "raw_importance.csv"):
            assert read_bytes(tmp_path / "w1" / name) == \
                read_bytes(tmp_path / "w2" / name)

    def test_raw_audit_trail_complete(self):
        cfg = MonteCarloConfig(N_grid=(50,), IR_grid=(1.0, 2.0), replicates=3,
                               ntree=10, methods=("gini", "perm-auc"),
                               seed=SeedSpec(6))
        report = run_monte_carlo(cfg)
        assert len(report.settings) == 2
        for setting, _, _ in report.settings:
            for method in cfg.methods:
                values = report.raw[(setting, method)]
                assert values.shape == (3, 30)
                counts = report.counts[(setting, method)]
                assert len(counts) == 3 and all(0 <= c <= 5 for c in counts)

    def test_summary_layout(self, tmp_path):
        cfg = MonteCarloConfig(**TINY_MC, methods=("gini",))
        run_monte_carlo(cfg, tmp_path)
        with open(tmp_path / "summary.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        stats = [r["statistic"] for r in rows]
        assert stats[:3] == ["miscls_strong", "miscls_moderate", "miscls_weak"]
        assert sum(s.startswith("mean_vi_x") for s in stats) == 30
        assert all(r["setting"] == "N=50,IR=2" for r in rows)

    def test_from_dict_and_validation(self):
        cfg = MonteCarloConfig.from_dict(
            {"N_grid": [50], "IR_grid": [1], "replicates": 1, "seed": 9,
             "methods": ["gini"]})
        assert cfg.seed == SeedSpec(9)
        assert cfg.N_grid == (50,)
        with pytest.raises(ValueError):
            MonteCarloConfig(methods=("gini", "mystery"))
        with pytest.raises(ValueError):
            MonteCarloConfig(replicates=0)


SIM_SOURCE = DatasetSource(name="sim", generator="simulation", n=120, ir=1.0)


@pytest.fixture(scope="module")
def report():
    cfg = CvBenchmarkConfig(datasets=(SIM_SOURCE,),
                            selectors=("auc", "calle"), folds=3,
                            replicates=2, ntree=15, seed=SeedSpec(7))
    return run_cv_benchmark(cfg)


class TestCvBenchmark:
    def test_replicates_vary_and_summary_is_their_mean(self, report):
        vals = report.cv_auc[("sim", "auc")]
        assert vals.shape == (2,)
        assert vals[0] != vals[1]
        summary = {(name, sel): mean
                   for name, sel, mean, _, _ in report.summary()}
        assert summary[("sim", "auc")] == pytest.approx(vals.mean())

    def test_baseline_candidate_count_fixed_by_recursion(self, report):
        # p=30 -> sizes 30,24,19,15,12,9,7,5,4,3,2
        cand = report.n_candidates[("sim", "calle")]
        np.testing.assert_array_equal(cand, [11.0, 11.0])

    def test_written_reports(self, report, tmp_path):
        report.write(tmp_path)
        with open(tmp_path / "raw_cv_auc.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 4  # 1 dataset x 2 selectors x 2 replicates
        assert set(rows[0]) == {"dataset", "selector", "replicate", "cv_auc",
                                "n_candidates_mean"}
        assert all(0.0 <= float(r["cv_auc"]) <= 1.0 for r in rows)

    def test_csv_source_failure_writes_manifest(self, tmp_path):
        cfg = CvBenchmarkConfig(
            datasets=(DatasetSource(name="gone", csv=str(tmp_path / "gone.csv"),
                                    label="y", positive="1"),),
            selectors=("auc",), folds=2, replicates=1, ntree=5,
            seed=SeedSpec(8))
        with pytest.raises(DataError):
            run_cv_benchmark(cfg, tmp_path / "out")
        assert (tmp_path / "out" / "failure_manifest.json").exists()

    def test_source_validation(self):
        with pytest.raises(ValueError):
            DatasetSource(name="both", generator="twonorm", csv="x.csv")
        with pytest.raises(ValueError):
            DatasetSource(name="neither")
        with pytest.raises(ValueError):
            DatasetSource(name="nolabel", csv="x.csv")

    def test_from_dict(self):
        cfg = CvBenchmarkConfig.from_dict({
            "datasets": [{"name": "twn", "generator": "twonorm", "n": 100}],
            "selectors": ["auc"], "replicates": 1, "seed": 3})
        assert cfg.datasets[0].generator == "twonorm"
        assert cfg.seed == SeedSpec(3)


class TestPairwiseComparison:
    def test_identical_methods_never_win(self):
        vals = np.array([0.8, 0.9, 0.7])
        cv_auc = {("d1", "a"): vals, ("d1", "b"): vals.copy(),
                  ("d2", "a"): vals + 0.05, ("d2", "b"): vals + 0.05}
        rows = run_pairwise_comparison(cv_auc, ["a", "b"], ["d1", "d2"])
        for row in rows:
            assert row["wins"] == 0
            assert row["significant_wins"] == 0
            assert row["overall_p"] == 1.0
            assert not row["overall_significant"]

    def test_win_counting_antisymmetry(self):
        rng = np.random.default_rng(9)
        datasets = [f"d{i}" for i in range(6)]
        cv_auc = {(d, m): rng.random(5) for d in datasets for m in ("a", "b")}
        rows = {(r["row_method"], r["col_method"]): r
                for r in run_pairwise_comparison(cv_auc, ["a", "b"], datasets)}
        ties = sum(cv_auc[(d, "a")].mean() == cv_auc[(d, "b")].mean()
                   for d in datasets)
        assert rows[("a", "b")]["wins"] + rows[("b", "a")]["wins"] + ties == 6

    def test_clear_improvement_detected(self):
        rng = np.random.default_rng(10)
        datasets = [f"d{i}" for i in range(8)]
        cv_auc = {}
        for d in datasets:
            base = 0.7 + 0.1 * rng.random(30)
            cv_auc[(d, "weak")] = base
            cv_auc[(d, "strong")] = base + 0.05
        rows = {(r["row_method"], r["col_method"]): r
                for r in run_pairwise_comparison(cv_auc, ["weak", "strong"],
                                                 datasets)}
        row = rows[("weak", "strong")]
        assert row["wins"] == 8
        assert row["significant_wins"] == 8
        assert row["overall_significant"]

    def test_single_replicate_excluded_from_significance(self):
        cv_auc = {("d1", "a"): np.array([0.5]), ("d1", "b"): np.array([0.9])}
        rows = run_pairwise_comparison(cv_auc, ["a", "b"], ["d1"])
        row = next(r for r in rows if r["col_method"] == "b")
        assert row["wins"] == 1
        assert row["significant_wins"] == 0
        assert row["skipped_datasets"] == 1

    def test_round_trip_through_raw_csv(self, tmp_path):
        cfg = CvBenchmarkConfig(datasets=(SIM_SOURCE,),
                                selectors=("auc", "calle"), folds=3,
                                replicates=3, ntree=10, seed=SeedSpec(11))
        report = run_cv_benchmark(cfg, tmp_path)
        direct = run_pairwise_comparison(
            {k: v for k, v in report.cv_auc.items()}, ["auc", "calle"], ["sim"])
        from_csv = pairwise_from_raw_csv(tmp_path / "raw_cv_auc.csv")
        assert direct == from_csv
        write_pairwise_csv(from_csv, tmp_path / "pairwise.csv")
        with open(tmp_path / "pairwise.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 2

    def test_raw_csv_column_check(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("foo,bar\n1,2\n")
        with pytest.raises(ValueError):
            pairwise_from_raw_csv(bad)
