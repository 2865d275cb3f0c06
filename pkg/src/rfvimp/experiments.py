"""Experiment harness: Monte Carlo importance study, cross-validated AUC
benchmark, pairwise method comparison, and report serialization.

All runs are deterministic in (config, master seed) and independent of the
worker count: each work unit derives its own seed and aggregation only
uses key-sorted merges.
"""

from __future__ import annotations

import csv
import json
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataset import Dataset, load_csv, stratified_kfold
from .forest import ForestConfig, fit_forest
from .importance import METHODS, measure_importance_many
from .metrics import auc
from .rng import TAG_EXPERIMENT, SeedSpec
from .selection import SELECTORS, run_selector
from .stats import rank_and_classify, wilcoxon_signed_rank
from .synth import BenchmarkSpec, SimulationConfig, gen_benchmark, gen_simulation

_SELECTOR_EVAL_SAMPLING = {
    "auc": "none", "auc-under": "under", "auc-over": "over",
    "diaz-uri": "none", "calle": "none",
}


def _fmt(x) -> str:
    """Stable float formatting for byte-identical report files."""
    if isinstance(x, float):
        return repr(float(x))  # plain-float repr even for numpy scalars
    return str(x)


# ---------------------------------------------------------------------------
# Monte Carlo study (importance misclassification)

@dataclass(frozen=True)
class MonteCarloConfig:
    N_grid: tuple = (50, 100, 250, 500)
    IR_grid: tuple = (1.0, 2.0, 10.0, 20.0)
    replicates: int = 100
    methods: tuple = METHODS
    ntree: int = 200
    mtry: int | None = None
    min_leaf_size: int = 1
    u: float = 2.0
    seed: SeedSpec = field(default_factory=lambda: SeedSpec(0))
    workers: int = 1

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if not self.N_grid or not self.IR_grid:
            raise ValueError("N_grid and IR_grid must be nonempty")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods: {sorted(unknown)}")

    def forest_config(self) -> ForestConfig:
        return ForestConfig(ntree=self.ntree, mtry=self.mtry,
                            min_leaf_size=self.min_leaf_size)

    @classmethod
    def from_dict(cls, data: dict) -> "MonteCarloConfig":
        data = dict(data)
        if "seed" in data:
            data["seed"] = SeedSpec(int(data["seed"]))
        for key in ("N_grid", "IR_grid", "methods"):
            if key in data:
                data[key] = tuple(data[key])
        return cls(**data)


@dataclass(frozen=True)
class MonteCarloReport:
    config: MonteCarloConfig
    #: (setting, method) -> (replicates, p) importance values
    raw: dict
    #: (setting, method) -> (strong, moderate, weak) miscounts
    counts: dict
    settings: tuple  # ordered (setting, N, IR)

    def write(self, out_dir) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        cfg = self.config
        with open(out / "summary.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["setting", "method", "statistic", "value", "stderr"])
            for setting, _, _ in self.settings:
                for method in cfg.methods:
                    s, m, w = self.counts[(setting, method)]
                    for stat, v in (("miscls_strong", s), ("miscls_moderate", m),
                                    ("miscls_weak", w)):
                        writer.writerow([setting, method, stat, v, ""])
                    values = self.raw[(setting, method)]
                    means = values.mean(axis=0)
                    stderr = values.std(axis=0, ddof=1) / np.sqrt(values.shape[0]) \
                        if values.shape[0] > 1 else np.zeros(values.shape[1])
                    for j in range(values.shape[1]):
                        writer.writerow([setting, method, f"mean_vi_x{j + 1}",
                                         _fmt(float(means[j])),
                                         _fmt(float(stderr[j]))])
        with open(out / "importance_quantiles.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["setting", "method", "variable",
                             "q0", "q25", "q50", "q75", "q100"])
            for setting, _, _ in self.settings:
                for method in cfg.methods:
                    values = self.raw[(setting, method)]
                    qs = np.quantile(values, [0.0, 0.25, 0.5, 0.75, 1.0], axis=0)
                    for j in range(values.shape[1]):
                        writer.writerow([setting, method, f"x{j + 1}",
                                         *(_fmt(float(qs[q, j])) for q in range(5))])
        with open(out / "raw_importance.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["setting", "method", "replicate", "variable", "value"])
            for setting, _, _ in self.settings:
                for method in cfg.methods:
                    values = self.raw[(setting, method)]
                    for rep in range(values.shape[0]):
                        for j in range(values.shape[1]):
                            writer.writerow([setting, method, rep, f"x{j + 1}",
                                             _fmt(float(values[rep, j]))])


def _mc_setting(N, IR) -> str:
    return f"N={N},IR={IR:g}"


def _mc_task(args):
    config, cell_idx, N, IR, rep = args
    sim = SimulationConfig(N=N, IR=IR)
    data_seed = config.seed.child(TAG_EXPERIMENT, 0, cell_idx, rep)
    method_seed = config.seed.child(TAG_EXPERIMENT, 1, cell_idx, rep)
    dataset = gen_simulation(sim, data_seed)
    reports = measure_importance_many(dataset, config.methods,
                                      config.forest_config(), method_seed,
                                      u=config.u)
    return (cell_idx, rep), {m: reports[m].values for m in config.methods}


def run_monte_carlo(config: MonteCarloConfig, out_dir=None) -> MonteCarloReport:
    """Replicated importance measurement over the (N, IR) grid, with
    rank-band misclassification counts per method."""
    cells = [(N, IR) for N in config.N_grid for IR in config.IR_grid]
    tasks = [(config, c, N, IR, rep)
             for c, (N, IR) in enumerate(cells)
             for rep in range(config.replicates)]
    results = _run_tasks(_mc_task, tasks, config.workers, out_dir)

    p = SimulationConfig(N=cells[0][0], IR=cells[0][1]).p
    raw, counts = {}, {}
    settings = tuple((_mc_setting(N, IR), N, IR) for N, IR in cells)
    for c, (N, IR) in enumerate(cells):
        setting = _mc_setting(N, IR)
        for method in config.methods:
            values = np.vstack([results[(c, rep)][method]
                                for rep in range(config.replicates)])
            assert values.shape == (config.replicates, p)
            raw[(setting, method)] = values
            counts[(setting, method)] = rank_and_classify(values.mean(axis=0))
    report = MonteCarloReport(config, raw, counts, settings)
    if out_dir is not None:
        report.write(out_dir)
    return report


# ---------------------------------------------------------------------------
# CV-AUC benchmark

@dataclass(frozen=True)
class DatasetSource:
    """One benchmark input: a generator spec or a CSV file."""

    name: str
    generator: str | None = None  # ringnorm | twonorm | threenorm | circle | simulation
    n: int = 1000
    d: int = 10
    ir: float = 1.0  # simulation generator only
    radius: float | None = None  # circle only
    csv: str | None = None
    label: str | None = None
    positive: str | None = None
    encoding: str = "one-hot"

    def __post_init__(self):
        if (self.generator is None) == (self.csv is None):
            raise ValueError(f"dataset {self.name!r}: give exactly one of "
                             "'generator' or 'csv'")
        if self.csv is not None and (self.label is None or self.positive is None):
            raise ValueError(f"dataset {self.name!r}: csv sources need "
                             "'label' and 'positive'")

    def materialize(self, seed: SeedSpec) -> Dataset:
        if self.csv is not None:
            return load_csv(self.csv, self.label, str(self.positive),
                            self.encoding)
        if self.generator == "simulation":
            return gen_simulation(SimulationConfig(N=self.n, IR=self.ir), seed)
        return gen_benchmark(BenchmarkSpec(self.generator, self.n, self.d,
                                           self.radius), seed)


@dataclass(frozen=True)
class CvBenchmarkConfig:
    datasets: tuple  # of DatasetSource
    selectors: tuple = SELECTORS
    folds: int = 5
    replicates: int = 50
    ntree: int = 200
    mtry: int | None = None
    min_leaf_size: int = 1
    u: float = 2.0
    seed: SeedSpec = field(default_factory=lambda: SeedSpec(0))
    workers: int = 1

    def __post_init__(self):
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if not self.datasets:
            raise ValueError("at least one dataset source is required")
        unknown = set(self.selectors) - set(SELECTORS)
        if unknown:
            raise ValueError(f"unknown selectors: {sorted(unknown)}")

    def forest_config(self) -> ForestConfig:
        return ForestConfig(ntree=self.ntree, mtry=self.mtry,
                            min_leaf_size=self.min_leaf_size)

    @classmethod
    def from_dict(cls, data: dict) -> "CvBenchmarkConfig":
        data = dict(data)
        if "seed" in data:
            data["seed"] = SeedSpec(int(data["seed"]))
        if "selectors" in data:
            data["selectors"] = tuple(data["selectors"])
        data["datasets"] = tuple(
            src if isinstance(src, DatasetSource) else DatasetSource(**src)
            for src in data["datasets"]
        )
        return cls(**data)


@dataclass(frozen=True)
class CvBenchmarkReport:
    config: CvBenchmarkConfig
    #: (dataset_name, selector) -> (replicates,) CV-AUC values
    cv_auc: dict
    #: (dataset_name, selector) -> (replicates,) mean n_candidates per fold
    n_candidates: dict

    def summary(self):
        rows = []
        for src in self.config.datasets:
            for sel in self.config.selectors:
                vals = self.cv_auc[(src.name, sel)]
                cand = self.n_candidates[(src.name, sel)]
                sd = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
                rows.append((src.name, sel, float(vals.mean()), sd,
                             float(cand.mean())))
        return rows

    def write(self, out_dir) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "summary.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["setting", "method", "statistic", "value", "stderr"])
            for name, sel, mean, sd, cand in self.summary():
                n = self.config.replicates
                writer.writerow([name, sel, "cv_auc_mean", _fmt(mean),
                                 _fmt(sd / np.sqrt(n) if n > 1 else 0.0)])
                writer.writerow([name, sel, "cv_auc_sd", _fmt(sd), ""])
                writer.writerow([name, sel, "n_candidates_mean", _fmt(cand), ""])
        with open(out / "raw_cv_auc.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["dataset", "selector", "replicate", "cv_auc",
                             "n_candidates_mean"])
            for src in self.config.datasets:
                for sel in self.config.selectors:
                    vals = self.cv_auc[(src.name, sel)]
                    cand = self.n_candidates[(src.name, sel)]
                    for rep in range(vals.size):
                        writer.writerow([src.name, sel, rep,
                                         _fmt(float(vals[rep])),
                                         _fmt(float(cand[rep]))])


def _cv_task(args):
    config, d_idx, rep = args
    src = config.datasets[d_idx]
    base_seed = config.seed.child(TAG_EXPERIMENT, 2, d_idx, rep)
    dataset = src.materialize(base_seed.child(0))
    folds = stratified_kfold(dataset, config.folds, base_seed.child(1))
    forest_cfg = config.forest_config()

    fold_auc = {sel: [] for sel in config.selectors}
    fold_cand = {sel: [] for sel in config.selectors}
    for f in range(1, config.folds + 1):
        train = dataset.subset(folds.train_rows(f))
        test_rows = folds.test_rows(f)
        for s_idx, sel in enumerate(config.selectors):
            sel_seed = base_seed.child(2, f, s_idx)
            result = run_selector(train, sel, forest_cfg, sel_seed, u=config.u)
            chosen = result.selected.variables
            eval_cfg = ForestConfig(
                ntree=config.ntree, mtry=config.mtry,
                min_leaf_size=config.min_leaf_size,
                sampling=_SELECTOR_EVAL_SAMPLING[sel],
                seed=base_seed.child(3, f, s_idx),
            )
            eval_forest = fit_forest(train.restrict(chosen), eval_cfg)
            test_X = np.ascontiguousarray(dataset.features[test_rows][:, list(chosen)])
            scores = eval_forest.predict_proba(test_X)
            fold_auc[sel].append(auc(scores, dataset.labels[test_rows]))
            fold_cand[sel].append(result.n_candidates)
    return (d_idx, rep), {
        sel: (float(np.mean(fold_auc[sel])), float(np.mean(fold_cand[sel])))
        for sel in config.selectors
    }


def run_cv_benchmark(config: CvBenchmarkConfig, out_dir=None) -> CvBenchmarkReport:
    """Per replicate: stratified folds, per-fold selector runs on the
    training portion, held-out AUC of a forest restricted to the selected
    variables (sampling mode matching the selector)."""
    tasks = [(config, d, rep)
             for d in range(len(config.datasets))
             for rep in range(config.replicates)]
    results = _run_tasks(_cv_task, tasks, config.workers, out_dir)

    cv_auc, n_candidates = {}, {}
    for d, src in enumerate(config.datasets):
        for sel in config.selectors:
            pairs = [results[(d, rep)][sel] for rep in range(config.replicates)]
            cv_auc[(src.name, sel)] = np.array([p[0] for p in pairs])
            n_candidates[(src.name, sel)] = np.array([p[1] for p in pairs])
    report = CvBenchmarkReport(config, cv_auc, n_candidates)
    if out_dir is not None:
        report.write(out_dir)
    return report


# ---------------------------------------------------------------------------
# Pairwise comparison (a(b) tables)

def run_pairwise_comparison(cv_auc: dict, methods, datasets,
                            alpha: float = 0.05, min_replicates: int = 2):
    """For each ordered (row, col) method pair: ``a`` datasets where col's
    mean CV-AUC strictly exceeds row's, ``b`` of those with one-sided
    Wilcoxon p < alpha over per-replicate values, plus an overall
    two-sided Wilcoxon over per-dataset means.

    ``cv_auc`` maps (dataset, method) to per-replicate value arrays.
    Datasets with fewer than ``min_replicates`` values are excluded
    from ``b`` (flagged via the returned ``skipped`` count).
    """
    rows = []
    for row_m in methods:
        for col_m in methods:
            if row_m == col_m:
                continue
            wins = sig_wins = skipped = 0
            row_means, col_means = [], []
            for ds in datasets:
                rv = np.asarray(cv_auc[(ds, row_m)], dtype=np.float64)
                cv = np.asarray(cv_auc[(ds, col_m)], dtype=np.float64)
                row_means.append(rv.mean())
                col_means.append(cv.mean())
                if cv.mean() > rv.mean():
                    wins += 1
                    if rv.size < min_replicates:
                        skipped += 1
                    elif wilcoxon_signed_rank(cv, rv, "greater").p_value < alpha:
                        sig_wins += 1
            overall = wilcoxon_signed_rank(np.array(col_means),
                                           np.array(row_means), "two-sided")
            rows.append({
                "row_method": row_m, "col_method": col_m,
                "wins": wins, "significant_wins": sig_wins,
                "skipped_datasets": skipped,
                "overall_p": overall.p_value,
                "overall_significant": overall.p_value < alpha,
            })
    return rows


def pairwise_from_raw_csv(path, alpha: float = 0.05):
    """Run the pairwise comparison from a raw_cv_auc.csv report file."""
    per_pair: dict = {}
    datasets, methods = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"dataset", "selector", "replicate", "cv_auc"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise ValueError(f"{path}: expected columns {sorted(required)}")
        for row in reader:
            key = (row["dataset"], row["selector"])
            per_pair.setdefault(key, []).append(float(row["cv_auc"]))
            if row["dataset"] not in datasets:
                datasets.append(row["dataset"])
            if row["selector"] not in methods:
                methods.append(row["selector"])
    cv_auc = {k: np.array(v) for k, v in per_pair.items()}
    return run_pairwise_comparison(cv_auc, methods, datasets, alpha)


def write_pairwise_csv(rows, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=[
            "row_method", "col_method", "wins", "significant_wins",
            "skipped_datasets", "overall_p", "overall_significant"])
        writer.writeheader()
        for row in rows:
            out = dict(row)
            out["overall_p"] = _fmt(float(row["overall_p"]))
            writer.writerow(out)


# ---------------------------------------------------------------------------
# worker pool

def _run_tasks(fn, tasks, workers: int, out_dir=None) -> dict:
    """Execute tasks (each returning (key, value)) and collect into a dict.

    On failure, completed results are flushed to a failure manifest in
    ``out_dir`` (when given) before the error propagates.
    """
    results = {}
    try:
        if workers <= 1:
            for task in tasks:
                key, value = fn(task)
                results[key] = value
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for key, value in pool.map(fn, tasks, chunksize=1):
                    results[key] = value
    except Exception as exc:
        if out_dir is not None:
            out = Path(out_dir)
            out.mkdir(parents=True, exist_ok=True)
            manifest = {
                "error": repr(exc),
                "traceback": traceback.format_exc(),
                "completed_tasks": sorted(map(list, results)),
                "total_tasks": len(tasks),
            }
            with open(out / "failure_manifest.json", "w") as fh:
                json.dump(manifest, fh, indent=2)
        raise
    return results
