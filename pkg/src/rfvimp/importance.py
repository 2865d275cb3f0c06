"""The five variable-importance measures and their confidence intervals.

Methods (canonical names match the CLI):

- ``gini``: mean over trees of the summed Gini impurity decrease at nodes
  splitting on the variable; no permutation, degenerate CI.
- ``perm-accu``: OOB accuracy drop under within-OOB permutation.
- ``perm-auc``: OOB-AUC drop; trees whose OOB sample holds a single class
  are skipped and excluded from the divisor.
- ``perm-auc-under`` / ``perm-auc-over``: perm-auc on a forest trained
  with under-/over-sampling; permutation happens on OOB original rows.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .dataset import Dataset
from .forest import Forest, ForestConfig, fit_forest
from .metrics import accuracy, auc
from .rng import TAG_PERMUTATION, SeedSpec

GINI = "gini"
PERM_ACCU = "perm-accu"
PERM_AUC = "perm-auc"
PERM_AUC_UNDER = "perm-auc-under"
PERM_AUC_OVER = "perm-auc-over"

#: method -> required forest sampling mode
METHOD_SAMPLING = {
    GINI: "none",
    PERM_ACCU: "none",
    PERM_AUC: "none",
    PERM_AUC_UNDER: "under",
    PERM_AUC_OVER: "over",
}
METHODS = tuple(METHOD_SAMPLING)

#: metric used by each permutation method
_METHOD_METRIC = {PERM_ACCU: "accuracy", PERM_AUC: "auc",
                  PERM_AUC_UNDER: "auc", PERM_AUC_OVER: "auc"}


@dataclass(frozen=True)
class ImportanceRecord:
    variable: int
    name: str
    value: float
    per_tree_diffs: np.ndarray  # length-ntree; NaN where the tree was skipped
    ci_lower: float
    ci_upper: float
    skipped_trees: int
    ci_degenerate: bool = False


@dataclass(frozen=True)
class ImportanceReport:
    method: str
    records: tuple[ImportanceRecord, ...]
    forest_config: ForestConfig
    u: float = 2.0

    @property
    def values(self) -> np.ndarray:
        return np.array([r.value for r in self.records])

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["variable", "name", "method", "value",
                             "ci_lower", "ci_upper", "skipped_trees"])
            for r in self.records:
                writer.writerow([r.variable, r.name, self.method,
                                 repr(r.value), repr(r.ci_lower),
                                 repr(r.ci_upper), r.skipped_trees])


def importance_interval(per_tree_diffs: np.ndarray, u: float,
                        ntree_retained: int):
    """mean(diffs) +/- u * sd(diffs) / sqrt(ntree_retained).

    ``sd`` is the sample standard deviation over retained trees. Fewer
    than 2 retained trees gives the degenerate interval [value, value].
    Returns (lower, upper, degenerate).
    """
    diffs = np.asarray(per_tree_diffs, dtype=np.float64)
    diffs = diffs[~np.isnan(diffs)]
    if diffs.size == 0:
        return math.nan, math.nan, True
    value = float(diffs.mean())
    if ntree_retained < 2:
        return value, value, True
    half = u * float(diffs.std(ddof=1)) / math.sqrt(ntree_retained)
    return value - half, value + half, False


def gini_importance(forest: Forest, feature_names=None, u: float = 2.0) -> ImportanceReport:
    """Average over trees of per-variable summed impurity decreases."""
    names = feature_names or tuple(f"x{j + 1}" for j in range(forest.p))
    totals = np.zeros(forest.p)
    for tree in forest.trees:
        feat, dec = tree.nodes[0], tree.nodes[6]
        internal = feat >= 0
        np.add.at(totals, feat[internal], dec[internal])
    values = totals / len(forest.trees)
    records = tuple(
        ImportanceRecord(j, names[j], float(values[j]), np.empty(0),
                         float(values[j]), float(values[j]), 0,
                         ci_degenerate=True)
        for j in range(forest.p)
    )
    return ImportanceReport(GINI, records, forest.config, u)


def permutation_importance(forest: Forest, dataset: Dataset, metric: str,
                           seed: SeedSpec, u: float = 2.0,
                           feature_names=None) -> ImportanceReport:
    """Per-tree OOB metric drop when one variable is permuted within the
    OOB rows; one permutation per (tree, variable), each on its own
    derived RNG stream."""
    diffs, skipped = _permutation_pass(forest, dataset, (metric,), seed)
    return _build_report(_metric_method(metric, forest.config.sampling),
                         diffs[metric], skipped[metric], forest.config, u,
                         feature_names or dataset.feature_names)


def measure_importance(dataset: Dataset, method: str, config: ForestConfig,
                       seed: SeedSpec, u: float = 2.0) -> ImportanceReport:
    """Train the forest the method requires and compute its importance.

    ``config.sampling`` and ``config.seed`` are replaced by the method's
    required mode and the given seed, so a single config works for all
    five methods.
    """
    return measure_importance_many(dataset, (method,), config, seed, u)[method]


def measure_importance_many(dataset: Dataset, methods, config: ForestConfig,
                            seed: SeedSpec, u: float = 2.0) -> dict:
    """Compute several methods at once, sharing forests between methods
    with the same sampling mode (result identical to calling
    measure_importance per method)."""
    for m in methods:
        if m not in METHOD_SAMPLING:
            raise ValueError(f"unknown importance method {m!r}")
    reports: dict[str, ImportanceReport] = {}
    by_mode: dict[str, list[str]] = {}
    for m in methods:
        by_mode.setdefault(METHOD_SAMPLING[m], []).append(m)
    for mode, mode_methods in by_mode.items():
        forest = fit_forest(dataset, replace(config, sampling=mode, seed=seed))
        perm_methods = [m for m in mode_methods if m != GINI]
        if GINI in mode_methods:
            reports[GINI] = gini_importance(forest, dataset.feature_names, u)
        if perm_methods:
            metrics = tuple(sorted({_METHOD_METRIC[m] for m in perm_methods}))
            diffs, skipped = _permutation_pass(forest, dataset, metrics, seed)
            for m in perm_methods:
                metric = _METHOD_METRIC[m]
                reports[m] = _build_report(m, diffs[metric], skipped[metric],
                                           forest.config, u,
                                           dataset.feature_names)
    return reports


def _metric_method(metric: str, sampling: str) -> str:
    if metric == "accuracy":
        return PERM_ACCU
    return {"none": PERM_AUC, "under": PERM_AUC_UNDER,
            "over": PERM_AUC_OVER}[sampling]


def _metric_eval(metric: str, scores, labels) -> float:
    return auc(scores, labels) if metric == "auc" else accuracy(scores, labels)


def _permutation_pass(forest: Forest, dataset: Dataset, metrics, seed: SeedSpec):
    """Shared permutation sweep over (tree, variable) pairs.

    Returns per-metric (ntree, p) diff matrices with NaN rows at skipped
    trees, plus per-metric skipped-tree counts. AUC skips trees whose OOB
    sample is single-class (or empty); accuracy only skips empty OOB.

    For over-sampled forests the per-tree OOB sample is taken from the
    balanced training table, with duplicated minority rows counted as
    distinct observations. Evaluating on original-row identity instead
    would leave the minority class absent from every OOB sample once the
    imbalance is strong (each original minority row then has many in-bag
    copies), making the AUC drop undefined for every tree.
    """
    if forest.origin_map is not None:
        X = np.ascontiguousarray(dataset.features[forest.origin_map])
        y = dataset.labels[forest.origin_map]
        n_table = len(forest.origin_map)
    else:
        X = dataset.features
        y = dataset.labels
        n_table = dataset.n
    ntree, p = len(forest.trees), forest.p
    diffs = {m: np.zeros((ntree, p)) for m in metrics}
    skipped = {m: 0 for m in metrics}

    for t, tree in enumerate(forest.trees):
        if forest.origin_map is not None:
            covered = np.zeros(n_table, dtype=bool)
            covered[tree.in_bag] = True
            oob = np.flatnonzero(~covered).astype(np.int32)
        else:
            oob = tree.oob
        y_oob = y[oob]
        single_class = oob.size == 0 or y_oob.min() == y_oob.max()
        active = []
        for m in metrics:
            if oob.size == 0 or (m == "auc" and single_class):
                diffs[m][t, :] = np.nan
                skipped[m] += 1
            else:
                active.append(m)
        if not active:
            continue
        rows64 = oob.astype(np.int64)
        base_scores = _kernels.predict_rows(tree.nodes, X, rows64)
        base = {m: _metric_eval(m, base_scores, y_oob) for m in active}
        used = set(tree.split_features.tolist())
        for j in range(p):
            if j not in used:
                continue  # permutation cannot change routing; diff stays 0
            rng = seed.derive(TAG_PERMUTATION, t, j)
            perm = rng.permutation(oob.size)
            perm_values = X[oob[perm], j]
            scores = _kernels.predict_rows(tree.nodes, X, rows64,
                                           perm_col=j, perm_values=perm_values)
            for m in active:
                diffs[m][t, j] = base[m] - _metric_eval(m, scores, y_oob)
    return diffs, skipped


def _build_report(method: str, diff_matrix: np.ndarray, n_skipped: int,
                  config: ForestConfig, u: float, names) -> ImportanceReport:
    ntree, p = diff_matrix.shape
    retained = ntree - n_skipped
    names = names or tuple(f"x{j + 1}" for j in range(p))
    records = []
    for j in range(p):
        col = diff_matrix[:, j]
        lower, upper, degenerate = importance_interval(col, u, retained)
        value = float(np.nanmean(col)) if retained else math.nan
        records.append(ImportanceRecord(j, names[j], value, col.copy(),
                                        lower, upper, n_skipped, degenerate))
    return ImportanceReport(method, tuple(records), config, u)
