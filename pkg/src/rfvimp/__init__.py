"""Random-forest variable importance and CI-based feature selection for
imbalanced binary classification."""

from ._kernels import BACKEND
from .dataset import (DataError, Dataset, FoldAssignment, imbalance_ratio,
                      load_csv, save_csv, stratified_kfold)
from .forest import (Forest, ForestConfig, Tree, draw_training_sample,
                     fit_forest, load_forest, oob_predictions,
                     oversample_balance, save_forest)
from .importance import (GINI, METHODS, PERM_ACCU, PERM_AUC, PERM_AUC_OVER,
                         PERM_AUC_UNDER, ImportanceRecord, ImportanceReport,
                         gini_importance, importance_interval,
                         measure_importance, measure_importance_many,
                         permutation_importance)
from .metrics import accuracy, auc
from .rng import SeedSpec
from .selection import (SELECTORS, CandidateSet, SelectionResult,
                        backward_sizes, baseline_backward_select,
                        run_selector, score_candidates, search_candidates,
                        select_optimal)
from .stats import WilcoxonResult, rank_and_classify, wilcoxon_signed_rank
from .synth import (BENCHMARK_NAMES, BenchmarkSpec, SimulationConfig,
                    circle_radius, gen_benchmark, gen_simulation)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BENCHMARK_NAMES", "BenchmarkSpec", "CandidateSet",
    "DataError", "Dataset", "FoldAssignment", "Forest", "ForestConfig",
    "GINI", "ImportanceRecord", "ImportanceReport", "METHODS", "PERM_ACCU",
    "PERM_AUC", "PERM_AUC_OVER", "PERM_AUC_UNDER", "SELECTORS", "SeedSpec",
    "SelectionResult", "SimulationConfig", "Tree", "WilcoxonResult",
    "accuracy", "auc", "backward_sizes", "baseline_backward_select",
    "circle_radius", "draw_training_sample", "fit_forest", "gen_benchmark",
    "gen_simulation", "gini_importance", "imbalance_ratio",
    "importance_interval", "load_csv", "load_forest", "measure_importance",
    "measure_importance_many", "oob_predictions", "oversample_balance",
    "permutation_importance", "rank_and_classify", "run_selector",
    "save_csv", "save_forest", "score_candidates", "search_candidates",
    "select_optimal", "stratified_kfold", "wilcoxon_signed_rank",
]
