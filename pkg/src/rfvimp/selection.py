"""Feature selection: the CI-driven search/scoring selector and the two
backward-elimination baselines.

The proposed selector sorts variables by permutation-AUC importance,
builds nested candidate sets whose boundaries are defined by confidence
interval disjointness against the current pivot (the least-important
member), scores each candidate with a fresh forest's OOB-AUC, and keeps
the best-scoring set (ties go to the smaller set).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .dataset import Dataset
from .forest import ForestConfig, fit_forest, oob_predictions
from .importance import (GINI, PERM_ACCU, PERM_AUC, PERM_AUC_OVER,
                         PERM_AUC_UNDER, ImportanceReport, measure_importance)
from .metrics import accuracy, auc
from .rng import TAG_CANDIDATE, SeedSpec

# selector name -> (importance method, scoring sampling mode)
SELECTOR_AUC = "auc"
SELECTOR_AUC_UNDER = "auc-under"
SELECTOR_AUC_OVER = "auc-over"
SELECTOR_DIAZ_URI = "diaz-uri"
SELECTOR_CALLE = "calle"
SELECTORS = (SELECTOR_DIAZ_URI, SELECTOR_CALLE, SELECTOR_AUC,
             SELECTOR_AUC_UNDER, SELECTOR_AUC_OVER)

_PROPOSED = {
    SELECTOR_AUC: (PERM_AUC, "none"),
    SELECTOR_AUC_UNDER: (PERM_AUC_UNDER, "under"),
    SELECTOR_AUC_OVER: (PERM_AUC_OVER, "over"),
}


@dataclass(frozen=True)
class CandidateSet:
    variables: tuple[int, ...]  # column indices, descending importance
    pivot: int                  # least-important member
    oob_auc: float | None = None
    unscorable: bool = False

    @property
    def size(self) -> int:
        return len(self.variables)


@dataclass(frozen=True)
class SelectionResult:
    candidates: tuple[CandidateSet, ...]
    optimal: int  # index into candidates
    method: str
    importance_report: ImportanceReport

    @property
    def n_candidates(self) -> int:
        return len(self.candidates)

    @property
    def selected(self) -> CandidateSet:
        return self.candidates[self.optimal]

    def to_dict(self, feature_names=None) -> dict:
        def name(j):
            return feature_names[j] if feature_names else f"x{j + 1}"
        return {
            "method": self.method,
            "n_candidates": self.n_candidates,
            "optimal": self.optimal,
            "candidates": [
                {
                    "size": c.size,
                    "members": [name(j) for j in c.variables],
                    "pivot": name(c.pivot),
                    "oob_auc": c.oob_auc,
                    "unscorable": c.unscorable,
                }
                for c in self.candidates
            ],
        }

    def write_json(self, path, feature_names=None) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(feature_names), fh, indent=2)
            fh.write("\n")


def search_candidates(report: ImportanceReport) -> list[CandidateSet]:
    """Nested candidate sets from CI disjointness against the pivot.

    Variables are sorted by descending importance (ties by ascending
    column index). The first candidate holds all variables; the next pivot
    is the sorted position max{k : lower(k) > upper(pivot)}; the search
    stops once the top variable's lower bound no longer exceeds the
    current pivot's upper bound.
    """
    values = report.values
    order = sorted(range(len(values)), key=lambda j: (-values[j], j))
    lower = np.array([report.records[j].ci_lower for j in order])
    upper = np.array([report.records[j].ci_upper for j in order])
    m = len(order)

    candidates = []
    pos = m - 1
    while True:
        candidates.append(CandidateSet(tuple(order[:pos + 1]), order[pos]))
        if not lower[0] > upper[pos]:
            break
        above = np.flatnonzero(lower > upper[pos])
        nxt = int(above.max())
        if nxt >= pos:  # cannot happen while values sit inside their CIs
            break
        pos = nxt
    return candidates


def score_candidates(dataset: Dataset, candidates, sampling: str,
                     config: ForestConfig, seed: SeedSpec) -> list[CandidateSet]:
    """OOB-AUC for each candidate from a fresh restricted forest (one
    derived seed per candidate)."""
    scored = []
    for i, cand in enumerate(candidates):
        sub = dataset.restrict(cand.variables)
        cfg = replace(config, sampling=sampling, seed=seed.child(TAG_CANDIDATE, i))
        forest = fit_forest(sub, cfg)
        scores, covered = oob_predictions(forest, sub)
        y = sub.labels[covered]
        if covered.sum() == 0 or y.min() == y.max():
            scored.append(replace(cand, oob_auc=None, unscorable=True))
        else:
            scored.append(replace(cand, oob_auc=auc(scores[covered], y)))
    return scored


def _pick_optimal(scored, maximize: bool) -> int:
    """Best-scoring candidate; candidates come largest-first, so accepting
    non-strict improvements prefers the smaller set on ties."""
    best = None
    for i, cand in enumerate(scored):
        if cand.unscorable:
            continue
        if best is None:
            best = i
            continue
        better = (cand.oob_auc >= scored[best].oob_auc if maximize
                  else cand.oob_auc <= scored[best].oob_auc)
        if better:
            best = i
    if best is None:
        raise ValueError("no scorable candidate set")
    return best


def select_optimal(dataset: Dataset, method: str, config: ForestConfig,
                   seed: SeedSpec, u: float = 2.0) -> SelectionResult:
    """Full pipeline for the proposed selectors (auc, auc-under, auc-over)."""
    if method not in _PROPOSED:
        raise ValueError(f"unknown selection method {method!r}; "
                         f"choose from {sorted(_PROPOSED)}")
    imp_method, sampling = _PROPOSED[method]
    report = measure_importance(dataset, imp_method, config, seed, u)
    candidates = search_candidates(report)
    scored = score_candidates(dataset, candidates, sampling, config, seed)
    return SelectionResult(tuple(scored), _pick_optimal(scored, maximize=True),
                           method, report)


def backward_sizes(p: int, drop_rate: float = 0.2) -> list[int]:
    """Candidate sizes p, floor((1-drop_rate)*s), ... down to 2."""
    if not 0 < drop_rate < 1:
        raise ValueError("drop_rate must be in (0, 1)")
    sizes = [p]
    while sizes[-1] > 2:
        sizes.append(max(2, int((1 - drop_rate) * sizes[-1])))
    return sizes


def baseline_backward_select(dataset: Dataset, ranking: str, score: str,
                             config: ForestConfig, seed: SeedSpec,
                             drop_rate: float = 0.2) -> SelectionResult:
    """Backward elimination: rank once on the full model, drop the weakest
    ``drop_rate`` fraction per step, score each prefix with a fresh plain
    forest (OOB error or OOB-AUC)."""
    if ranking not in (PERM_ACCU, GINI):
        raise ValueError(f"baseline ranking must be {PERM_ACCU!r} or {GINI!r}")
    if score not in ("oob_error_min", "oob_auc_max"):
        raise ValueError(f"unknown baseline score {score!r}")
    if dataset.p < 2:
        raise ValueError("baseline selection needs p >= 2")
    report = measure_importance(dataset, ranking, config, seed)
    values = report.values
    order = sorted(range(dataset.p), key=lambda j: (-values[j], j))

    scored = []
    for i, size in enumerate(backward_sizes(dataset.p, drop_rate)):
        members = tuple(order[:size])
        sub = dataset.restrict(members)
        cfg = replace(config, sampling="none", seed=seed.child(TAG_CANDIDATE, i))
        forest = fit_forest(sub, cfg)
        preds, covered = oob_predictions(forest, sub)
        y = sub.labels[covered]
        cand = CandidateSet(members, members[-1])
        # oob_auc carries whichever score the variant optimizes:
        # OOB-AUC (maximized) or OOB error (minimized)
        if covered.sum() == 0 or (score == "oob_auc_max" and y.min() == y.max()):
            scored.append(replace(cand, unscorable=True))
        elif score == "oob_auc_max":
            scored.append(replace(cand, oob_auc=auc(preds[covered], y)))
        else:
            scored.append(replace(cand, oob_auc=1.0 - accuracy(preds[covered], y)))
    method = SELECTOR_DIAZ_URI if score == "oob_error_min" else SELECTOR_CALLE
    optimal = _pick_optimal(scored, maximize=(score == "oob_auc_max"))
    return SelectionResult(tuple(scored), optimal, method, report)


def run_selector(dataset: Dataset, selector: str, config: ForestConfig,
                 seed: SeedSpec, u: float = 2.0) -> SelectionResult:
    """Dispatch over the five selector names."""
    if selector in _PROPOSED:
        return select_optimal(dataset, selector, config, seed, u)
    if selector == SELECTOR_DIAZ_URI:
        return baseline_backward_select(dataset, PERM_ACCU, "oob_error_min",
                                        config, seed)
    if selector == SELECTOR_CALLE:
        return baseline_backward_select(dataset, GINI, "oob_auc_max",
                                        config, seed)
    raise ValueError(f"unknown selector {selector!r}; choose from {SELECTORS}")
