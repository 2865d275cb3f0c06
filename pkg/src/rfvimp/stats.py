"""Wilcoxon signed-rank tests and rank-band misclassification counting."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .metrics import _average_ranks

ALTERNATIVES = ("two-sided", "greater", "less")

#: exact enumeration is used up to this many non-zero differences (no ties)
EXACT_LIMIT = 12

CATEGORY_NAMES = ("strong", "moderate", "weak", "noise")


@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float  # W+: rank sum of positive differences
    p_value: float
    exact: bool
    degenerate: bool  # all differences zero


def wilcoxon_signed_rank(x, y, alternative: str = "two-sided") -> WilcoxonResult:
    """Paired signed-rank test of x against y.

    Zero differences are dropped; |d| is ranked with average ranks for
    ties. The null distribution is enumerated exactly when at most
    ``EXACT_LIMIT`` differences remain and |d| has no ties, otherwise a
    normal approximation with tie and continuity corrections is used.
    ``alternative="greater"`` tests whether x tends to exceed y.
    """
    if alternative not in ALTERNATIVES:
        raise ValueError(f"alternative must be one of {ALTERNATIVES}")
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or x.size < 1:
        raise ValueError("x and y must be equal-length 1-D vectors, length >= 1")
    d = x - y
    d = d[d != 0.0]
    n = d.size
    if n == 0:
        return WilcoxonResult(0.0, 1.0, True, True)

    abs_d = np.abs(d)
    ranks = _average_ranks(abs_d)
    w_plus = float(ranks[d > 0].sum())
    has_ties = np.unique(abs_d).size < n

    if n <= EXACT_LIMIT and not has_ties:
        p = _exact_p(int(round(w_plus)), n, alternative)
        return WilcoxonResult(w_plus, p, True, False)

    mean = n * (n + 1) / 4.0
    _, tie_counts = np.unique(abs_d, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - float(
        np.sum(tie_counts.astype(np.float64) ** 3 - tie_counts)) / 48.0
    sd = math.sqrt(var)
    if alternative == "greater":
        p = _norm_sf((w_plus - mean - 0.5) / sd)
    elif alternative == "less":
        p = _norm_sf((mean - w_plus - 0.5) / sd)
    else:
        delta = abs(w_plus - mean)
        p = min(1.0, 2.0 * _norm_sf((delta - 0.5) / sd))
    return WilcoxonResult(w_plus, min(max(p, 0.0), 1.0), False, False)


def _exact_p(w_plus: int, n: int, alternative: str) -> float:
    """Exact p over the 2^n equiprobable sign assignments, via the rank-sum
    count polynomial prod_r (1 + z^r)."""
    max_w = n * (n + 1) // 2
    freq = np.zeros(max_w + 1, dtype=np.int64)
    freq[0] = 1
    for r in range(1, n + 1):
        freq[r:] += freq[:-r].copy()
    total = float(2 ** n)
    p_greater = float(freq[w_plus:].sum()) / total
    p_less = float(freq[:w_plus + 1].sum()) / total
    if alternative == "greater":
        return p_greater
    if alternative == "less":
        return p_less
    return min(1.0, 2.0 * min(p_greater, p_less))


def _norm_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def category_of_ranks(block_sizes=(5, 5, 5, 15)) -> np.ndarray:
    """Category index (0=strong .. 3=noise) of each rank position 1..p."""
    return np.repeat(np.arange(len(block_sizes)),
                     np.asarray(block_sizes, dtype=np.int64))


def rank_and_classify(mean_importance, block_sizes=(5, 5, 5, 15)):
    """Misclassification counts against the rank-band truth.

    Variables are ranked by descending mean importance (ties by ascending
    index); each variable's rank band is compared against its true
    category (variable index bands in ``block_sizes`` order). Returns the
    (strong, moderate, weak) miscounts; noise miscounts are not reported.
    """
    values = np.asarray(mean_importance, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise ValueError("mean importance contains non-finite values; "
                         "ranking would be meaningless")
    p = values.size
    truth = category_of_ranks(block_sizes)
    if truth.size != p:
        raise ValueError(f"block_sizes sum to {truth.size}, expected p={p}")
    order = sorted(range(p), key=lambda j: (-values[j], j))
    assigned = np.empty(p, dtype=np.int64)
    assigned[order] = truth  # rank position -> band, mapped back to variables
    counts = tuple(int(np.sum((truth == b) & (assigned != b))) for b in range(3))
    return counts
