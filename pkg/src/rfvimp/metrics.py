"""Binary-classification metrics: ROC-AUC (Mann-Whitney form) and accuracy."""

from __future__ import annotations

import numpy as np


class SingleClassError(ValueError):
    """AUC is undefined when only one class is present."""


def auc(scores, labels) -> float:
    """Mann-Whitney AUC in O(k log k) via average ranks.

    Over all (positive, negative) pairs a pair counts 1 if the positive
    scores higher, 0.5 on ties, 0 otherwise; the result is the pair mean.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    n1 = int(np.count_nonzero(y == 1))
    n0 = s.shape[0] - n1
    if n1 == 0 or n0 == 0:
        raise SingleClassError("AUC needs at least one positive and one negative label")
    r = _average_ranks(s)
    rank_sum_pos = float(r[y == 1].sum())
    return (rank_sum_pos - n1 * (n1 + 1) / 2.0) / (n1 * n0)


def accuracy(scores, labels, threshold: float = 0.5) -> float:
    """Fraction of labels matching indicator(score > threshold)."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    pred = (s > threshold).astype(y.dtype)
    return float(np.mean(pred == y))


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties averaged."""
    order = np.argsort(values, kind="stable")
    sorted_vals = values[order]
    # Boundaries of tie groups in sorted order.
    boundary = np.empty(len(values), dtype=bool)
    boundary[0] = True
    boundary[1:] = sorted_vals[1:] != sorted_vals[:-1]
    group = np.cumsum(boundary) - 1
    starts = np.flatnonzero(boundary)
    ends = np.append(starts[1:], len(values))
    avg = (starts + ends + 1) / 2.0  # mean of 1-based ranks within the group
    ranks = np.empty(len(values), dtype=np.float64)
    ranks[order] = avg[group]
    return ranks
