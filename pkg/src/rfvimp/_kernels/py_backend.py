"""Pure-numpy twin of the Cython tree kernels.

Selected at import time when the compiled extension is unavailable (or when
``RFVIMP_BACKEND=python``). Every floating-point expression mirrors the C
code operation-for-operation so both backends grow bitwise-identical trees
from the same random words.
"""

from __future__ import annotations

import numpy as np

NAME = "python"

_NEG_INF = -np.inf


def build_tree(X, y, in_bag, rand_words, mtry, min_leaf_size):
    """Grow one CART classification tree on the in-bag rows.

    Parameters
    ----------
    X : (n, p) float64, C-contiguous
    y : (n,) int8 over {0, 1}
    in_bag : (m,) int32 row indices into X, repetitions allowed
    rand_words : (>=2m+1, mtry) int64 random words; row t drives the
        feature subset of the t-th split attempt (partial Fisher-Yates)
    mtry, min_leaf_size : forest hyperparameters

    Returns
    -------
    (feature i4, threshold f8, left i4, right i4, prob1 f8, n_node i4,
     impurity_decrease f8), each of length n_nodes. ``feature`` is -1 at
    leaves. Internal nodes route value <= threshold to ``left``.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int8)
    rows = np.array(in_bag, dtype=np.int32)
    m_total = rows.shape[0]
    p = X.shape[1]
    cap = 2 * m_total + 1

    feature = np.full(cap, -1, dtype=np.int32)
    threshold = np.zeros(cap, dtype=np.float64)
    left = np.full(cap, -1, dtype=np.int32)
    right = np.full(cap, -1, dtype=np.int32)
    prob1 = np.zeros(cap, dtype=np.float64)
    n_node = np.zeros(cap, dtype=np.int32)
    decrease = np.zeros(cap, dtype=np.float64)

    n_nodes = 1
    attempts = 0
    stack = [(0, 0, m_total)]  # (node_id, start, end) over `rows`
    while stack:
        node, start, end = stack.pop()
        seg = rows[start:end]
        m = end - start
        c1 = int(y[seg].sum())
        c0 = m - c1
        prob1[node] = c1 / m
        n_node[node] = m
        if c0 == 0 or c1 == 0 or m < 2 * min_leaf_size:
            continue

        subset = _feature_subset(rand_words[attempts], p, mtry)
        attempts += 1

        parent_score = (c0 * c0 + c1 * c1) / m
        best_score = _NEG_INF
        best = None  # (feature, threshold)
        for f in subset:
            v = X[seg, f]
            order = np.argsort(v, kind="stable")
            vs = v[order]
            c1l = np.cumsum(y[seg][order].astype(np.int64))[:-1]
            ml = np.arange(1, m, dtype=np.int64)
            mr = m - ml
            c0l = ml - c1l
            c1r = c1 - c1l
            c0r = mr - c1r
            score = (c0l * c0l + c1l * c1l) / ml + (c0r * c0r + c1r * c1r) / mr
            valid = (vs[1:] != vs[:-1]) & (ml >= min_leaf_size) & (mr >= min_leaf_size)
            if not valid.any():
                continue
            score = np.where(valid, score, _NEG_INF)
            pos = int(np.argmax(score))  # first max -> smallest threshold
            if score[pos] > best_score:
                lo, hi = vs[pos], vs[pos + 1]
                mid = 0.5 * (lo + hi)
                best_score = float(score[pos])
                best = (int(f), float(mid) if mid < hi else float(lo))
        if best is None or not best_score - parent_score > 0.0:
            continue

        bf, bt = best
        feature[node] = bf
        threshold[node] = bt
        decrease[node] = (best_score - parent_score) / m_total
        go_left = X[seg, bf] <= bt
        rows[start:end] = np.concatenate([seg[go_left], seg[~go_left]])
        n_left = int(np.count_nonzero(go_left))
        lid, rid = n_nodes, n_nodes + 1
        n_nodes += 2
        left[node] = lid
        right[node] = rid
        stack.append((rid, start + n_left, end))
        stack.append((lid, start, start + n_left))

    sl = slice(0, n_nodes)
    return (feature[sl].copy(), threshold[sl].copy(), left[sl].copy(),
            right[sl].copy(), prob1[sl].copy(), n_node[sl].copy(),
            decrease[sl].copy())


def _feature_subset(words, p, mtry):
    """Partial Fisher-Yates draw of mtry distinct features, sorted."""
    pool = np.arange(p, dtype=np.int64)
    for i in range(mtry):
        j = i + int(words[i]) % (p - i)
        pool[i], pool[j] = pool[j], pool[i]
    out = pool[:mtry].copy()
    out.sort()
    return out


def predict_rows(tree, X, rows, perm_col=-1, perm_values=None):
    """Class-1 leaf probability for X[rows] routed through a flat tree.

    When ``perm_col >= 0``, reads of that feature column are replaced by
    ``perm_values`` (aligned with ``rows``) without touching X.
    """
    feature, threshold, left, right, prob1 = tree[0], tree[1], tree[2], tree[3], tree[4]
    rows = np.asarray(rows, dtype=np.int64)
    node = np.zeros(rows.shape[0], dtype=np.int64)
    active = feature[node] >= 0
    while active.any():
        idx = np.flatnonzero(active)
        nd = node[idx]
        f = feature[nd]
        vals = X[rows[idx], f]
        if perm_col >= 0:
            override = f == perm_col
            if override.any():
                vals = vals.copy()
                vals[override] = perm_values[idx[override]]
        node[idx] = np.where(vals <= threshold[nd], left[nd], right[nd])
        active[idx] = feature[node[idx]] >= 0
    return prob1[node]
