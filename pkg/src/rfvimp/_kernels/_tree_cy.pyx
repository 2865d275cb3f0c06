# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled tree kernels: CART growth and leaf-probability prediction.

Twin of ``py_backend``; both consume the same pre-drawn random words and
must produce bitwise-identical trees.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()

NAME = "cython"

ctypedef cnp.float64_t f8
ctypedef cnp.int64_t i8
ctypedef cnp.int32_t i4
ctypedef cnp.int8_t i1


cdef void _sort_pairs(f8* v, i1* y, Py_ssize_t lo, Py_ssize_t hi) noexcept nogil:
    """Quicksort parallel arrays (v, y) by v on [lo, hi); recurse on the
    smaller half so stack depth stays O(log n)."""
    cdef Py_ssize_t i, j, mid
    cdef f8 pivot, tv
    cdef i1 ty
    while hi - lo > 16:
        mid = lo + (hi - lo) // 2
        # median of three -> pivot at lo
        if v[mid] < v[lo]:
            tv = v[lo]; v[lo] = v[mid]; v[mid] = tv
            ty = y[lo]; y[lo] = y[mid]; y[mid] = ty
        if v[hi - 1] < v[lo]:
            tv = v[lo]; v[lo] = v[hi - 1]; v[hi - 1] = tv
            ty = y[lo]; y[lo] = y[hi - 1]; y[hi - 1] = ty
        if v[hi - 1] < v[mid]:
            tv = v[mid]; v[mid] = v[hi - 1]; v[hi - 1] = tv
            ty = y[mid]; y[mid] = y[hi - 1]; y[hi - 1] = ty
        pivot = v[mid]
        i = lo
        j = hi - 1
        while True:
            while v[i] < pivot:
                i += 1
            while v[j] > pivot:
                j -= 1
            if i >= j:
                break
            tv = v[i]; v[i] = v[j]; v[j] = tv
            ty = y[i]; y[i] = y[j]; y[j] = ty
            i += 1
            j -= 1
        if j + 1 - lo < hi - (j + 1):
            _sort_pairs(v, y, lo, j + 1)
            lo = j + 1
        else:
            _sort_pairs(v, y, j + 1, hi)
            hi = j + 1
    # insertion sort for the small remainder
    for i in range(lo + 1, hi):
        tv = v[i]
        ty = y[i]
        j = i
        while j > lo and v[j - 1] > tv:
            v[j] = v[j - 1]
            y[j] = y[j - 1]
            j -= 1
        v[j] = tv
        y[j] = ty


def build_tree(object X_obj, object y_obj, object in_bag, object rand_words,
               int mtry, int min_leaf_size):
    """See py_backend.build_tree; same contract, same outputs."""
    cdef const f8[:, ::1] X = X_obj
    cdef const i1[::1] y = np.ascontiguousarray(y_obj, dtype=np.int8)
    cdef i4[::1] rows = np.array(in_bag, dtype=np.int32)
    cdef const i8[:, ::1] words = np.ascontiguousarray(rand_words, dtype=np.int64)
    cdef Py_ssize_t m_total = rows.shape[0]
    cdef Py_ssize_t p = X.shape[1]
    cdef Py_ssize_t cap = 2 * m_total + 1

    feature_arr = np.full(cap, -1, dtype=np.int32)
    threshold_arr = np.zeros(cap, dtype=np.float64)
    left_arr = np.full(cap, -1, dtype=np.int32)
    right_arr = np.full(cap, -1, dtype=np.int32)
    prob1_arr = np.zeros(cap, dtype=np.float64)
    n_node_arr = np.zeros(cap, dtype=np.int32)
    decrease_arr = np.zeros(cap, dtype=np.float64)
    cdef i4[::1] feature = feature_arr
    cdef f8[::1] threshold = threshold_arr
    cdef i4[::1] left = left_arr
    cdef i4[::1] right = right_arr
    cdef f8[::1] prob1 = prob1_arr
    cdef i4[::1] n_node = n_node_arr
    cdef f8[::1] decrease = decrease_arr

    # scratch
    sv_arr = np.empty(m_total, dtype=np.float64)
    sy_arr = np.empty(m_total, dtype=np.int8)
    part_arr = np.empty(m_total, dtype=np.int32)
    pool_arr = np.empty(p, dtype=np.int64)
    subset_arr = np.empty(mtry, dtype=np.int64)
    stack_arr = np.empty((cap, 3), dtype=np.int64)
    cdef f8[::1] sv = sv_arr
    cdef i1[::1] sy = sy_arr
    cdef i4[::1] part = part_arr
    cdef i8[::1] pool = pool_arr
    cdef i8[::1] subset = subset_arr
    cdef i8[:, ::1] stack = stack_arr

    cdef Py_ssize_t n_nodes = 1, attempts = 0, top = 0
    cdef Py_ssize_t node, start, end, m, i, j, k, f, pos, n_left, lid, rid
    cdef i8 c1, c0, ml, mr, c1l, c0l, c1r, c0r
    cdef f8 parent_score, best_score, score, lo_v, hi_v, mid, best_thr, feat_best
    cdef Py_ssize_t best_f
    cdef f8 feat_thr
    cdef Py_ssize_t feat_pos
    cdef bint found

    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = m_total
    top = 1
    with nogil:
        while top > 0:
            top -= 1
            node = <Py_ssize_t> stack[top, 0]
            start = <Py_ssize_t> stack[top, 1]
            end = <Py_ssize_t> stack[top, 2]
            m = end - start
            c1 = 0
            for i in range(start, end):
                c1 += y[rows[i]]
            c0 = m - c1
            prob1[node] = (<f8> c1) / (<f8> m)
            n_node[node] = <i4> m
            if c0 == 0 or c1 == 0 or m < 2 * min_leaf_size:
                continue

            # feature subset: partial Fisher-Yates driven by one word row
            for i in range(p):
                pool[i] = i
            for i in range(mtry):
                j = i + <Py_ssize_t> (words[attempts, i] % (p - i))
                c1l = pool[i]; pool[i] = pool[j]; pool[j] = c1l
            attempts += 1
            for i in range(mtry):
                subset[i] = pool[i]
            # insertion-sort the subset ascending
            for i in range(1, mtry):
                c1l = subset[i]
                j = i
                while j > 0 and subset[j - 1] > c1l:
                    subset[j] = subset[j - 1]
                    j -= 1
                subset[j] = c1l

            parent_score = (<f8> (c0 * c0 + c1 * c1)) / (<f8> m)
            best_score = -INFINITY
            best_f = -1
            best_thr = 0.0
            for k in range(mtry):
                f = <Py_ssize_t> subset[k]
                for i in range(m):
                    sv[i] = X[rows[start + i], f]
                    sy[i] = y[rows[start + i]]
                _sort_pairs(&sv[0], &sy[0], 0, m)
                found = False
                feat_best = -INFINITY
                feat_thr = 0.0
                c1l = 0
                for pos in range(m - 1):
                    c1l += sy[pos]
                    ml = pos + 1
                    mr = m - ml
                    if ml < min_leaf_size or mr < min_leaf_size:
                        continue
                    if sv[pos] == sv[pos + 1]:
                        continue
                    c0l = ml - c1l
                    c1r = c1 - c1l
                    c0r = mr - c1r
                    score = (<f8> (c0l * c0l + c1l * c1l)) / (<f8> ml) \
                        + (<f8> (c0r * c0r + c1r * c1r)) / (<f8> mr)
                    if score > feat_best:
                        feat_best = score
                        lo_v = sv[pos]
                        hi_v = sv[pos + 1]
                        mid = 0.5 * (lo_v + hi_v)
                        feat_thr = mid if mid < hi_v else lo_v
                        found = True
                if found and feat_best > best_score:
                    best_score = feat_best
                    best_f = f
                    best_thr = feat_thr
            if best_f < 0 or not best_score - parent_score > 0.0:
                continue

            feature[node] = <i4> best_f
            threshold[node] = best_thr
            decrease[node] = (best_score - parent_score) / (<f8> m_total)
            # stable two-pass partition of rows[start:end]
            n_left = 0
            for i in range(start, end):
                if X[rows[i], best_f] <= best_thr:
                    part[n_left] = rows[i]
                    n_left += 1
            j = n_left
            for i in range(start, end):
                if not (X[rows[i], best_f] <= best_thr):
                    part[j] = rows[i]
                    j += 1
            for i in range(m):
                rows[start + i] = part[i]
            lid = n_nodes
            rid = n_nodes + 1
            n_nodes += 2
            left[node] = <i4> lid
            right[node] = <i4> rid
            stack[top, 0] = rid
            stack[top, 1] = start + n_left
            stack[top, 2] = end
            top += 1
            stack[top, 0] = lid
            stack[top, 1] = start
            stack[top, 2] = start + n_left
            top += 1

    return (feature_arr[:n_nodes].copy(), threshold_arr[:n_nodes].copy(),
            left_arr[:n_nodes].copy(), right_arr[:n_nodes].copy(),
            prob1_arr[:n_nodes].copy(), n_node_arr[:n_nodes].copy(),
            decrease_arr[:n_nodes].copy())


def predict_rows(tuple tree, object X_obj, object rows_obj,
                 int perm_col=-1, object perm_values=None):
    """See py_backend.predict_rows; same contract."""
    cdef const f8[:, ::1] X = X_obj
    cdef const i8[::1] rows = np.ascontiguousarray(rows_obj, dtype=np.int64)
    cdef const i4[::1] feature = tree[0]
    cdef const f8[::1] threshold = tree[1]
    cdef const i4[::1] left = tree[2]
    cdef const i4[::1] right = tree[3]
    cdef const f8[::1] prob1 = tree[4]
    cdef Py_ssize_t n = rows.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef f8[::1] out = out_arr
    cdef const f8[::1] pv
    cdef Py_ssize_t i, node, f
    cdef f8 val
    cdef bint has_perm = perm_col >= 0
    if has_perm:
        pv = np.ascontiguousarray(perm_values, dtype=np.float64)
    else:
        pv = out  # unused
    with nogil:
        for i in range(n):
            node = 0
            while feature[node] >= 0:
                f = feature[node]
                if has_perm and f == perm_col:
                    val = pv[i]
                else:
                    val = X[rows[i], f]
                node = left[node] if val <= threshold[node] else right[node]
            out[i] = prob1[node]
    return out_arr
