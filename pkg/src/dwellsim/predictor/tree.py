"""Numba kernels for exact-greedy regression trees grown level by level.

A tree is five parallel arrays (feature, threshold, left, right, value);
feature == -1 marks a leaf. Rows go left when x <= threshold.

Split search walks every feature column once per level in presorted order,
so a level costs O(n_rows * n_features). Features are visited in index
order and a candidate replaces the incumbent only on a strictly larger
gain, which fixes the tie-breaking.
"""

from __future__ import annotations

import numpy as np
from numba import njit

REL_GAIN_EPS = 1e-12


@njit(cache=True)
def presort(X):
    """Per-feature row order and the feature values laid out in that order."""
    n, f = X.shape
    order = np.empty((f, n), dtype=np.int64)
    xs = np.empty((f, n), dtype=np.float64)
    for j in range(f):
        order[j] = np.argsort(X[:, j], kind="mergesort")
        for p in range(n):
            xs[j, p] = X[order[j, p], j]
    return order, xs


@njit(cache=True)
def grow_tree(X, order, xs, resid, max_depth, min_leaf):
    """Fit one tree to ``resid``. Returns the tree arrays and each row's leaf id."""
    n, f = X.shape
    cap = 2 ** (max_depth + 1)
    feat = np.full(cap, -1, dtype=np.int64)
    thr = np.zeros(cap, dtype=np.float64)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    value = np.zeros(cap, dtype=np.float64)

    node_of = np.zeros(n, dtype=np.int64)
    n_nodes = 1
    frontier = np.zeros(1, dtype=np.int64)

    tot_s = np.zeros(cap, dtype=np.float64)
    tot_c = np.zeros(cap, dtype=np.int64)
    tot_q = np.zeros(cap, dtype=np.float64)
    active = np.zeros(cap, dtype=np.bool_)

    best_gain = np.zeros(cap, dtype=np.float64)
    best_feat = np.full(cap, -1, dtype=np.int64)
    best_thr = np.zeros(cap, dtype=np.float64)

    left_s = np.zeros(cap, dtype=np.float64)
    left_c = np.zeros(cap, dtype=np.int64)
    last_x = np.zeros(cap, dtype=np.float64)
    seen = np.zeros(cap, dtype=np.bool_)

    for depth in range(max_depth + 1):
        for k in range(frontier.shape[0]):
            nd = frontier[k]
            active[nd] = True
            tot_s[nd] = 0.0
            tot_c[nd] = 0
            tot_q[nd] = 0.0
            best_gain[nd] = 0.0
            best_feat[nd] = -1
        for i in range(n):
            nd = node_of[i]
            if nd >= 0 and active[nd]:
                tot_s[nd] += resid[i]
                tot_c[nd] += 1
                tot_q[nd] += resid[i] * resid[i]
        for k in range(frontier.shape[0]):
            nd = frontier[k]
            if tot_c[nd] > 0:
                value[nd] = tot_s[nd] / tot_c[nd]

        if depth == max_depth:
            break

        for j in range(f):
            for k in range(frontier.shape[0]):
                nd = frontier[k]
                left_s[nd] = 0.0
                left_c[nd] = 0
                seen[nd] = False
            oj = order[j]
            xj = xs[j]
            for p in range(n):
                i = oj[p]
                nd = node_of[i]
                if nd < 0 or not active[nd]:
                    continue
                x = xj[p]
                if seen[nd] and x > last_x[nd]:
                    nl = left_c[nd]
                    nr = tot_c[nd] - nl
                    if nl >= min_leaf and nr >= min_leaf:
                        sl = left_s[nd]
                        sr = tot_s[nd] - sl
                        gain = sl * sl / nl + sr * sr / nr - tot_s[nd] * tot_s[nd] / tot_c[nd]
                        if gain > best_gain[nd] and gain > REL_GAIN_EPS * tot_q[nd]:
                            best_gain[nd] = gain
                            best_feat[nd] = j
                            t = last_x[nd] + (x - last_x[nd]) / 2.0
                            if t >= x:
                                t = last_x[nd]
                            best_thr[nd] = t
                left_s[nd] += resid[i]
                left_c[nd] += 1
                last_x[nd] = x
                seen[nd] = True

        n_split = 0
        for k in range(frontier.shape[0]):
            if best_feat[frontier[k]] >= 0:
                n_split += 1
        if n_split == 0:
            break
        new_frontier = np.empty(2 * n_split, dtype=np.int64)
        q = 0
        for k in range(frontier.shape[0]):
            nd = frontier[k]
            active[nd] = False
            if best_feat[nd] >= 0:
                feat[nd] = best_feat[nd]
                thr[nd] = best_thr[nd]
                left[nd] = n_nodes
                right[nd] = n_nodes + 1
                new_frontier[q] = n_nodes
                new_frontier[q + 1] = n_nodes + 1
                q += 2
                n_nodes += 2
        for i in range(n):
            nd = node_of[i]
            if nd >= 0 and feat[nd] >= 0 and left[nd] >= 0:
                if X[i, feat[nd]] <= thr[nd]:
                    node_of[i] = left[nd]
                else:
                    node_of[i] = right[nd]
        frontier = new_frontier

    return feat[:n_nodes].copy(), thr[:n_nodes].copy(), left[:n_nodes].copy(), \
        right[:n_nodes].copy(), value[:n_nodes].copy(), node_of


@njit(cache=True)
def predict_forest(X, offsets, feat, thr, left, right, value, init, lr):
    n = X.shape[0]
    out = np.full(n, init, dtype=np.float64)
    n_trees = offsets.shape[0] - 1
    for i in range(n):
        acc = init
        for t in range(n_trees):
            base = offsets[t]
            nd = 0
            while feat[base + nd] >= 0:
                if X[i, feat[base + nd]] <= thr[base + nd]:
                    nd = left[base + nd]
                else:
                    nd = right[base + nd]
            acc += lr * value[base + nd]
        out[i] = acc
    return out
