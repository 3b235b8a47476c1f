"""Weighted CART (Gini) on presorted columns, compiled with numba."""

from __future__ import annotations

import numpy as np
from numba import njit


def presort(X: np.ndarray) -> np.ndarray:
    """Row order per column, shape (n_features, n_rows)."""
    return np.ascontiguousarray(np.argsort(X, axis=0, kind="stable").T)


def max_nodes(max_depth: int, n_rows: int) -> int:
    return int(min(2 ** (max_depth + 1) - 1, max(2 * n_rows - 1, 1)))


@njit(cache=True)
def _build(X, y, w, order, max_depth, min_split, n_sample, feat_keys):
    n_feat = order.shape[0]
    m = order.shape[1]
    cap = feat_keys.shape[0]
    feature = np.full(cap, -1, np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    value = np.zeros(cap)

    goes_left = np.zeros(X.shape[0], np.bool_)
    buf = np.empty(m, np.int64)
    st_start = np.empty(cap, np.int64)
    st_end = np.empty(cap, np.int64)
    st_depth = np.empty(cap, np.int64)
    st_node = np.empty(cap, np.int64)
    st_start[0] = 0
    st_end[0] = m
    st_depth[0] = 0
    st_node[0] = 0
    top = 1
    n_nodes = 1

    while top > 0:
        top -= 1
        start = st_start[top]
        end = st_end[top]
        depth = st_depth[top]
        node = st_node[top]

        wt = 0.0
        wp = 0.0
        for i in range(start, end):
            r = order[0, i]
            wt += w[r]
            wp += w[r] * y[r]
        value[node] = wp / wt
        if depth >= max_depth or wt < min_split or wp <= 0.0 or wp >= wt:
            continue

        if n_sample < n_feat:
            feats = np.sort(np.argsort(feat_keys[node])[:n_sample])
        else:
            feats = np.arange(n_feat)

        best_score = np.inf
        best_f = -1
        best_thr = 0.0
        for f in feats:
            wl = 0.0
            pl = 0.0
            for i in range(start, end - 1):
                r = order[f, i]
                wl += w[r]
                pl += w[r] * y[r]
                xv = X[r, f]
                xn = X[order[f, i + 1], f]
                if not xn > xv:
                    continue
                wr = wt - wl
                pr = wp - pl
                score = 2.0 * pl * (wl - pl) / wl + 2.0 * pr * (wr - pr) / wr
                if score < best_score:
                    best_score = score
                    best_f = f
                    thr = 0.5 * (xv + xn)
                    if thr >= xn:
                        thr = xv
                    best_thr = thr
        if best_f < 0:
            continue

        for i in range(start, end):
            r = order[best_f, i]
            goes_left[r] = X[r, best_f] <= best_thr
        n_left = 0
        for f in range(n_feat):
            nl = 0
            nr = 0
            for i in range(start, end):
                r = order[f, i]
                if goes_left[r]:
                    order[f, start + nl] = r
                    nl += 1
                else:
                    buf[nr] = r
                    nr += 1
            for j in range(nr):
                order[f, start + nl + j] = buf[j]
            n_left = nl

        lid = n_nodes
        rid = n_nodes + 1
        n_nodes += 2
        feature[node] = best_f
        threshold[node] = best_thr
        left[node] = lid
        right[node] = rid
        # right pushed first so the left subtree is expanded first
        st_start[top] = start + n_left
        st_end[top] = end
        st_depth[top] = depth + 1
        st_node[top] = rid
        top += 1
        st_start[top] = start
        st_end[top] = start + n_left
        st_depth[top] = depth + 1
        st_node[top] = lid
        top += 1

    return (
        feature[:n_nodes],
        threshold[:n_nodes],
        left[:n_nodes],
        right[:n_nodes],
        value[:n_nodes],
    )


def build_tree(
    X: np.ndarray,
    y: np.ndarray,
    *,
    max_depth: int,
    min_samples_split: float = 2,
    weights: np.ndarray | None = None,
    order: np.ndarray | None = None,
    max_features: int | None = None,
    rng: np.random.Generator | None = None,
) -> dict[str, np.ndarray]:
    """Grow one tree; rows with zero weight are ignored.

    ``order`` may carry a precomputed :func:`presort` of ``X`` (it is
    copied, not modified). ``max_features`` below the column count draws
    a fresh random feature subset at every node from ``rng``.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n, n_feat = X.shape
    w = np.ones(n) if weights is None else np.ascontiguousarray(weights, dtype=np.float64)
    if order is None:
        order = presort(X)
    if weights is not None:
        keep = w[order] > 0
        order = order[keep].reshape(n_feat, -1)
    order = np.array(order, dtype=np.int64, order="C", copy=True)
    if order.shape[1] == 0:
        raise ValueError("tree needs at least one weighted row")

    cap = max_nodes(max_depth, order.shape[1])
    n_sample = n_feat if max_features is None else int(max_features)
    if n_sample < n_feat:
        if rng is None:
            raise ValueError("feature subsampling needs an rng")
        feat_keys = rng.random((cap, n_feat))
    else:
        feat_keys = np.zeros((cap, 0))
        n_sample = n_feat
    feature, threshold, left, right, value = _build(
        X, y, w, order, int(max_depth), float(min_samples_split), n_sample, feat_keys
    )
    return {
        "feature": feature,
        "threshold": threshold,
        "left": left,
        "right": right,
        "value": value,
    }


def tree_leaf_values(
    tree: dict[str, np.ndarray], X: np.ndarray, root: int = 0
) -> np.ndarray:
    feature, threshold = tree["feature"], tree["threshold"]
    left, right, value = tree["left"], tree["right"], tree["value"]
    n = X.shape[0]
    rows = np.arange(n)
    node = np.full(n, root, dtype=np.int64)
    while True:
        f = feature[node]
        internal = f >= 0
        if not internal.any():
            break
        x = X[rows, np.where(internal, f, 0)]
        nxt = np.where(x <= threshold[node], left[node], right[node])
        node = np.where(internal, nxt, node)
    return value[node]
