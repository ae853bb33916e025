"""CART trees (weighted Gini) and a bootstrap random forest."""

from __future__ import annotations

import math

import numpy as np

from .. import kernels
from .base import counter_rng


def grow_tree(X, y, w, n_classes, *, min_split=2, max_depth=None, max_features=None, rng=None) -> dict:
    """Grow a tree on samples with positive weight.

    ``max_features`` below ``d`` samples that many features per node from
    ``rng`` (sorted before the scan, so ``max_features == d`` matches the
    plain tree exactly).
    """
    n, d = X.shape
    w = np.ascontiguousarray(w, dtype=np.float64)
    all_features = np.arange(d, dtype=np.intp)
    m_feat = d if max_features is None else min(max_features, d)

    feature, threshold, left, right, value = [], [], [], [], []

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(None)
        return len(feature) - 1

    root_idx = np.flatnonzero(w > 0).astype(np.intp)
    stack = [(new_node(), root_idx, 0)]
    while stack:
        nid, idx, depth = stack.pop()
        counts = np.bincount(y[idx], weights=w[idx], minlength=n_classes)
        value[nid] = counts / counts.sum()
        if (
            np.count_nonzero(counts) <= 1
            or idx.shape[0] < min_split
            or (max_depth is not None and depth >= max_depth)
        ):
            continue
        if m_feat < d:
            feats = np.sort(rng.choice(d, size=m_feat, replace=False)).astype(np.intp)
        else:
            feats = all_features
        f, thr, _ = kernels.best_split(X, y, w, idx, feats, n_classes)
        if f < 0:
            continue
        go_left = X[idx, f] <= thr
        li, ri = new_node(), new_node()
        feature[nid], threshold[nid], left[nid], right[nid] = f, thr, li, ri
        # right pushed first so the left subtree is expanded first
        stack.append((ri, idx[~go_left], depth + 1))
        stack.append((li, idx[go_left], depth + 1))

    return {
        "feature": np.array(feature, dtype=np.int64),
        "threshold": np.array(threshold, dtype=np.float64),
        "left": np.array(left, dtype=np.int64),
        "right": np.array(right, dtype=np.int64),
        "value": np.vstack(value),
    }


def apply_tree(tree: dict, X: np.ndarray) -> np.ndarray:
    """Leaf index reached by every row of ``X``."""
    node = np.zeros(X.shape[0], dtype=np.int64)
    feature, threshold, left, right = tree["feature"], tree["threshold"], tree["left"], tree["right"]
    rows = np.arange(X.shape[0])
    active = feature[node] >= 0
    while active.any():
        r = rows[active]
        nd = node[r]
        go_left = X[r, feature[nd]] <= threshold[nd]
        node[r] = np.where(go_left, left[nd], right[nd])
        active = feature[node] >= 0
    return node


def tree_proba(tree: dict, X: np.ndarray) -> np.ndarray:
    return tree["value"][apply_tree(tree, X)]


def fit_decision_tree(X, y, n_classes, hp, seed) -> dict:
    return {"tree": grow_tree(X, y, np.ones(X.shape[0]), n_classes, min_split=hp.tree_min_split)}


def proba_decision_tree(params, X):
    return tree_proba(params["tree"], X)


def fit_random_forest(X, y, n_classes, hp, seed) -> dict:
    n, d = X.shape
    m_feat = hp.forest_features if hp.forest_features is not None else math.ceil(math.sqrt(d))
    trees = []
    for t in range(hp.forest_trees):
        rng = counter_rng(seed, t)
        if hp.forest_bootstrap:
            w = np.bincount(rng.integers(0, n, size=n), minlength=n).astype(np.float64)
        else:
            w = np.ones(n)
        trees.append(
            grow_tree(X, y, w, n_classes, min_split=hp.tree_min_split, max_features=m_feat, rng=rng)
        )
    return {"trees": trees}


def proba_random_forest(params, X):
    trees = params["trees"]
    acc = tree_proba(trees[0], X)
    for tree in trees[1:]:
        acc = acc + tree_proba(tree, X)
    return acc / len(trees)
