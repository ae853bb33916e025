"""Multi-class AdaBoost (SAMME) over depth-1 Gini stumps."""

from __future__ import annotations

import math

import numpy as np

from .base import softmax_rows
from .tree import grow_tree, tree_proba


def fit_adaboost(X, y, n_classes, hp, seed) -> dict:
    n = X.shape[0]
    w = np.full(n, 1.0 / n)
    stumps, alphas, errors = [], [], []
    trace = [w.copy()]
    for _ in range(hp.adaboost_rounds):
        stump = grow_tree(X, y, w, n_classes, max_depth=1)
        miss = np.argmax(tree_proba(stump, X), axis=1) != y
        err = float(w[miss].sum() / w.sum())
        if err >= 1.0 - 1.0 / n_classes:
            if not stumps:
                # nothing better than chance; keep the stump so the model is usable
                stumps.append(stump)
                alphas.append(1.0)
                errors.append(err)
            break
        stumps.append(stump)
        errors.append(err)
        if err <= 0.0:
            alphas.append(1.0)
            break
        alpha = math.log((1.0 - err) / err) + math.log(n_classes - 1)
        alphas.append(alpha)
        w = w * np.exp(alpha * miss)
        w = w / w.sum()
        trace.append(w.copy())
    return {
        "stumps": stumps,
        "alphas": np.array(alphas, dtype=np.float64),
        "errors": np.array(errors, dtype=np.float64),
        "weight_trace": np.vstack(trace),
        "n_classes": n_classes,
    }


def class_scores(params, X) -> np.ndarray:
    """Alpha-weighted votes per class."""
    scores = np.zeros((X.shape[0], params["n_classes"]))
    rows = np.arange(X.shape[0])
    for stump, alpha in zip(params["stumps"], params["alphas"]):
        scores[rows, np.argmax(tree_proba(stump, X), axis=1)] += alpha
    return scores


def proba_adaboost(params, X):
    k = params["n_classes"]
    decision = class_scores(params, X) / params["alphas"].sum()
    return softmax_rows(decision / (k - 1))
