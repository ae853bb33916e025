"""Gaussian naive Bayes with log-space posteriors."""

from __future__ import annotations

import math

import numpy as np


def _sorted_mean(A: np.ndarray) -> np.ndarray:
    # column sums over sorted values do not depend on row order
    return np.sort(A, axis=0).sum(axis=0) / A.shape[0]


def _sorted_var(A: np.ndarray, mean: np.ndarray) -> np.ndarray:
    return _sorted_mean((A - mean) ** 2)


def fit_gaussian_nb(X, y, n_classes, hp, seed) -> dict:
    n, d = X.shape
    max_var = float(_sorted_var(X, _sorted_mean(X)).max())
    # floor keeps the smoothing term positive when every feature is constant
    eps = hp.gnb_var_smoothing * (max_var if max_var > 0.0 else 1.0)
    means = np.zeros((n_classes, d))
    variances = np.zeros((n_classes, d))
    counts = np.bincount(y, minlength=n_classes).astype(np.float64)
    for c in range(n_classes):
        Xc = X[y == c]
        means[c] = _sorted_mean(Xc)
        variances[c] = _sorted_var(Xc, means[c]) + eps
    return {
        "means": means,
        "variances": variances,
        "log_prior": np.log(counts / n),
        "epsilon": eps,
    }


def joint_log_likelihood(params, X) -> np.ndarray:
    means, var = params["means"], params["variances"]
    norm = -0.5 * np.log(2.0 * math.pi * var).sum(axis=1)
    out = np.empty((X.shape[0], means.shape[0]))
    for c in range(means.shape[0]):
        out[:, c] = params["log_prior"][c] + norm[c] - 0.5 * (((X - means[c]) ** 2) / var[c]).sum(axis=1)
    return out


def proba_gaussian_nb(params, X):
    jll = joint_log_likelihood(params, X)
    jll -= jll.max(axis=1, keepdims=True)
    p = np.exp(jll)
    return p / p.sum(axis=1, keepdims=True)
