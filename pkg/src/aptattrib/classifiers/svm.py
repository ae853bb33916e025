"""One-vs-rest SVMs.

The linear model is trained by full-batch hinge-loss subgradient descent
with step ``1/(lambda t)``, where ``lambda = 1/(C n)``. The RBF model solves
each binary dual with cyclic coordinate updates. Its bias enters as a
constant ``+1`` added to the kernel.
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from .base import softmax_rows


def _one_vs_rest(y, n_classes) -> np.ndarray:
    Y = -np.ones((y.shape[0], n_classes))
    Y[np.arange(y.shape[0]), y] = 1.0
    return Y


def _augment(X):
    return np.hstack([X, np.ones((X.shape[0], 1))])


def fit_linear_svm(X, y, n_classes, hp, seed) -> dict:
    n = X.shape[0]
    Xa = _augment(X)
    Y = _one_vs_rest(y, n_classes)
    lam = 1.0 / (hp.linsvm_c * n)
    W = np.zeros((n_classes, Xa.shape[1]))
    for t in range(1, hp.linsvm_epochs + 1):
        eta = 1.0 / (lam * t)
        viol = (Y * (Xa @ W.T)) < 1.0
        grad = lam * W - ((viol * Y).T @ Xa) / n
        W = W - eta * grad
    return {"weights": W}


def proba_linear_svm(params, X):
    return softmax_rows(_augment(X) @ params["weights"].T)


def rbf_kernel(A, B, gamma) -> np.ndarray:
    sq = (A * A).sum(axis=1)[:, None] + (B * B).sum(axis=1)[None, :] - 2.0 * (A @ B.T)
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


def fit_rbf_svm(X, y, n_classes, hp, seed) -> dict:
    gamma = hp.rbfsvm_gamma if hp.rbfsvm_gamma is not None else 1.0 / X.shape[1]
    K = rbf_kernel(X, X, gamma)
    np.fill_diagonal(K, 1.0)
    K += 1.0
    K = np.ascontiguousarray(K)
    Y = _one_vs_rest(y, n_classes)
    coef = np.empty((X.shape[0], n_classes))
    for c in range(n_classes):
        yc = np.ascontiguousarray(Y[:, c])
        coef[:, c] = kernels.svm_dual_cd(K, yc, float(hp.rbfsvm_c), int(hp.rbfsvm_passes)) * yc
    keep = np.flatnonzero(np.any(coef != 0.0, axis=1))
    return {"support": X[keep].copy(), "coef": coef[keep].copy(), "gamma": float(gamma)}


def margins_rbf_svm(params, X) -> np.ndarray:
    sv = params["support"]
    if sv.shape[0] == 0:
        return np.zeros((X.shape[0], params["coef"].shape[1]))
    return (rbf_kernel(X, sv, params["gamma"]) + 1.0) @ params["coef"]


def proba_rbf_svm(params, X):
    return softmax_rows(margins_rbf_svm(params, X))
