"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``.

Every floating-point operation is performed in the same order as the
compiled loops, so both backends return bitwise-identical results.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def _class_sums(block: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # sequential over classes, matching the C accumulation order
    w = block[:, 0].copy()
    s = block[:, 0] * block[:, 0]
    for k in range(1, block.shape[1]):
        col = block[:, k]
        w = w + col
        s = s + col * col
    return w, s


def best_split(X, y, w, idx, features, n_classes):
    """Best weighted-Gini threshold split of the samples ``idx``.

    Returns ``(feature, threshold, score)`` where score is the summed
    weight-scaled child impurity; ``feature == -1`` if no split exists.
    Candidate order is features as given, thresholds ascending; the first
    strictly smallest score wins.
    """
    idx = np.asarray(idx, dtype=np.intp)
    m = idx.shape[0]
    best_f, best_t, best_s = -1, 0.0, np.inf
    if m < 2:
        return best_f, best_t, best_s
    W = np.zeros((m, n_classes), dtype=np.float64)
    W[np.arange(m), y[idx]] = w[idx]
    total = np.cumsum(W, axis=0)[-1]
    for f in features:
        vals = X[idx, f]
        order = np.argsort(vals, kind="stable")
        sv = vals[order]
        valid = sv[:-1] < sv[1:]
        if not valid.any():
            continue
        left = np.cumsum(W[order], axis=0)[:-1]
        right = total - left
        wl, sl = _class_sums(left)
        wr, sr = _class_sums(right)
        with np.errstate(divide="ignore", invalid="ignore"):
            score = (wl - sl / wl) + (wr - sr / wr)
        score[~valid] = np.inf
        p = int(np.argmin(score))
        if score[p] < best_s:
            thr = (sv[p] + sv[p + 1]) / 2.0
            if thr == sv[p + 1]:
                thr = sv[p]
            best_f, best_t, best_s = int(f), float(thr), float(score[p])
    return best_f, best_t, best_s


def svm_dual_cd(K, y, C, passes):
    """Cyclic dual coordinate ascent for a box-constrained kernel SVM (no bias).

    ``K`` must already include any bias augmentation. Returns the dual
    coefficients alpha.
    """
    n = y.shape[0]
    alpha = np.zeros(n, dtype=np.float64)
    f = np.zeros(n, dtype=np.float64)
    for _ in range(passes):
        for i in range(n):
            yi = y[i]
            g = yi * f[i] - 1.0
            a = alpha[i] - g / K[i, i]
            if a < 0.0:
                a = 0.0
            elif a > C:
                a = C
            delta = a - alpha[i]
            if delta != 0.0:
                alpha[i] = a
                f += (delta * yi) * K[i]
    return alpha
