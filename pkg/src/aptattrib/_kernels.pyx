# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: weighted-Gini split search and kernel-SVM dual sweeps.

Arithmetic order mirrors ``_kernels_py`` exactly; see that module for the
contracts.
"""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free, qsort
from libc.math cimport INFINITY

cnp.import_array()

BACKEND = "cython"


cdef struct Item:
    double value
    Py_ssize_t pos


cdef int _cmp_item(const void* a, const void* b) noexcept nogil:
    cdef const Item* x = <const Item*> a
    cdef const Item* y = <const Item*> b
    if x.value < y.value:
        return -1
    if x.value > y.value:
        return 1
    # position tiebreak reproduces a stable argsort
    if x.pos < y.pos:
        return -1
    if x.pos > y.pos:
        return 1
    return 0


def best_split(const double[:, ::1] X, const cnp.intp_t[::1] y, const double[::1] w,
               idx, features, int n_classes):
    cdef const cnp.intp_t[::1] idx_v = np.ascontiguousarray(idx, dtype=np.intp)
    cdef const cnp.intp_t[::1] feat_v = np.ascontiguousarray(features, dtype=np.intp)
    cdef Py_ssize_t m = idx_v.shape[0]
    cdef Py_ssize_t nf = feat_v.shape[0]
    cdef Py_ssize_t best_f = -1
    cdef double best_t = 0.0
    cdef double best_s = INFINITY
    if m < 2:
        return best_f, best_t, best_s

    cdef Item* items = <Item*> malloc(m * sizeof(Item))
    cdef double* total = <double*> malloc(n_classes * sizeof(double))
    cdef double* left = <double*> malloc(n_classes * sizeof(double))
    if items == NULL or total == NULL or left == NULL:
        free(items); free(total); free(left)
        raise MemoryError()

    cdef Py_ssize_t i, p, k, fi, f, s, cls
    cdef double wl, sl, wr, sr, r, score, thr, v0, v1
    try:
        with nogil:
            for k in range(n_classes):
                total[k] = 0.0
            for i in range(m):
                s = idx_v[i]
                total[y[s]] += w[s]
            for fi in range(nf):
                f = feat_v[fi]
                for i in range(m):
                    items[i].value = X[idx_v[i], f]
                    items[i].pos = i
                qsort(items, m, sizeof(Item), _cmp_item)
                if not (items[0].value < items[m - 1].value):
                    continue
                for k in range(n_classes):
                    left[k] = 0.0
                for p in range(m - 1):
                    s = idx_v[items[p].pos]
                    left[y[s]] += w[s]
                    v0 = items[p].value
                    v1 = items[p + 1].value
                    if not (v0 < v1):
                        continue
                    wl = left[0]
                    sl = left[0] * left[0]
                    r = total[0] - left[0]
                    wr = r
                    sr = r * r
                    for k in range(1, n_classes):
                        wl = wl + left[k]
                        sl = sl + left[k] * left[k]
                        r = total[k] - left[k]
                        wr = wr + r
                        sr = sr + r * r
                    score = (wl - sl / wl) + (wr - sr / wr)
                    if score < best_s:
                        thr = (v0 + v1) / 2.0
                        if thr == v1:
                            thr = v0
                        best_s = score
                        best_t = thr
                        best_f = f
    finally:
        free(items)
        free(total)
        free(left)
    return int(best_f), float(best_t), float(best_s)


def svm_dual_cd(const double[:, ::1] K, const double[::1] y, double C, int passes):
    cdef Py_ssize_t n = y.shape[0]
    alpha_arr = np.zeros(n, dtype=np.float64)
    f_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] alpha = alpha_arr
    cdef double[::1] f = f_arr
    cdef Py_ssize_t it, i, j
    cdef double yi, g, a, delta, t
    with nogil:
        for it in range(passes):
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
                    t = delta * yi
                    for j in range(n):
                        f[j] = f[j] + t * K[i, j]
    return alpha_arr
