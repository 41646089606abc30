# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel for one hinge-loss SGD epoch.

Must stay semantically identical to ``_hinge_py.hinge_epoch``; both are
exercised by the same parity tests. The per-example loop is sequential by
construction (each update feeds the next margin), so this is the one place
vectorization cannot help and a C loop pays off.
"""

import numpy as np

cimport numpy as cnp


def hinge_epoch(cnp.ndarray[cnp.float64_t, ndim=1] w_arr,
                double b,
                long step,
                cnp.ndarray[cnp.float64_t, ndim=2] X_arr,
                cnp.ndarray[cnp.float64_t, ndim=1] y_arr,
                cnp.ndarray[cnp.int64_t, ndim=1] order_arr,
                double eta0,
                double lam):
    cdef double[::1] w = w_arr
    cdef double[:, ::1] X = X_arr
    cdef double[::1] y = y_arr
    cdef long[::1] order = order_arr

    cdef Py_ssize_t d = w.shape[0]
    cdef Py_ssize_t n = order.shape[0]
    cdef Py_ssize_t k, j, i
    cdef double eta, margin, score, shrink, a, yi
    cdef double loss_sum = 0.0

    for k in range(n):
        i = order[k]
        yi = y[i]
        eta = eta0 / (1.0 + eta0 * lam * step)
        score = b
        for j in range(d):
            score += w[j] * X[i, j]
        margin = yi * score
        shrink = 1.0 - eta * lam
        if margin < 1.0:
            loss_sum += 1.0 - margin
            a = eta * yi
            for j in range(d):
                w[j] = w[j] * shrink + a * X[i, j]
            b += a
        else:
            for j in range(d):
                w[j] = w[j] * shrink
        step += 1
    return b, step, loss_sum
