# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops; same signatures and update order as ``_pykernels``.

Dot products are summed left to right, so results can differ from the
NumPy fallback in the last bits but never between runs.
"""

import numpy as np

from libc.stdint cimport int64_t


cdef inline double _dot(const double[:, ::1] X, Py_ssize_t j, const double[::1] w,
                        Py_ssize_t d) noexcept nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t q
    for q in range(d):
        acc += X[j, q] * w[q]
    return acc


def sgd_steps(const double[:, ::1] X, const double[::1] y, const int64_t[::1] idx,
              const double[::1] alphas, w, double reg):
    cdef double[::1] out = np.array(w, dtype=np.float64)
    cdef Py_ssize_t d = X.shape[1], T = idx.shape[0], s, q, j
    cdef double r, a, two_reg = 2.0 * reg
    with nogil:
        for s in range(T):
            j = idx[s]
            a = alphas[s]
            r = 2.0 * (_dot(X, j, out, d) - y[j])
            for q in range(d):
                out[q] = out[q] - a * (r * X[j, q] + two_reg * out[q])
    return np.asarray(out)


def dane_sgd_steps(const double[:, ::1] X, const double[::1] y, const int64_t[::1] idx,
                   const double[::1] alphas, w, double reg, const double[::1] shift,
                   double mu, const double[::1] anchor):
    cdef double[::1] out = np.array(w, dtype=np.float64)
    cdef Py_ssize_t d = X.shape[1], T = idx.shape[0], s, q, j
    cdef double r, a, g, two_reg = 2.0 * reg
    with nogil:
        for s in range(T):
            j = idx[s]
            a = alphas[s]
            r = 2.0 * (_dot(X, j, out, d) - y[j])
            for q in range(d):
                g = r * X[j, q] + two_reg * out[q]
                g = g - shift[q] + mu * (out[q] - anchor[q])
                out[q] = out[q] - a * g
    return np.asarray(out)


def svrg_steps(const double[:, ::1] X, const double[::1] y, const int64_t[::1] idx,
               double alpha, w, const double[::1] anchor, double reg,
               const double[::1] eta_g, double mu, bint average):
    cdef double[::1] out = np.array(w, dtype=np.float64)
    cdef double[::1] acc = np.zeros(X.shape[1], dtype=np.float64)
    cdef Py_ssize_t d = X.shape[1], T = idx.shape[0], s, q, j
    cdef double r_cur, r_snap, g, two_reg = 2.0 * reg
    with nogil:
        for s in range(T):
            j = idx[s]
            r_cur = 2.0 * (_dot(X, j, out, d) - y[j])
            r_snap = 2.0 * (_dot(X, j, anchor, d) - y[j])
            for q in range(d):
                g = (r_cur * X[j, q] + two_reg * out[q]) - (r_snap * X[j, q] + two_reg * anchor[q])
                g = g + eta_g[q] + mu * (out[q] - anchor[q])
                out[q] = out[q] - alpha * g
                if average:
                    acc[q] = acc[q] + out[q]
        if average:
            for q in range(d):
                acc[q] = acc[q] / T
    if average:
        return np.asarray(acc)
    return np.asarray(out)
