# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Same signatures and semantics as ``_fallback``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, sqrt
from scipy.linalg.cython_blas cimport dgemv

cnp.import_array()

cdef enum:
    SE = 0
    MATERN52 = 1
    LINEAR = 2


def cross_kernel(int kind, X, Y, inv_ls, double sv):
    cdef const double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef const double[:, ::1] Yv = np.ascontiguousarray(Y, dtype=np.float64)
    cdef const double[::1] w = np.ascontiguousarray(inv_ls, dtype=np.float64)
    cdef Py_ssize_t n = Xv.shape[0], m = Yv.shape[0], d = Xv.shape[1]
    out = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double[:, ::1] Xs = np.empty((n, d), dtype=np.float64)
    cdef double[:, ::1] Ys = np.empty((m, d), dtype=np.float64)
    cdef Py_ssize_t i, j, k
    cdef double acc, diff, r
    cdef double s5 = sqrt(5.0)
    with nogil:
        for i in range(n):
            for k in range(d):
                Xs[i, k] = Xv[i, k] * w[k]
        for j in range(m):
            for k in range(d):
                Ys[j, k] = Yv[j, k] * w[k]
        for i in range(n):
            for j in range(m):
                acc = 0.0
                if kind == LINEAR:
                    for k in range(d):
                        acc = acc + Xs[i, k] * Ys[j, k]
                    o[i, j] = sv * acc
                else:
                    for k in range(d):
                        diff = Xs[i, k] - Ys[j, k]
                        acc = acc + diff * diff
                    if kind == SE:
                        o[i, j] = sv * exp(-0.5 * acc)
                    else:
                        r = sqrt(acc)
                        o[i, j] = sv * (1.0 + s5 * r + (5.0 / 3.0) * acc) * exp(-s5 * r)
    return out


def grid_append(double[:, ::1] V, Py_ssize_t n, l, kz, double d, double vnew,
                double[::1] mean, double[::1] var):
    cdef const double[::1] lv = np.ascontiguousarray(l, dtype=np.float64)
    cdef const double[::1] kv = np.ascontiguousarray(kz, dtype=np.float64)
    cdef int G = <int>V.shape[1]
    cdef int nn = <int>n
    cdef int one = 1
    cdef double minus_one = -1.0, plus_one = 1.0
    cdef Py_ssize_t q
    cdef double row
    with nogil:
        for q in range(G):
            V[n, q] = kv[q]
        if nn > 0:
            # row-major V[:n] is a column-major (G, n) block: V[n] -= V[:n]^T l
            dgemv(b"N", &G, &nn, &minus_one, &V[0, 0], &G, <double*>&lv[0], &one,
                  &plus_one, &V[n, 0], &one)
        for q in range(G):
            row = V[n, q] / d
            V[n, q] = row
            mean[q] = mean[q] + vnew * row
            var[q] = var[q] - row * row
            if var[q] < 0.0:
                var[q] = 0.0


def context_widths(mean, std, double beta):
    cdef const double[:, ::1] mu = np.ascontiguousarray(mean, dtype=np.float64)
    cdef const double[:, ::1] sd = np.ascontiguousarray(std, dtype=np.float64)
    cdef Py_ssize_t gx = mu.shape[0], ga = mu.shape[1]
    widths = np.empty(gx, dtype=np.float64)
    best = np.empty(gx, dtype=np.intp)
    cdef double[::1] wv = widths
    cdef Py_ssize_t[::1] bv = best
    cdef Py_ssize_t i, j, arg
    cdef double up, lo, max_up, max_lo
    with nogil:
        for i in range(gx):
            max_up = mu[i, 0] + beta * sd[i, 0]
            max_lo = mu[i, 0] - beta * sd[i, 0]
            arg = 0
            for j in range(1, ga):
                up = mu[i, j] + beta * sd[i, j]
                lo = mu[i, j] - beta * sd[i, j]
                if up > max_up:
                    max_up = up
                    arg = j
                if lo > max_lo:
                    max_lo = lo
            wv[i] = max_up - max_lo
            bv[i] = arg
    return widths, best


def envelope_absorb(double[:, ::1] values, mean, std, double beta):
    cdef const double[:, ::1] mu = np.ascontiguousarray(mean, dtype=np.float64)
    cdef const double[:, ::1] sd = np.ascontiguousarray(std, dtype=np.float64)
    cdef Py_ssize_t i, j
    cdef double lo
    with nogil:
        for i in range(values.shape[0]):
            for j in range(values.shape[1]):
                lo = mu[i, j] - beta * sd[i, j]
                if lo > values[i, j]:
                    values[i, j] = lo
