# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels in ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, sin

cnp.import_array()


def tube_counts(samples, poles, double sin_w):
    cdef const double[:, ::1] X = np.ascontiguousarray(samples, dtype=np.float64)
    cdef const double[:, ::1] P = np.ascontiguousarray(poles, dtype=np.float64)
    cdef Py_ssize_t N = X.shape[0], n = P.shape[0], k, i
    out = np.zeros(N, dtype=np.int32)
    cdef int[::1] cnt = out
    cdef double x0, x1, x2
    cdef int c
    with nogil:
        for k in range(N):
            x0 = X[k, 0]
            x1 = X[k, 1]
            x2 = X[k, 2]
            c = 0
            for i in range(n):
                if fabs(x0 * P[i, 0] + x1 * P[i, 1] + x2 * P[i, 2]) <= sin_w:
                    c += 1
            cnt[k] = c
    return out


def pair_hits(samples, a, b, double sin_w):
    cdef const double[:, ::1] X = np.ascontiguousarray(samples, dtype=np.float64)
    cdef double a0 = a[0], a1 = a[1], a2 = a[2]
    cdef double b0 = b[0], b1 = b[1], b2 = b[2]
    cdef Py_ssize_t N = X.shape[0], k
    cdef long hits = 0
    with nogil:
        for k in range(N):
            if fabs(X[k, 0] * a0 + X[k, 1] * a1 + X[k, 2] * a2) <= sin_w:
                if fabs(X[k, 0] * b0 + X[k, 1] * b1 + X[k, 2] * b2) <= sin_w:
                    hits += 1
    return int(hits)


def band_hits(z, phi, double sin_alpha, double cos_alpha, double sin_w):
    cdef const double[::1] Z = np.ascontiguousarray(z, dtype=np.float64)
    cdef const double[::1] F = np.ascontiguousarray(phi, dtype=np.float64)
    cdef Py_ssize_t N = Z.shape[0], k
    cdef long hits = 0
    cdef double zk
    with nogil:
        for k in range(N):
            zk = Z[k]
            if fabs(sqrt(1.0 - zk * zk) * sin(F[k]) * sin_alpha + zk * cos_alpha) <= sin_w:
                hits += 1
    return int(hits)


def greedy_fill(candidates, double[:, ::1] accepted, Py_ssize_t n_acc,
                double max_dot, long reject_run, long max_reject):
    cdef const double[:, ::1] C = np.ascontiguousarray(candidates, dtype=np.float64)
    cdef Py_ssize_t M = C.shape[0], n = accepted.shape[0], k, i
    cdef Py_ssize_t consumed = 0
    cdef bint ok
    with nogil:
        for k in range(M):
            if n_acc >= n or reject_run >= max_reject:
                break
            consumed += 1
            ok = True
            for i in range(n_acc):
                if fabs(C[k, 0] * accepted[i, 0] + C[k, 1] * accepted[i, 1]
                        + C[k, 2] * accepted[i, 2]) > max_dot:
                    ok = False
                    break
            if ok:
                accepted[n_acc, 0] = C[k, 0]
                accepted[n_acc, 1] = C[k, 1]
                accepted[n_acc, 2] = C[k, 2]
                n_acc += 1
                reject_run = 0
            else:
                reject_run += 1
    return n_acc, consumed, reject_run
