# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: sparse evaluation and Taylor shifting."""
import numpy as np
cimport cython


def eval_points(const long long[:, ::1] exps, const double complex[::1] coefs,
                const double complex[:, ::1] points, long long maxdeg):
    cdef Py_ssize_t m = exps.shape[0]
    cdef Py_ssize_t n = exps.shape[1]
    cdef Py_ssize_t p = points.shape[0]
    out = np.zeros(p, dtype=np.complex128)
    if m == 0:
        return out
    cdef double complex[::1] o = out
    table = np.empty((n, maxdeg + 1), dtype=np.complex128)
    cdef double complex[:, ::1] pw = table
    cdef Py_ssize_t a, t, j, e
    cdef double complex acc, term
    for a in range(p):
        for j in range(n):
            pw[j, 0] = 1.0
            for e in range(1, maxdeg + 1):
                pw[j, e] = pw[j, e - 1] * points[a, j]
        acc = 0
        for t in range(m):
            term = coefs[t]
            for j in range(n):
                term = term * pw[j, exps[t, j]]
            acc = acc + term
        o[a] = acc
    return out


def taylor_shift(const long long[:, ::1] exps, const double complex[::1] coefs,
                 const double complex[::1] x0, long long maxdeg):
    cdef Py_ssize_t m = exps.shape[0]
    cdef Py_ssize_t n = exps.shape[1]
    cdef Py_ssize_t base = maxdeg + 1
    cdef Py_ssize_t size = base ** n
    out = np.zeros(size, dtype=np.complex128)
    cdef double complex[::1] o = out
    table = np.empty((n, base), dtype=np.complex128)
    cdef double complex[:, ::1] pw = table
    btab = np.ones((base, base), dtype=np.float64)
    cdef double[:, ::1] binom = btab
    strides_arr = np.empty(n, dtype=np.int64)
    cdef long long[::1] strides = strides_arr
    g_arr = np.zeros(n, dtype=np.int64)
    cdef long long[::1] g = g_arr
    cdef Py_ssize_t t, j, e, k, idx
    cdef double complex val
    for j in range(n):
        pw[j, 0] = 1.0
        for e in range(1, base):
            pw[j, e] = pw[j, e - 1] * x0[j]
        strides[j] = base ** (n - 1 - j)
    for e in range(2, base):
        for k in range(1, e):
            binom[e, k] = binom[e - 1, k - 1] + binom[e - 1, k]
    for t in range(m):
        for j in range(n):
            g[j] = 0
        while True:
            val = coefs[t]
            idx = 0
            for j in range(n):
                val = val * (binom[exps[t, j], g[j]] * pw[j, exps[t, j] - g[j]])
                idx += g[j] * strides[j]
            o[idx] = o[idx] + val
            j = n - 1
            while j >= 0:
                g[j] += 1
                if g[j] <= exps[t, j]:
                    break
                g[j] = 0
                j -= 1
            if j < 0:
                break
    return out
