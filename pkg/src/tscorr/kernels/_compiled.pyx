# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled backend for the correlation kernels (see package docstring)."""

from libc.math cimport sqrt

import numpy as np

cimport numpy as cnp

cnp.import_array()


def window_pair_correlations(rows, starts, ends):
    cdef double[:, ::1] m = np.ascontiguousarray(rows, dtype=np.float64)
    cdef long long[::1] ws = np.ascontiguousarray(starts, dtype=np.int64)
    cdef long long[::1] we = np.ascontiguousarray(ends, dtype=np.int64)
    cdef Py_ssize_t r = m.shape[0]
    cdef Py_ssize_t nwin = ws.shape[0]
    cdef Py_ssize_t npairs = r * (r - 1) // 2
    out_arr = np.zeros(nwin * npairs, dtype=np.float64)
    cdef double[::1] out = out_arr

    cdef Py_ssize_t maxw = 0, w, s, e, width, i, t, a, b, pos
    for w in range(nwin):
        if we[w] - ws[w] > maxw:
            maxw = we[w] - ws[w]

    dev_arr = np.empty((r, maxw), dtype=np.float64)
    cdef double[:, ::1] dev = dev_arr
    ss_arr = np.empty(r, dtype=np.float64)
    cdef double[::1] ss = ss_arr
    cdef double mean, acc, d, lo, hi

    pos = 0
    for w in range(nwin):
        s = ws[w]
        e = we[w]
        width = e - s
        # two-pass per row: mean, then deviations and sum of squares;
        # an exactly-constant row is zero-variance by definition, not by
        # whatever the rounded mean leaves behind
        for i in range(r):
            acc = 0.0
            lo = m[i, s]
            hi = m[i, s]
            for t in range(width):
                d = m[i, s + t]
                acc += d
                if d < lo:
                    lo = d
                if d > hi:
                    hi = d
            mean = acc / width
            acc = 0.0
            for t in range(width):
                d = m[i, s + t] - mean
                dev[i, t] = d
                acc += d * d
            ss[i] = 0.0 if lo == hi else acc
        for a in range(r):
            for b in range(a + 1, r):
                if ss[a] > 0.0 and ss[b] > 0.0:
                    acc = 0.0
                    for t in range(width):
                        acc += dev[a, t] * dev[b, t]
                    out[pos] = acc / (sqrt(ss[a]) * sqrt(ss[b]))
                pos += 1
    return out_arr


def row_acf(rows, lags):
    cdef double[:, ::1] m = np.ascontiguousarray(rows, dtype=np.float64)
    cdef long long[::1] lg = np.ascontiguousarray(lags, dtype=np.int64)
    cdef Py_ssize_t n = m.shape[0]
    cdef Py_ssize_t k = m.shape[1]
    cdef Py_ssize_t nlags = lg.shape[0]
    out_arr = np.zeros(n * nlags, dtype=np.float64)
    cdef double[::1] out = out_arr

    dev_arr = np.empty(k, dtype=np.float64)
    cdef double[::1] dev = dev_arr
    cdef Py_ssize_t i, t, j
    cdef long long l
    cdef double mean, acc, den, lo, hi

    for i in range(n):
        acc = 0.0
        lo = m[i, 0]
        hi = m[i, 0]
        for t in range(k):
            den = m[i, t]
            acc += den
            if den < lo:
                lo = den
            if den > hi:
                hi = den
        mean = acc / k
        den = 0.0
        for t in range(k):
            dev[t] = m[i, t] - mean
            den += dev[t] * dev[t]
        if lo == hi:
            den = 0.0
        if den > 0.0:
            for j in range(nlags):
                l = lg[j]
                acc = 0.0
                for t in range(k - l):
                    acc += dev[t] * dev[t + l]
                out[i * nlags + j] = acc / den
    return out_arr
