# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see ``_fallback.py`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, fabs
from scipy.special.cython_special cimport ndtr, ndtri

cnp.import_array()

cdef double INV_SQRT_2PI = 0.3989422804014327


cdef inline Py_ssize_t _find(const double[::1] cdf, double u) noexcept nogil:
    # first index with cdf[j] > u, clipped to the last atom
    cdef Py_ssize_t lo = 0, hi = cdf.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if cdf[mid] <= u:
            lo = mid + 1
        else:
            hi = mid
    if lo >= cdf.shape[0]:
        lo = cdf.shape[0] - 1
    return lo


def compound_sums(counts, cdf, atoms, u):
    cdef const cnp.int64_t[::1] c = np.ascontiguousarray(counts, dtype=np.int64)
    cdef const double[::1] cd = np.ascontiguousarray(cdf, dtype=np.float64)
    cdef const double[::1] at = np.ascontiguousarray(atoms, dtype=np.float64)
    cdef const double[::1] uu = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t m = c.shape[0], i, j, pos = 0, total = 0
    for i in range(m):
        total += c[i]
    if total != uu.shape[0]:
        raise ValueError("need exactly one uniform per claim draw")
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] o = out
    cdef double acc
    with nogil:
        for i in range(m):
            acc = 0.0
            for j in range(c[i]):
                acc += at[_find(cd, uu[pos])]
                pos += 1
            o[i] = acc
    return out


def coupled_gaps(n, m, b, cdf, atoms, u):
    cdef const cnp.int64_t[::1] nn = np.ascontiguousarray(n, dtype=np.int64)
    cdef const cnp.int64_t[::1] mm = np.ascontiguousarray(m, dtype=np.int64)
    cdef const cnp.uint8_t[::1] bb = np.ascontiguousarray(b, dtype=np.uint8)
    cdef const double[::1] cd = np.ascontiguousarray(cdf, dtype=np.float64)
    cdef const double[::1] at = np.ascontiguousarray(atoms, dtype=np.float64)
    cdef const double[::1] uu = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t size = nn.shape[0], i, j, k, pos = 0, total = 0
    for i in range(size):
        if bb[i]:
            total += mm[i] if mm[i] >= 1 else 1
        else:
            total += mm[i] - nn[i] if mm[i] >= nn[i] else nn[i] - mm[i]
    if total != uu.shape[0]:
        raise ValueError("need exactly one uniform per claim draw")
    out = np.empty(size, dtype=np.float64)
    cdef double[::1] o = out
    cdef double acc, first
    with nogil:
        for i in range(size):
            acc = 0.0
            if bb[i]:
                k = mm[i] if mm[i] >= 1 else 1
                first = <double>(nn[i] - 1) if mm[i] >= 1 else <double>nn[i]
                acc += first * at[_find(cd, uu[pos])]
                pos += 1
                for j in range(1, k):
                    acc += -1.0 * at[_find(cd, uu[pos])]
                    pos += 1
            else:
                k = mm[i] - nn[i] if mm[i] >= nn[i] else nn[i] - mm[i]
                for j in range(k):
                    acc += 1.0 * at[_find(cd, uu[pos])]
                    pos += 1
            o[i] = fabs(acc)
    return out


def cdf_l1(xa, pa, xb, pb):
    cdef const double[::1] a = np.ascontiguousarray(xa, dtype=np.float64)
    cdef const double[::1] wa = np.ascontiguousarray(pa, dtype=np.float64)
    cdef const double[::1] b = np.ascontiguousarray(xb, dtype=np.float64)
    cdef const double[::1] wb = np.ascontiguousarray(pb, dtype=np.float64)
    cdef Py_ssize_t i = 0, j = 0, na = a.shape[0], nb = b.shape[0]
    cdef double fa = 0.0, fb = 0.0, x, nxt, total = 0.0
    with nogil:
        while i < na or j < nb:
            if j >= nb or (i < na and a[i] < b[j]):
                x = a[i]
            else:
                x = b[j]
            while i < na and a[i] == x:
                fa += wa[i]
                i += 1
            while j < nb and b[j] == x:
                fb += wb[j]
                j += 1
            if i < na or j < nb:
                if j >= nb or (i < na and a[i] < b[j]):
                    nxt = a[i]
                else:
                    nxt = b[j]
                total += (nxt - x) * fabs(fa - fb)
    return total


cdef inline double _G(double x) noexcept nogil:
    return x * ndtr(x) + INV_SQRT_2PI * exp(-0.5 * x * x)


def normal_l1(z, F):
    cdef const double[::1] zz = np.ascontiguousarray(z, dtype=np.float64)
    cdef const double[::1] ff = np.ascontiguousarray(F, dtype=np.float64)
    cdef Py_ssize_t n = zz.shape[0], i
    if n == 0:
        raise ValueError("empty support")
    cdef double total, a, b, c, Ga, Gb, xs, Gx, last
    with nogil:
        last = zz[n - 1]
        total = _G(zz[0]) + INV_SQRT_2PI * exp(-0.5 * last * last) - last * ndtr(-last)
        for i in range(n - 1):
            a = zz[i]
            b = zz[i + 1]
            c = ff[i]
            Ga = _G(a)
            Gb = _G(b)
            if ndtr(b) <= c:
                total += c * (b - a) - (Gb - Ga)
            elif ndtr(a) >= c:
                total += (Gb - Ga) - c * (b - a)
            else:
                xs = ndtri(c)
                Gx = _G(xs)
                total += (c * (xs - a) - (Gx - Ga)) + ((Gb - Gx) - c * (b - xs))
    return total
