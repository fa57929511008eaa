# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops in ``_pykernels``.

Results (including witness order and floating point expressions) match the
numpy fallback exactly.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs
from libc.stdint cimport uint64_t, int32_t, int64_t

cnp.import_array()

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil
    int __builtin_ctzll(unsigned long long) nogil


def distributivity_violations(table, Py_ssize_t max_witnesses):
    cdef cnp.ndarray[int32_t, ndim=3, mode="c"] t = np.ascontiguousarray(table, dtype=np.int32)
    cdef Py_ssize_t n = t.shape[0]
    cdef int32_t[:, :, ::1] tv = t
    cdef int32_t[::1] col = np.empty(n, dtype=np.int32)
    cdef Py_ssize_t x, y, z, u, v, kept = 0
    cdef int64_t count = 0
    cdef int32_t cy
    wit = np.empty((max(max_witnesses, 0), 5), dtype=np.int64)
    cdef int64_t[:, ::1] wv = wit
    for u in range(n):
        for v in range(n):
            for x in range(n):
                col[x] = tv[x, u, v]
            for x in range(n):
                for y in range(n):
                    cy = col[y]
                    for z in range(n):
                        if col[tv[x, y, z]] != tv[x, cy, col[z]]:
                            if kept < max_witnesses:
                                wv[kept, 0] = x
                                wv[kept, 1] = y
                                wv[kept, 2] = z
                                wv[kept, 3] = u
                                wv[kept, 4] = v
                                kept += 1
                            count += 1
    return int(count), wit[:kept].copy()


def interval_bitsets(dist, bint exact, double rel_tol):
    cdef cnp.ndarray[double, ndim=2, mode="c"] d = np.ascontiguousarray(dist, dtype=np.float64)
    cdef double[:, ::1] dv = d
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t words = max(1, (n + 63) // 64)
    out = np.zeros((n, n, words), dtype=np.uint64)
    cdef uint64_t[:, :, ::1] ov = out
    cdef Py_ssize_t x, y, z
    cdef double s, target, scale
    for x in range(n):
        for y in range(n):
            target = dv[x, y]
            scale = target if target > 1.0 else 1.0
            for z in range(n):
                s = dv[x, z] + dv[y, z]
                if exact:
                    if s == target:
                        ov[x, y, z >> 6] |= (<uint64_t>1) << (z & 63)
                elif fabs(s - target) <= rel_tol * scale:
                    ov[x, y, z >> 6] |= (<uint64_t>1) << (z & 63)
    return out


def median_scan(bits, Py_ssize_t x):
    cdef uint64_t[:, :, ::1] bv = np.ascontiguousarray(bits, dtype=np.uint64)
    cdef Py_ssize_t n = bv.shape[0]
    cdef Py_ssize_t words = bv.shape[2]
    out = np.empty((n, n), dtype=np.int32)
    cdef int32_t[:, ::1] ov = out
    cdef Py_ssize_t y, z, w, cnt, pos
    cdef uint64_t word
    for y in range(n):
        for z in range(n):
            cnt = 0
            pos = -1
            for w in range(words):
                word = bv[x, y, w] & bv[y, z, w] & bv[x, z, w]
                if word:
                    cnt += __builtin_popcountll(word)
                    if pos < 0:
                        pos = w * 64 + __builtin_ctzll(word)
            if cnt == 0:
                ov[y, z] = -1
            elif cnt == 1:
                ov[y, z] = <int32_t>pos
            else:
                ov[y, z] = -2
    return out


def four_point_delta(dist):
    cdef double[:, ::1] d = np.ascontiguousarray(dist, dtype=np.float64)
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t x, y, z, w
    cdef double s1, s2, s3, hi, lo, mid, best = 0.0, gap, bx = 0.0
    for x in range(n):
        for y in range(x, n):
            bx = -1.0
            for z in range(n):
                for w in range(n):
                    s1 = d[x, y] + d[z, w]
                    s2 = d[x, z] + d[y, w]
                    s3 = d[x, w] + d[y, z]
                    hi = s1 if s1 > s2 else s2
                    if s3 > hi:
                        hi = s3
                    lo = s1 if s1 < s2 else s2
                    if s3 < lo:
                        lo = s3
                    mid = s1 + s2 + s3 - hi - lo
                    gap = hi - mid
                    if gap > bx:
                        bx = gap
            if bx / 2.0 > best:
                best = bx / 2.0
    return best


def minmax_centers(side_dist):
    cdef double[:, :, ::1] s = np.ascontiguousarray(side_dist, dtype=np.float64)
    cdef Py_ssize_t n = s.shape[0]
    centers = np.empty((n, n, n), dtype=np.int32)
    quality = np.empty((n, n, n), dtype=np.float64)
    cdef int32_t[:, :, ::1] cv = centers
    cdef double[:, :, ::1] qv = quality
    cdef Py_ssize_t x, y, z, w, arg
    cdef double m, best
    for x in range(n):
        for y in range(n):
            for z in range(n):
                arg = 0
                best = 0.0
                for w in range(n):
                    m = s[x, y, w]
                    if s[x, z, w] > m:
                        m = s[x, z, w]
                    if s[y, z, w] > m:
                        m = s[y, z, w]
                    if w == 0 or m < best:
                        best = m
                        arg = w
                cv[x, y, z] = <int32_t>arg
                qv[x, y, z] = best
    return centers, quality
