# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled pair-loop kernels. Mirrors ``_pykernels`` exactly in semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, fabs, sqrt, atan2, M_PI

cnp.import_array()

cdef enum:
    GAUSSIAN = 0
    EPANECHNIKOV = 1
    UNIFORM = 2


cdef inline double _weight(int family, double u1, double u2, double reach) nogil:
    if fabs(u1) > reach or fabs(u2) > reach:
        return 0.0
    if family == GAUSSIAN:
        return exp(-0.5 * (u1 * u1 + u2 * u2))
    if family == EPANECHNIKOV:
        return 0.5625 * (1.0 - u1 * u1) * (1.0 - u2 * u2)
    return 0.25


def kernel_sums(const double[:, ::1] locs, const double[::1] vals, const double[:, ::1] lags,
                int family, double bandwidth, double reach):
    """Weighted squared-increment sums and weight sums per lag.

    Each unordered pair contributes at both orientations ``d`` and ``-d``.
    ``reach`` is the kernel support radius in bandwidth units.
    Returns ``(num, den)`` arrays of length k.
    """
    cdef Py_ssize_t n = locs.shape[0]
    cdef Py_ssize_t k = lags.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] num_arr = np.zeros(k)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] den_arr = np.zeros(k)
    cdef double[::1] num = num_arr
    cdef double[::1] den = den_arr
    cdef cnp.ndarray[cnp.intp_t, ndim=1] order_arr = np.argsort(np.asarray(locs[:, 0]), kind="stable")
    cdef cnp.intp_t[::1] order = order_arr
    cdef double span = reach * bandwidth
    cdef double max1 = 0.0, max2 = 0.0
    cdef Py_ssize_t a, b, i, j, l
    cdef double xi, yi, vi, d1, d2, diff, sq, w, h1, h2
    for l in range(k):
        if fabs(lags[l, 0]) > max1:
            max1 = fabs(lags[l, 0])
        if fabs(lags[l, 1]) > max2:
            max2 = fabs(lags[l, 1])
    max1 += span
    max2 += span
    with nogil:
        for a in range(n):
            i = order[a]
            xi = locs[i, 0]
            yi = locs[i, 1]
            vi = vals[i]
            for b in range(a + 1, n):
                j = order[b]
                d1 = locs[j, 0] - xi
                if d1 > max1:
                    break
                d2 = locs[j, 1] - yi
                if fabs(d2) > max2:
                    continue
                diff = vi - vals[j]
                sq = diff * diff
                for l in range(k):
                    h1 = lags[l, 0]
                    h2 = lags[l, 1]
                    w = _weight(family, (h1 - d1) / bandwidth, (h2 - d2) / bandwidth, reach)
                    w += _weight(family, (h1 + d1) / bandwidth, (h2 + d2) / bandwidth, reach)
                    if w != 0.0:
                        num[l] += w * sq
                        den[l] += w
    return num_arr, den_arr


def directional_sums(const double[:, ::1] locs, const double[::1] vals, const double[::1] angles,
                     double tolerance, const double[::1] edges):
    """Squared-increment sums and pair counts per (direction, distance bin).

    Angles are in degrees measured from the x axis, taken modulo 180. Bins are
    half-open ``[lo, hi)`` except the last, which is closed.
    """
    cdef Py_ssize_t n = locs.shape[0]
    cdef Py_ssize_t na = angles.shape[0]
    cdef Py_ssize_t nb = edges.shape[0] - 1
    cdef cnp.ndarray[cnp.float64_t, ndim=2] sums_arr = np.zeros((na, nb))
    cdef cnp.ndarray[cnp.int64_t, ndim=2] counts_arr = np.zeros((na, nb), dtype=np.int64)
    cdef double[:, ::1] sums = sums_arr
    cdef cnp.int64_t[:, ::1] counts = counts_arr
    cdef double lo = edges[0]
    cdef double hi = edges[nb]
    # pairs are visited in x order so a row can stop once dx exceeds the last edge
    cdef cnp.intp_t[::1] order = np.argsort(np.asarray(locs[:, 0]), kind="stable")
    cdef double[:, ::1] xy = np.ascontiguousarray(np.asarray(locs)[order])
    cdef double[::1] v = np.ascontiguousarray(np.asarray(vals)[order])
    cdef Py_ssize_t i, j, a, lo_b, hi_b, mid, bin_
    cdef double d1, d2, dist, theta, delta, diff, sq
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                d1 = xy[j, 0] - xy[i, 0]
                if d1 > hi:
                    break
                d2 = xy[j, 1] - xy[i, 1]
                dist = sqrt(d1 * d1 + d2 * d2)
                if dist < lo or dist > hi:
                    continue
                if dist == hi:
                    bin_ = nb - 1
                else:
                    # largest bin_ with edges[bin_] <= dist
                    lo_b = 0
                    hi_b = nb
                    while hi_b - lo_b > 1:
                        mid = (lo_b + hi_b) // 2
                        if edges[mid] <= dist:
                            lo_b = mid
                        else:
                            hi_b = mid
                    bin_ = lo_b
                theta = atan2(d2, d1) * 180.0 / M_PI
                theta = theta % 180.0
                if theta < 0.0:
                    theta += 180.0
                diff = v[i] - v[j]
                sq = diff * diff
                for a in range(na):
                    delta = fabs(theta - angles[a]) % 180.0
                    if 180.0 - delta < delta:
                        delta = 180.0 - delta
                    if delta <= tolerance:
                        sums[a, bin_] += sq
                        counts[a, bin_] += 1
    return sums_arr, counts_arr
