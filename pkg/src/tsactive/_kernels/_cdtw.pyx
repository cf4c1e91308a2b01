# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Banded dynamic time warping kernel.

Squared local cost, Sakoe-Chiba band of half-width ``radius`` around the
diagonal, two rolling rows.  ``radius >= m`` means unconstrained.
"""

from libc.math cimport INFINITY, sqrt
from libc.stdlib cimport free, malloc


cdef double _band_cost(const double* x, const double* y, Py_ssize_t m,
                       Py_ssize_t r, double* prev, double* curr) noexcept nogil:
    cdef Py_ssize_t i, j, lo, hi, c0, c1
    cdef double d, best, tmp

    for j in range(m):
        prev[j] = INFINITY
        curr[j] = INFINITY

    # row 0
    hi = r if r < m - 1 else m - 1
    d = x[0] - y[0]
    prev[0] = d * d
    for j in range(1, hi + 1):
        d = x[0] - y[j]
        prev[j] = prev[j - 1] + d * d

    for i in range(1, m):
        lo = i - r if i - r > 0 else 0
        hi = i + r if i + r < m - 1 else m - 1
        for j in range(lo, hi + 1):
            best = prev[j]                      # (i-1, j)
            if j > 0:
                tmp = prev[j - 1]               # (i-1, j-1)
                if tmp < best:
                    best = tmp
                tmp = curr[j - 1]               # (i, j-1)
                if tmp < best:
                    best = tmp
            d = x[i] - y[j]
            curr[j] = best + d * d
        # hand the row over; the next row reads prev over [lo-1, hi+1]
        c0 = lo - 1 if lo > 0 else 0
        c1 = hi + 2 if hi + 2 < m else m
        for j in range(c0, c1):
            prev[j] = curr[j]
            curr[j] = INFINITY
    return prev[m - 1]


def band_dtw(const double[::1] x, const double[::1] y, Py_ssize_t radius):
    """Banded DTW distance between equal-length series (sqrt of DP cost)."""
    cdef Py_ssize_t m = x.shape[0]
    if y.shape[0] != m:
        raise ValueError("series lengths differ")
    cdef double* prev = <double*> malloc(m * sizeof(double))
    cdef double* curr = <double*> malloc(m * sizeof(double))
    if prev == NULL or curr == NULL:
        free(prev)
        free(curr)
        raise MemoryError()
    cdef double cost
    try:
        with nogil:
            cost = _band_cost(&x[0], &y[0], m, radius, prev, curr)
    finally:
        free(prev)
        free(curr)
    return sqrt(cost)


def band_dtw_block(const double[:, ::1] data, Py_ssize_t radius,
                   double[:, ::1] out, Py_ssize_t row_start, Py_ssize_t row_stop):
    """Fill out[i, j] = band_dtw(data[i], data[j]) for row_start <= i < row_stop, j > i.

    Each cell is written exactly once; callers mirror the triangle.
    """
    cdef Py_ssize_t n = data.shape[0]
    cdef Py_ssize_t m = data.shape[1]
    cdef Py_ssize_t i, j
    cdef double* prev = <double*> malloc(m * sizeof(double))
    cdef double* curr = <double*> malloc(m * sizeof(double))
    if prev == NULL or curr == NULL:
        free(prev)
        free(curr)
        raise MemoryError()
    try:
        with nogil:
            for i in range(row_start, row_stop):
                for j in range(i + 1, n):
                    out[i, j] = sqrt(_band_cost(&data[i, 0], &data[j, 0], m,
                                                radius, prev, curr))
    finally:
        free(prev)
        free(curr)
