# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled inner-loop kernels: batched mixture distances and weight descent.

Twin of _kernels_py; identical math with C loops and libc qsort. Banks
arrive pre-permuted, so a mixture evaluation is weight-sum then re-sort.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport fabs
from libc.stdlib cimport free, malloc

cnp.import_array()

BACKEND = "cython"


cdef inline void _insertion_sort(double* a, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t k, j
    cdef double v
    for k in range(1, n):
        v = a[k]
        j = k - 1
        while j >= 0 and a[j] > v:
            a[j + 1] = a[j]
            j -= 1
        a[j + 1] = v


cdef double _sorted_w1(const double[:, ::1] live, double* buf,
                       Py_ssize_t c, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t k
    cdef double acc = 0.0
    _insertion_sort(buf, n)
    for k in range(n):
        acc += fabs(live[c, k] - buf[k])
    return acc


cdef double _distance_one(const double[:, ::1] live,
                          const double[:, :, ::1] banks_p,
                          const double* w, double* buf) noexcept nogil:
    cdef Py_ssize_t r = banks_p.shape[0]
    cdef Py_ssize_t C = live.shape[0]
    cdef Py_ssize_t n = live.shape[1]
    cdef Py_ssize_t c, k, i
    cdef double s, acc = 0.0
    for c in range(C):
        for k in range(n):
            s = 0.0
            for i in range(r):
                s += w[i] * banks_p[i, c, k]
            buf[k] = s
        acc += _sorted_w1(live, buf, c, n)
    return acc / (C * n)


cdef inline void _insertion_sort_tracked(double* a, Py_ssize_t* idx,
                                         Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t k, j, vi
    cdef double v
    for k in range(1, n):
        v = a[k]
        vi = idx[k]
        j = k - 1
        while j >= 0 and a[j] > v:
            a[j + 1] = a[j]
            idx[j + 1] = idx[j]
            j -= 1
        a[j + 1] = v
        idx[j + 1] = vi


cdef double _distance_shifted(const double[:, ::1] live,
                              const double[:, :, ::1] banks_p,
                              const double* base, const Py_ssize_t* order,
                              Py_ssize_t i, double delta,
                              double* buf) noexcept nogil:
    # Distance at the base mixture plus delta on reference i's weight.
    # base holds the per-channel weighted sums already sorted; order maps
    # each sorted slot back to its bank column, so the shifted values come
    # out nearly sorted and the insertion sort runs in almost linear time.
    cdef Py_ssize_t C = live.shape[0]
    cdef Py_ssize_t n = live.shape[1]
    cdef Py_ssize_t c, k
    cdef double acc = 0.0
    for c in range(C):
        for k in range(n):
            buf[k] = base[c * n + k] + delta * banks_p[i, c, order[c * n + k]]
        acc += _sorted_w1(live, buf, c, n)
    return acc / (C * n)


def distance_batch(const double[:, ::1] live,
                   const double[:, :, ::1] banks_p,
                   const double[:, ::1] W):
    """Channel-averaged W1 from live samples to each weight row of W."""
    cdef Py_ssize_t m = W.shape[0]
    cdef Py_ssize_t n = live.shape[1]
    cdef Py_ssize_t j
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] out_v = out
    cdef double* buf = <double*> malloc(n * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    try:
        with nogil:
            for j in range(m):
                out_v[j] = _distance_one(live, banks_p, &W[j, 0], buf)
    finally:
        free(buf)
    return out


def descend(const double[:, ::1] live,
            const double[:, :, ::1] banks_p,
            w0,
            double lr=0.5,
            int steps=20,
            double h=1e-2):
    """Projected finite-difference gradient descent on the mixture weights."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w_arr = np.array(
        w0, dtype=np.float64, copy=True)
    cdef double[::1] w = w_arr
    cdef Py_ssize_t r = w.shape[0]
    cdef Py_ssize_t C = live.shape[0]
    cdef Py_ssize_t n = live.shape[1]
    cdef Py_ssize_t step, i, c, k
    cdef double d_hi, d_lo, wi, hi, lo, s
    cdef double final
    cdef double* buf = <double*> malloc(n * sizeof(double))
    cdef double* base = <double*> malloc(C * n * sizeof(double))
    cdef Py_ssize_t* order = <Py_ssize_t*> malloc(C * n * sizeof(Py_ssize_t))
    cdef double* g = <double*> malloc(r * sizeof(double))
    if buf == NULL or base == NULL or order == NULL or g == NULL:
        free(buf); free(base); free(order); free(g)
        raise MemoryError()
    try:
        with nogil:
            for c in range(C):
                for k in range(n):
                    order[c * n + k] = k
            for step in range(steps):
                # Base mixture at the current weights, sorted per channel.
                # The order array persists across steps, so each re-sort
                # starts from a nearly sorted layout.
                for c in range(C):
                    for k in range(n):
                        s = 0.0
                        for i in range(r):
                            s += w[i] * banks_p[i, c, order[c * n + k]]
                        base[c * n + k] = s
                    _insertion_sort_tracked(&base[c * n], &order[c * n], n)
                for i in range(r):
                    wi = w[i]
                    hi = wi + h
                    if hi > 1.0:
                        hi = 1.0
                    lo = wi - h
                    if lo < 0.0:
                        lo = 0.0
                    d_hi = _distance_shifted(live, banks_p, base, order,
                                             i, hi - wi, buf)
                    d_lo = _distance_shifted(live, banks_p, base, order,
                                             i, lo - wi, buf)
                    g[i] = (d_hi - d_lo) / (hi - lo)
                for i in range(r):
                    wi = w[i] - lr * g[i]
                    if wi < 0.0:
                        wi = 0.0
                    elif wi > 1.0:
                        wi = 1.0
                    w[i] = wi
            final = _distance_one(live, banks_p, &w[0], buf)
    finally:
        free(buf)
        free(base)
        free(order)
        free(g)
    return w_arr, final
