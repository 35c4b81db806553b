# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled batched Thomas solve (no pivoting; diagonally dominant input)."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def solve_tridiag_batch(dl, d, du, rhs):
    dl_a = np.ascontiguousarray(np.atleast_2d(np.asarray(dl, dtype=np.float64)))
    d_a = np.ascontiguousarray(np.atleast_2d(np.asarray(d, dtype=np.float64)))
    du_a = np.ascontiguousarray(np.atleast_2d(np.asarray(du, dtype=np.float64)))
    rhs_a = np.ascontiguousarray(np.atleast_2d(np.asarray(rhs, dtype=np.float64)))

    cdef double[:, ::1] dlv = dl_a
    cdef double[:, ::1] dv = d_a
    cdef double[:, ::1] duv = du_a
    cdef double[:, ::1] bv = rhs_a

    cdef Py_ssize_t m = dv.shape[0]
    cdef Py_ssize_t n = dv.shape[1]

    out = np.empty((m, n), dtype=np.float64)
    work = np.empty(n, dtype=np.float64)
    cdef double[:, ::1] xv = out
    cdef double[::1] cp = work

    cdef Py_ssize_t i, j
    cdef double denom

    with nogil:
        for i in range(m):
            denom = dv[i, 0]
            cp[0] = duv[i, 0] / denom
            xv[i, 0] = bv[i, 0] / denom
            for j in range(1, n):
                denom = dv[i, j] - dlv[i, j] * cp[j - 1]
                cp[j] = duv[i, j] / denom
                xv[i, j] = (bv[i, j] - dlv[i, j] * xv[i, j - 1]) / denom
            for j in range(n - 2, -1, -1):
                xv[i, j] = xv[i, j] - cp[j] * xv[i, j + 1]

    return out
