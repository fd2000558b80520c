# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled spline kernels.

Natural cubic second derivatives via a Thomas solve with the
factorization shared across batch rows, and batched piecewise cubic
evaluation.  Contracts match honest_esp._kernels._fallback.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def natural_m(x, y):
    """Second derivatives of the natural cubic spline through (x, y)."""
    x_arr = np.ascontiguousarray(x, dtype=np.float64)
    y_arr = np.asarray(y, dtype=np.float64)
    shape = y_arr.shape
    cdef Py_ssize_t T = x_arr.shape[0]
    flat = np.ascontiguousarray(y_arr.reshape(-1, T))
    out = np.zeros_like(flat)
    if T >= 3:
        _natural_m_batch(x_arr, flat, out)
    return out.reshape(shape)


cdef void _natural_m_batch(const double[::1] x, const double[:, ::1] y, double[:, ::1] out):
    cdef Py_ssize_t T = x.shape[0]
    cdef Py_ssize_t K = T - 2
    cdef Py_ssize_t R = y.shape[0]
    cdef Py_ssize_t r, j
    cdef double denom
    h_arr = np.empty(T - 1)
    cprime_arr = np.empty(K)
    dinv_arr = np.empty(K)
    work_arr = np.empty(K)
    cdef double[::1] h = h_arr
    cdef double[::1] cprime = cprime_arr
    cdef double[::1] dinv = dinv_arr
    cdef double[::1] work = work_arr

    for j in range(T - 1):
        h[j] = x[j + 1] - x[j]
    # Shared LU of the tridiagonal system: diag (h[j]+h[j+1])/3,
    # off-diagonals h[j]/6.  Forward sweep coefficients reused per row.
    denom = (h[0] + h[1]) / 3.0
    dinv[0] = 1.0 / denom
    if K > 1:
        cprime[0] = (h[1] / 6.0) * dinv[0]
    for j in range(1, K):
        denom = (h[j] + h[j + 1]) / 3.0 - (h[j] / 6.0) * cprime[j - 1]
        dinv[j] = 1.0 / denom
        if j < K - 1:
            cprime[j] = (h[j + 1] / 6.0) * dinv[j]

    for r in range(R):
        work[0] = ((y[r, 2] - y[r, 1]) / h[1] - (y[r, 1] - y[r, 0]) / h[0]) * dinv[0]
        for j in range(1, K):
            work[j] = ((y[r, j + 2] - y[r, j + 1]) / h[j + 1]
                       - (y[r, j + 1] - y[r, j]) / h[j]
                       - (h[j] / 6.0) * work[j - 1]) * dinv[j]
        out[r, K] = work[K - 1]
        for j in range(K - 2, -1, -1):
            out[r, j + 1] = work[j] - cprime[j] * out[r, j + 2]


def eval_cubic(x, y, m, q, nu=0):
    """Evaluate the piecewise cubic (or a derivative) at query points."""
    x_arr = np.ascontiguousarray(x, dtype=np.float64)
    y_arr = np.asarray(y, dtype=np.float64)
    m_arr = np.asarray(m, dtype=np.float64)
    q_arr = np.ascontiguousarray(q, dtype=np.float64)
    cdef Py_ssize_t T = x_arr.shape[0]
    cdef Py_ssize_t M = q_arr.shape[0]
    shape = y_arr.shape
    yf = np.ascontiguousarray(y_arr.reshape(-1, T))
    mf = np.ascontiguousarray(m_arr.reshape(-1, T))
    out = np.empty((yf.shape[0], M))
    idx = np.clip(np.searchsorted(x_arr, q_arr, side="right") - 1, 0, T - 2)
    idx_arr = np.ascontiguousarray(idx, dtype=np.intp)
    _eval_cubic_batch(x_arr, yf, mf, q_arr, idx_arr, int(nu), out)
    return out.reshape(shape[:-1] + (M,))


cdef void _eval_cubic_batch(const double[::1] x, const double[:, ::1] y, const double[:, ::1] m,
                            const double[::1] q, const Py_ssize_t[::1] idx, int nu,
                            double[:, ::1] out):
    cdef Py_ssize_t R = y.shape[0]
    cdef Py_ssize_t M = q.shape[0]
    cdef Py_ssize_t r, k, i
    cdef double h, A, B, wy0, wy1, wm0, wm1
    for k in range(M):
        i = idx[k]
        h = x[i + 1] - x[i]
        A = (x[i + 1] - q[k]) / h
        B = (q[k] - x[i]) / h
        if nu == 0:
            wy0 = A
            wy1 = B
            wm0 = (h * h / 6.0) * (A * A * A - A)
            wm1 = (h * h / 6.0) * (B * B * B - B)
        elif nu == 1:
            wy0 = -1.0 / h
            wy1 = 1.0 / h
            wm0 = (h / 6.0) * (1.0 - 3.0 * A * A)
            wm1 = (h / 6.0) * (3.0 * B * B - 1.0)
        else:
            wy0 = 0.0
            wy1 = 0.0
            wm0 = A
            wm1 = B
        for r in range(R):
            out[r, k] = (wy0 * y[r, i] + wy1 * y[r, i + 1]
                         + wm0 * m[r, i] + wm1 * m[r, i + 1])
