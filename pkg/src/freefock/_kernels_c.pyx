# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled finite-section kernels; same contracts as ``_kernels_py``."""
import numpy as np

from libc.math cimport sqrt


def section_rows(term_len, term_val, col_len, col_val, long long n):
    cdef long long[:] tl = np.ascontiguousarray(term_len, dtype=np.int64)
    cdef long long[:] tv = np.ascontiguousarray(term_val, dtype=np.int64)
    cdef long long[:] cl = np.ascontiguousarray(col_len, dtype=np.int64)
    cdef long long[:] cv = np.ascontiguousarray(col_val, dtype=np.int64)
    cdef Py_ssize_t T = tl.shape[0], C = cl.shape[0], t, c
    cdef long long max_len = 0, k
    for t in range(T):
        if tl[t] > max_len:
            max_len = tl[t]
    cdef long long max_col = 0
    for c in range(C):
        if cl[c] > max_col:
            max_col = cl[c]
    max_len += max_col
    pw = np.empty(max_len + 2, dtype=np.int64)
    off = np.empty(max_len + 2, dtype=np.int64)
    cdef long long[:] p = pw
    cdef long long[:] o = off
    p[0] = 1
    o[0] = 0
    for k in range(1, max_len + 2):
        p[k] = p[k - 1] * n
        o[k] = o[k - 1] + p[k - 1]
    out = np.empty((T, C), dtype=np.int64)
    cdef long long[:, :] r = out
    with nogil:
        for t in range(T):
            for c in range(C):
                r[t, c] = o[tl[t] + cl[c]] + tv[t] * p[cl[c]] + cv[c]
    return out


cdef inline void _normal(long long[:, :] rows, double complex[:] coefs,
                         double complex[:] x, double complex[:] y,
                         double complex[:] z) noexcept nogil:
    cdef Py_ssize_t T = rows.shape[0], C = rows.shape[1], t, c, i
    cdef double complex acc
    for i in range(y.shape[0]):
        y[i] = 0
    for t in range(T):
        for c in range(C):
            y[rows[t, c]] += coefs[t] * x[c]
    for c in range(C):
        acc = 0
        for t in range(T):
            acc += coefs[t].conjugate() * y[rows[t, c]]
        z[c] = acc


def matvec(rows, coefs, x, Py_ssize_t n_rows):
    cdef long long[:, :] r = np.ascontiguousarray(rows, dtype=np.int64)
    cdef double complex[:] a = np.ascontiguousarray(coefs, dtype=np.complex128)
    cdef double complex[:] xv = np.ascontiguousarray(x, dtype=np.complex128)
    out = np.zeros(n_rows, dtype=np.complex128)
    cdef double complex[:] y = out
    cdef Py_ssize_t T = r.shape[0], C = r.shape[1], t, c
    with nogil:
        for t in range(T):
            for c in range(C):
                y[r[t, c]] += a[t] * xv[c]
    return out


def rmatvec(rows, coefs, y):
    cdef long long[:, :] r = np.ascontiguousarray(rows, dtype=np.int64)
    cdef double complex[:] a = np.ascontiguousarray(coefs, dtype=np.complex128)
    cdef double complex[:] yv = np.ascontiguousarray(y, dtype=np.complex128)
    cdef Py_ssize_t T = r.shape[0], C = r.shape[1], t, c
    out = np.empty(C, dtype=np.complex128)
    cdef double complex[:] z = out
    cdef double complex acc
    with nogil:
        for c in range(C):
            acc = 0
            for t in range(T):
                acc += a[t].conjugate() * yv[r[t, c]]
            z[c] = acc
    return out


def normal_matvec(rows, coefs, x, Py_ssize_t n_rows):
    cdef long long[:, :] r = np.ascontiguousarray(rows, dtype=np.int64)
    cdef double complex[:] a = np.ascontiguousarray(coefs, dtype=np.complex128)
    cdef double complex[:] xv = np.ascontiguousarray(x, dtype=np.complex128)
    cdef double complex[:] y = np.empty(n_rows, dtype=np.complex128)
    out = np.empty(r.shape[1], dtype=np.complex128)
    cdef double complex[:] z = out
    with nogil:
        _normal(r, a, xv, y, z)
    return out


def power_iteration(rows, coefs, Py_ssize_t n_rows, x0, long maxiter, double rtol):
    cdef long long[:, :] r = np.ascontiguousarray(rows, dtype=np.int64)
    cdef double complex[:] a = np.ascontiguousarray(coefs, dtype=np.complex128)
    cdef Py_ssize_t C = r.shape[1], c
    xa = np.array(x0, dtype=np.complex128, copy=True)
    cdef double complex[:] x = xa
    cdef double complex[:] y = np.empty(n_rows, dtype=np.complex128)
    cdef double complex[:] z = np.empty(C, dtype=np.complex128)
    cdef double nrm = 0, theta = 0, res
    cdef double complex d
    cdef long it = 0
    cdef bint converged = False
    with nogil:
        for c in range(C):
            nrm += x[c].real * x[c].real + x[c].imag * x[c].imag
        nrm = sqrt(nrm)
        for c in range(C):
            x[c] = x[c] / nrm
        while it < maxiter:
            it += 1
            _normal(r, a, x, y, z)
            theta = 0
            for c in range(C):
                theta += (x[c].conjugate() * z[c]).real
            if theta <= 0:
                theta = 0
                converged = True
                break
            res = 0
            nrm = 0
            for c in range(C):
                d = z[c] - theta * x[c]
                res += d.real * d.real + d.imag * d.imag
                nrm += z[c].real * z[c].real + z[c].imag * z[c].imag
            if sqrt(res) / theta < rtol:
                converged = True
                break
            nrm = sqrt(nrm)
            for c in range(C):
                x[c] = z[c] / nrm
        if not converged:
            _normal(r, a, x, y, z)
            theta = 0
            for c in range(C):
                theta += (x[c].conjugate() * z[c]).real
    return theta, xa, it, bool(converged)
