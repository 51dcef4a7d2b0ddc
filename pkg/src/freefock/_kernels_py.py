"""NumPy reference implementations of the finite-section kernels.

A section is stored as ``rows`` (int64, shape ``(T, C)``) and ``coefs``
(complex128, shape ``(T,)``): column ``c`` has entry ``coefs[t]`` in row
``rows[t, c]``.  These functions define the semantics that the compiled
versions in ``_kernels_c`` must reproduce.
"""
import numpy as np


def section_rows(term_len, term_val, col_len, col_val, n):
    """Graded-lex row index of ``f.g`` for every term ``f`` and column ``g``.

    Words are given as ``(length, base-n value)`` pairs.
    """
    term_len = np.asarray(term_len, dtype=np.int64)
    term_val = np.asarray(term_val, dtype=np.int64)
    col_len = np.asarray(col_len, dtype=np.int64)
    col_val = np.asarray(col_val, dtype=np.int64)
    max_len = int(term_len.max(initial=0) + col_len.max(initial=0))
    powers = np.array([n ** k for k in range(max_len + 2)], dtype=np.int64)
    # offsets[k] = number of words shorter than k
    offsets = np.concatenate(([0], np.cumsum(powers[:-1])))
    total = term_len[:, None] + col_len[None, :]
    return offsets[total] + term_val[:, None] * powers[col_len][None, :] + col_val[None, :]


def matvec(rows, coefs, x, n_rows):
    """``y = A x``."""
    contrib = coefs[:, None] * x[None, :]
    flat = rows.ravel()
    re = np.bincount(flat, weights=contrib.real.ravel(), minlength=n_rows)
    im = np.bincount(flat, weights=contrib.imag.ravel(), minlength=n_rows)
    return re + 1j * im


def rmatvec(rows, coefs, y):
    """``x = A^H y``."""
    return (np.conj(coefs)[:, None] * y[rows]).sum(axis=0)


def normal_matvec(rows, coefs, x, n_rows):
    """``A^H A x``."""
    return rmatvec(rows, coefs, matvec(rows, coefs, x, n_rows))


def power_iteration(rows, coefs, n_rows, x0, maxiter, rtol):
    """Power iteration on ``A^H A``.

    Returns ``(theta, x, iterations, converged)`` where ``theta`` is the
    Rayleigh quotient ``||A x||^2`` of the returned unit vector ``x``;
    it never exceeds ``sigma_max(A)**2``.
    """
    x = np.asarray(x0, dtype=np.complex128).copy()
    x /= np.linalg.norm(x)
    theta = 0.0
    for it in range(1, maxiter + 1):
        z = normal_matvec(rows, coefs, x, n_rows)
        theta = float(np.vdot(x, z).real)
        if theta <= 0.0:
            return 0.0, x, it, True
        res = np.linalg.norm(z - theta * x) / theta
        if res < rtol:
            return theta, x, it, True
        x = z / np.linalg.norm(z)
    z = normal_matvec(rows, coefs, x, n_rows)
    return float(np.vdot(x, z).real), x, maxiter, False
