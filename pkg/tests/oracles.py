"""Independent reference computations used as test oracles.

Nothing here imports the solvers under test; only the value types
(``FreePoly``) and plain numpy/scipy are used.
"""
import itertools
import math

import numpy as np
import scipy.linalg

from freefock.freepoly import FreePoly


def all_words(n, N):
    out = []
    for k in range(N + 1):
        out.extend(itertools.product(range(1, n + 1), repeat=k))
    return out


def dense_section(phi, N):
    """Section matrix built column by column from explicit word products."""
    cols = all_words(phi.n, N)
    rows = all_words(phi.n, N + max(phi.degree, 0))
    pos = {w: i for i, w in enumerate(rows)}
    A = np.zeros((len(rows), len(cols)), dtype=complex)
    for j, g in enumerate(cols):
        for f, a in phi.terms.items():
            A[pos[tuple(f) + tuple(g)], j] += a
    return A


def gram_defect_bruteforce(phi, L):
    """max |<phi e_f, phi e_g> - delta_fg| over words of length <= L, by expanding products."""
    words = all_words(phi.n, L)
    vecs = []
    for g in words:
        vecs.append({f + g: a for f, a in phi.terms.items()})
    worst = 0.0
    for i, u in enumerate(vecs):
        for j in range(i, len(vecs)):
            v = vecs[j]
            s = sum(c * v[w].conjugate() for w, c in u.items() if w in v)
            worst = max(worst, abs(s - (1.0 if i == j else 0.0)))
    return worst


def toeplitz_section(coeffs, N):
    """(N + d + 1) x (N + 1) lower-triangular Toeplitz matrix of sum c_k z^k."""
    d = len(coeffs) - 1
    col = np.zeros(N + d + 1, dtype=complex)
    col[: d + 1] = coeffs
    row = np.zeros(N + 1, dtype=complex)
    row[0] = coeffs[0]
    return scipy.linalg.toeplitz(col, row)


def circle_sup(coeffs, points=10_000):
    """max |sum c_k z^k| over a grid on the unit circle."""
    z = np.exp(2j * np.pi * np.arange(points) / points)
    return float(np.max(np.abs(np.polyval(list(coeffs)[::-1], z))))


def series_divide(num, den, K):
    """Power-series long division num/den, first K+1 coefficients."""
    num = list(num) + [0] * (K + 1)
    out = []
    rem = [complex(c) for c in num[: K + 1]]
    for k in range(K + 1):
        c = rem[k] / den[0]
        out.append(c)
        for j, d in enumerate(den):
            if k + j <= K:
                rem[k + j] -= c * d
    return out


def geometric_inverse_bruteforce(phi, N):
    """Sum of phi^k over k with truncation, by repeated multiplication."""
    acc = {(): 1.0 + 0j}
    power = {(): 1.0 + 0j}
    for _ in range(N + 1):
        nxt = {}
        for f, a in power.items():
            for g, b in phi.terms.items():
                h = f + g
                if len(h) <= N:
                    nxt[h] = nxt.get(h, 0) + a * b
        power = nxt
        for h, c in power.items():
            acc[h] = acc.get(h, 0) + c
    return FreePoly(phi.n, acc)


def ls_distance(A, b):
    """Residual norm of the least-squares problem via an independent QR solve."""
    if A.shape[1] == 0:
        return float(np.linalg.norm(b))
    Q, R = np.linalg.qr(A)
    return float(np.linalg.norm(b - Q @ (Q.conj().T @ b)))
