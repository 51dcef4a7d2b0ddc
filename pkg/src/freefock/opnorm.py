"""Finite sections of left multiplication and multiplier-norm estimates.

The finite section of degree ``N`` of ``phi`` is the matrix of
``p -> phi (x) p`` restricted to ``deg p <= N``.  Its largest singular value
is a lower bound for ``||phi||_inf`` that increases to it with ``N``; its
smallest singular value decreases to the best constant ``delta`` with
``||phi (x) p||_2 >= delta ||p||_2``.

Small sections use dense SVD, one-letter sections a banded Hermitian
eigensolver, and the rest Lanczos on the sparse normal matrix with power
iteration (compiled kernel when available) as a fallback.  Every iterative
``sigma_max`` is the square root of a Rayleigh quotient, hence a genuine
lower bound for the section norm.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from freefock import kernels
from freefock.errors import ConvergenceError, PreconditionError, ResourceError
from freefock.freepoly import (
    FreePoly,
    TruncatedSeries,
    coerce_poly,
    compress_alphabet,
    count_words,
    flip,
    index_word,
    l1_upper_bound,
)

log = logging.getLogger(__name__)

DEFAULT_COLUMN_CAP = 500_000
DENSE_MAX_COLUMNS = 600
POWER_MAXITER = 10_000
POWER_RTOL = 1e-10
LANCZOS_TOL = 1e-13
LANCZOS_MAXITER = 20_000
_INDEX_LIMIT = 2 ** 62


def _encode(words, n):
    """(length, base-n value) arrays for words, letters shifted to 0..n-1."""
    lens = np.fromiter((len(w) for w in words), dtype=np.int64, count=len(words))
    vals = np.empty(len(words), dtype=np.int64)
    for i, w in enumerate(words):
        v = 0
        for a in w:
            v = v * n + (a - 1)
        vals[i] = v
    return lens, vals


def _all_columns(n: int, N: int):
    lens = np.concatenate([np.full(n ** k, k, dtype=np.int64) for k in range(N + 1)])
    vals = np.concatenate([np.arange(n ** k, dtype=np.int64) for k in range(N + 1)])
    return lens, vals


@dataclass(frozen=True, eq=False)
class FiniteSection:
    """Sparse matrix of left multiplication by ``poly`` on words of length ``<= N``.

    Columns are all words of length ``<= source_degree`` in graded-lex
    order.  Only rows that can be nonzero are stored (``row_index`` holds
    their global graded-lex indices); the omitted rows are identically zero
    and do not affect singular values.
    """

    poly: FreePoly
    source_degree: int
    col_index: np.ndarray
    row_index: np.ndarray
    rows: np.ndarray
    coefs: np.ndarray
    tail_bound: float = 0.0

    @property
    def n(self) -> int:
        return self.poly.n

    @property
    def shape(self) -> tuple:
        return (len(self.row_index), len(self.col_index))

    @property
    def full_row_count(self) -> int:
        return count_words(self.n, self.source_degree + max(self.poly.degree, 0))

    def matvec(self, x):
        return kernels.matvec(self.rows, self.coefs, np.asarray(x, dtype=np.complex128), self.shape[0])

    def rmatvec(self, y):
        return kernels.rmatvec(self.rows, self.coefs, np.asarray(y, dtype=np.complex128))

    def normal_matvec(self, x):
        return kernels.normal_matvec(self.rows, self.coefs, np.asarray(x, dtype=np.complex128), self.shape[0])

    def to_sparse(self) -> sp.csc_matrix:
        T, C = self.rows.shape
        data = np.repeat(self.coefs, C)
        cols = np.tile(np.arange(C), T)
        return sp.csc_matrix((data, (self.rows.ravel(), cols)), shape=self.shape)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=np.complex128)
        C = self.shape[1]
        for t in range(self.rows.shape[0]):
            out[self.rows[t], np.arange(C)] += self.coefs[t]
        if not np.iscomplexobj(self.coefs) or not np.any(self.coefs.imag):
            return out.real.copy()
        return out

    def column_words(self) -> list:
        return [index_word(int(i), self.n) for i in self.col_index]

    def row_words(self) -> list:
        return [index_word(int(i), self.n) for i in self.row_index]

    def column(self, j: int) -> FreePoly:
        """Column ``j`` as a polynomial (equals ``poly (x) e_g``)."""
        vec = np.zeros(self.shape[0], dtype=np.complex128)
        np.add.at(vec, self.rows[:, j], self.coefs)
        nz = np.nonzero(vec)[0]
        return FreePoly._raw(self.n, {index_word(int(self.row_index[i]), self.n): complex(vec[i]) for i in nz}, prune=0.0)

    def singular_values(self) -> np.ndarray:
        """All singular values, descending (dense; moderate sections only).

        Above ``DENSE_MAX_COLUMNS`` the eigenvalues of the normal matrix are
        used instead of an SVD, which is faster but only accurate to about
        ``1e-8`` in absolute terms for singular values near zero.
        """
        C = self.shape[1]
        if C > 8 * DENSE_MAX_COLUMNS:
            raise ResourceError("section too large for a dense decomposition")
        if C <= DENSE_MAX_COLUMNS:
            return np.linalg.svd(self.to_dense(), compute_uv=False)
        A = self.to_sparse()
        w = np.linalg.eigvalsh((A.conj().T @ A).toarray())
        return np.sqrt(np.clip(w, 0.0, None))[::-1]


def finite_section(phi, N: int, cap: int = DEFAULT_COLUMN_CAP) -> FiniteSection:
    """Finite section of degree ``N`` of left multiplication by ``phi``.

    For a :class:`TruncatedSeries` the polynomial part is used and its
    ``tail_bound`` is carried on the section.
    """
    if N < 0:
        raise PreconditionError("section degree N must be >= 0")
    tail = phi.tail_bound if isinstance(phi, TruncatedSeries) else 0.0
    poly = coerce_poly(phi)
    n = poly.n
    n_cols = count_words(n, N)
    if n_cols > cap:
        raise ResourceError(f"section has {n_cols} columns, cap is {cap}")
    if count_words(n, N + max(poly.degree, 0) + 1) >= _INDEX_LIMIT:
        raise ResourceError("word indices overflow 64-bit integers")
    col_len, col_val = _all_columns(n, N)
    offsets = np.array([count_words(n, k - 1) for k in range(N + 1)], dtype=np.int64)
    col_index = offsets[col_len] + col_val
    items = poly.items()
    if not items:
        empty = np.zeros((0, n_cols), dtype=np.int64)
        return FiniteSection(poly, N, col_index, np.zeros(0, dtype=np.int64), empty,
                             np.zeros(0, dtype=np.complex128), tail)
    t_len, t_val = _encode([w for w, _ in items], n)
    coefs = np.array([c for _, c in items], dtype=np.complex128)
    glob = kernels.section_rows(t_len, t_val, col_len, col_val, n)
    row_index, local = np.unique(glob, return_inverse=True)
    return FiniteSection(poly, N, col_index, row_index, local.reshape(glob.shape).astype(np.int64), coefs, tail)


def _start_vector(C: int) -> np.ndarray:
    rng = np.random.default_rng(20240611)
    return np.ones(C) + 0.1 * (rng.standard_normal(C) + 1j * rng.standard_normal(C))


def _rayleigh(sec: FiniteSection, x) -> float:
    x = x / np.linalg.norm(x)
    return max(float(np.vdot(x, sec.normal_matvec(x)).real), 0.0)


def _normal_sparse(sec: FiniteSection) -> sp.csc_matrix:
    A = sec.to_sparse()
    return (A.conj().T @ A).tocsc()


def _normal_banded(sec: FiniteSection) -> np.ndarray:
    """Upper banded storage of ``A^H A`` for a one-letter section.

    With one letter the section is Toeplitz and ``A^H A`` has bandwidth
    ``deg phi``; columns are already in increasing degree.
    """
    M = _normal_sparse(sec).todia()
    C = sec.shape[1]
    u = max(sec.poly.degree - sec.poly.min_degree, 0)
    band = np.zeros((u + 1, C), dtype=np.complex128)
    for k in range(u + 1):
        # superdiagonal k lands in row u - k, shifted right by k
        diag = M.diagonal(k)
        band[u - k, k:] = diag
    if not np.any(band.imag):
        band = band.real.copy()
    return band


def _banded_eig(sec: FiniteSection, which: str) -> float:
    C = sec.shape[1]
    i = C - 1 if which == "max" else 0
    w = scipy.linalg.eigvals_banded(_normal_banded(sec), select="i", select_range=(i, i))
    return max(float(w[0]), 0.0)


def _power_sigma_max(sec: FiniteSection, x0=None) -> tuple:
    C = sec.shape[1]
    x0 = _start_vector(C) if x0 is None else x0
    theta, x, iters, converged = kernels.power_iteration(
        sec.rows, sec.coefs, sec.shape[0], x0, POWER_MAXITER, POWER_RTOL)
    log.debug("power iteration: %d steps, converged=%s", iters, converged)
    return theta, x, converged


def sigma_max(sec: FiniteSection, method: str = "auto") -> tuple:
    """``(sigma_max, converged)`` for a finite section.

    ``method`` is one of ``"auto"``, ``"dense"``, ``"banded"`` (one
    letter only), ``"lanczos"`` or ``"power"``.  ``"auto"`` picks dense SVD
    for small sections, the banded solver for one letter and Lanczos on the
    sparse normal matrix otherwise, falling back to power iteration.
    Iterative results are square roots of Rayleigh quotients, so they never
    exceed the true section norm.
    """
    C = sec.shape[1]
    if sec.coefs.size == 0:
        return 0.0, True
    if method == "auto":
        if C <= DENSE_MAX_COLUMNS:
            method = "dense"
        elif sec.n == 1:
            method = "banded"
        else:
            method = "lanczos"
    if method == "dense":
        return float(np.linalg.svd(sec.to_dense(), compute_uv=False)[0]), True
    if method == "banded":
        if sec.n != 1:
            raise PreconditionError("banded solver needs a one-letter section")
        return math.sqrt(_banded_eig(sec, "max")), True
    if method == "power":
        theta, _, converged = _power_sigma_max(sec)
        return math.sqrt(theta), converged
    if method != "lanczos":
        raise PreconditionError(f"unknown method {method!r}")
    try:
        _, vec = spla.eigsh(_normal_sparse(sec), k=1, which="LA", v0=_start_vector(C),
                            tol=LANCZOS_TOL, maxiter=LANCZOS_MAXITER)
        return math.sqrt(_rayleigh(sec, vec[:, 0])), True
    except spla.ArpackNoConvergence as exc:
        log.debug("Lanczos stalled; continuing with power iteration")
        x0 = exc.eigenvectors[:, 0] if exc.eigenvectors.size else None
        theta, _, converged = _power_sigma_max(sec, x0)
        return math.sqrt(theta), converged


def sigma_min(sec: FiniteSection, method: str = "auto") -> tuple:
    """``(sigma_min, converged)``; iterative values are Rayleigh upper bounds."""
    C = sec.shape[1]
    if sec.coefs.size == 0:
        return 0.0, True
    if method == "auto":
        if C <= DENSE_MAX_COLUMNS:
            method = "dense"
        elif sec.n == 1:
            method = "banded"
        else:
            method = "lanczos"
    if method == "dense":
        return float(np.linalg.svd(sec.to_dense(), compute_uv=False)[-1]), True
    if method == "banded":
        if sec.n != 1:
            raise PreconditionError("banded solver needs a one-letter section")
        return math.sqrt(_banded_eig(sec, "min")), True
    if method != "lanczos":
        raise PreconditionError(f"unknown method {method!r}")
    try:
        _, vec = spla.eigsh(_normal_sparse(sec), k=1, sigma=0.0, which="LM", tol=LANCZOS_TOL,
                            v0=_start_vector(C))
    except (spla.ArpackNoConvergence, RuntimeError) as exc:
        hi = sigma_max(sec)[0]
        raise ConvergenceError(f"shift-invert Lanczos failed: {exc}", (0.0, hi)) from exc
    return math.sqrt(_rayleigh(sec, vec[:, 0])), True


def _reduced(phi):
    poly = coerce_poly(phi)
    reduced, _ = compress_alphabet(poly)
    return reduced


def linf_lower(phi, N: int, cap: int = DEFAULT_COLUMN_CAP) -> float:
    """Largest singular value of the degree-``N`` section of ``phi``.

    A lower bound for ``||phi||_inf``, nondecreasing in ``N``.  Letters that
    ``phi`` does not use are compressed away first, which leaves the value
    unchanged and keeps one-letter inputs cheap for large ``N``.
    """
    poly = _reduced(phi)
    if poly.is_zero():
        return 0.0
    value, converged = sigma_max(finite_section(poly, N, cap))
    if not converged:
        raise ConvergenceError("sigma_max did not converge", (value, l1_upper_bound(poly)))
    return value


def right_mult_norm(psi, N: int, cap: int = DEFAULT_COLUMN_CAP) -> float:
    """Lower bound for ``sup ||p (x) psi||_2`` over unit ``p``, via the flip."""
    return linf_lower(flip(coerce_poly(psi)), N, cap)


@dataclass(frozen=True)
class NormEstimate:
    value: float
    interval: tuple
    converged: bool
    degree: int
    tail_bound: float = 0.0

    def to_json_obj(self) -> dict:
        return {"value": self.value, "interval": list(self.interval), "converged": self.converged,
                "degree": self.degree, "tail_bound": self.tail_bound}


def linf_estimate(phi, tol: float = 1e-6, N_max: int = 12, cap: int = DEFAULT_COLUMN_CAP) -> tuple:
    """Raise the section degree until successive values differ by less than ``tol``.

    Returns ``(estimate, converged)``.  The estimate is the running maximum
    of section norms and therefore always a lower bound for ``||phi||_inf``.
    """
    est = linf_estimate_report(phi, tol, N_max, cap)
    return est.value, est.converged


def linf_estimate_report(phi, tol: float = 1e-6, N_max: int = 12, cap: int = DEFAULT_COLUMN_CAP) -> NormEstimate:
    if tol <= 0:
        raise PreconditionError("tol must be positive")
    tail = phi.tail_bound if isinstance(phi, TruncatedSeries) else 0.0
    poly = _reduced(phi)
    upper = l1_upper_bound(poly) + tail
    if poly.is_zero():
        return NormEstimate(0.0, (0.0, upper), True, 0, tail)
    prev = None
    best = 0.0
    degree = 0
    converged = False
    for N in range(N_max + 1):
        if count_words(poly.n, N) > cap:
            break
        value = linf_lower(poly, N, cap)
        best = max(best, value)
        degree = N
        if prev is not None and abs(value - prev) < tol:
            converged = True
            break
        prev = value
    return NormEstimate(best, (best, max(best, upper)), converged, degree, tail)


def sigma_min_lower_profile(phi, N_list, cap: int = DEFAULT_COLUMN_CAP) -> list:
    """Smallest singular value of the section at each ``N`` in ``N_list``."""
    N_list = list(N_list)
    if not N_list:
        raise PreconditionError("N_list must be nonempty")
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise PreconditionError("N_list must be strictly increasing")
    poly = _reduced(phi)
    if poly.is_zero():
        return [0.0 for _ in N_list]
    return [sigma_min(finite_section(poly, N, cap))[0] for N in N_list]


def export_matrix_market(sec: FiniteSection, path) -> tuple:
    """Write ``path`` (.mtx) and a ``.words.json`` index table next to it."""
    import scipy.io

    path = Path(path)
    scipy.io.mmwrite(str(path), sec.to_sparse(), comment="finite section; columns/rows in graded-lex word order")
    mtx = path if path.suffix == ".mtx" else path.with_name(path.name + ".mtx")
    table = mtx.with_suffix(".words.json")
    table.write_text(json.dumps({
        "n": sec.n,
        "source_degree": sec.source_degree,
        "columns": [list(w) for w in sec.column_words()],
        "rows": [list(w) for w in sec.row_words()],
    }))
    return mtx, table
