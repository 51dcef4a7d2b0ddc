"""Row contractions and empirical checks of the von Neumann inequality.

For a row contraction ``T = (T_1, ..., T_n)`` (``||sum T_i T_i^*|| <= 1``)
and a free polynomial ``p``, ``||p(T)|| <= ||p||_inf``.  Sampling tuples
on the boundary ``||sum T_i T_i^*|| = 1`` therefore gives empirical lower
bounds for the multiplier norm that can be compared with finite sections.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from freefock import opnorm
from freefock.errors import PreconditionError
from freefock.freepoly import FreePoly, coerce_poly, index_word, l1_upper_bound, words_upto

VN_SLACK = 1e-8


@dataclass(frozen=True, eq=False)
class MatrixTuple:
    """``n`` square matrices of equal size with row bound ``||sum T_i T_i^*||^(1/2)``."""

    mats: tuple
    row_bound: float

    @classmethod
    def from_matrices(cls, mats) -> "MatrixTuple":
        mats = tuple(np.asarray(m, dtype=np.complex128) for m in mats)
        if not mats:
            raise PreconditionError("need at least one matrix")
        d = mats[0].shape
        if len(d) != 2 or d[0] != d[1] or any(m.shape != d for m in mats):
            raise PreconditionError("matrices must be square and of equal size")
        return cls(mats, row_norm(mats))

    @property
    def n(self) -> int:
        return len(self.mats)

    @property
    def dim(self) -> int:
        return self.mats[0].shape[0]


def row_norm(mats) -> float:
    gram = sum(m @ m.conj().T for m in mats)
    return math.sqrt(max(np.linalg.eigvalsh(gram)[-1], 0.0))


def _stream(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


def random_row_contraction(n: int, d: int, seed: int, index: int = 0) -> MatrixTuple:
    """Complex Gaussian matrices scaled onto the boundary ``||sum T_i T_i^*|| = 1``.

    Deterministic in ``(seed, index)``; each index gets its own stream so
    samples can be drawn in any order.
    """
    if n < 1 or d < 1:
        raise PreconditionError("n and d must be >= 1")
    rng = _stream(seed, index)
    G = rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d))
    s = row_norm(G)
    return MatrixTuple.from_matrices([g / s for g in G])


def compression_tuple(n: int, N: int) -> MatrixTuple:
    """``P S_i P`` on words of length ``<= N`` (graded-lex basis)."""
    words = list(words_upto(n, N))
    pos = {w: k for k, w in enumerate(words)}
    D = len(words)
    mats = []
    for i in range(1, n + 1):
        M = np.zeros((D, D), dtype=np.complex128)
        for w, k in pos.items():
            r = pos.get((i,) + w)
            if r is not None:
                M[r, k] = 1.0
        mats.append(M)
    return MatrixTuple.from_matrices(mats)


def evaluate(p, T: MatrixTuple) -> np.ndarray:
    """``sum_f a_f T_f`` with ``T_f = T_{f(1)} ... T_{f(k)}`` and ``T_() = I``.

    Word products are memoized by prefix, so each needed prefix is
    multiplied once.
    """
    p = coerce_poly(p)
    if p.n != T.n:
        raise PreconditionError(f"polynomial over {p.n} letters, tuple of {T.n} matrices")
    d = T.dim
    cache = {(): np.eye(d, dtype=np.complex128)}

    def word(w):
        m = cache.get(w)
        if m is None:
            m = word(w[:-1]) @ T.mats[w[-1] - 1]
            cache[w] = m
        return m

    out = np.zeros((d, d), dtype=np.complex128)
    for w, a in p.items():
        out += a * word(w)
    return out


def spectral_norm(M: np.ndarray) -> float:
    return float(np.linalg.svd(M, compute_uv=False)[0]) if M.size else 0.0


@dataclass(frozen=True)
class VNReport:
    """Per-dimension maxima of ``||p(T)||`` over sampled tuples."""

    maxima: dict
    l1_bound: float
    l2_norm: float
    homogeneous: bool
    linf_section: float
    section_degree: int
    samples: int
    violations: int

    @property
    def max_norm(self) -> float:
        return max(self.maxima.values()) if self.maxima else 0.0

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def to_json_obj(self) -> dict:
        return {
            "maxima": {str(k): v for k, v in self.maxima.items()},
            "value": self.max_norm,
            "interval": [self.max_norm, self.l1_bound],
            "l1_bound": self.l1_bound,
            "l2_norm": self.l2_norm,
            "homogeneous": self.homogeneous,
            "linf_section": self.linf_section,
            "section_degree": self.section_degree,
            "samples": self.samples,
            "violations": self.violations,
        }


def vn_check(p, samples: int = 200, dims: Sequence[int] = (2, 4, 6), seed: int = 0,
             section_degree: int = 6) -> VNReport:
    """Sample boundary row contractions and record ``max ||p(T)||`` per dimension.

    Each sample must satisfy ``||p(T)|| <= l1(p) + 1e-8`` and, for
    homogeneous ``p``, ``||p(T)|| <= ||p||_2 + 1e-8``; failures are counted
    in ``violations``.  ``linf_section`` is the finite-section lower bound
    at ``section_degree`` for comparison (both are lower bounds for the
    multiplier norm, so neither dominates the other in general).
    """
    p = coerce_poly(p)
    if samples < 1:
        raise PreconditionError("samples must be >= 1")
    l1 = l1_upper_bound(p)
    l2 = p.norm2()
    homog = p.is_homogeneous()
    bound = min(l1, l2) if homog else l1
    maxima = {}
    bad = 0
    for d in dims:
        best = 0.0
        for k in range(samples):
            T = random_row_contraction(p.n, d, seed, k + 1_000_003 * d)
            v = spectral_norm(evaluate(p, T))
            if v > bound + VN_SLACK:
                bad += 1
            best = max(best, v)
        maxima[int(d)] = best
    sec = opnorm.linf_lower(p, section_degree) if not p.is_zero() else 0.0
    return VNReport(maxima, l1, l2, homog, sec, section_degree, samples, bad)
