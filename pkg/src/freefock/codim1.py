"""Eigenvectors of the backward shifts and their codimension-one invariant subspaces.

For ``lam`` in the open unit ball of ``C^n`` the vector
``z_lam = sum_f lam_f e_f`` (with ``lam_f`` the product of the entries of
``lam`` along ``f``) satisfies ``S_i^* z_lam = conj(lam_i) z_lam``.  Its
orthogonal complement ``M_lam`` is a closed invariant subspace of
codimension one.  Pairings with ``z_lam`` are computed by the exact finite
sum :func:`abelian_eval`, never by truncated inner products.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from freefock.errors import PreconditionError
from freefock.freepoly import FreePoly, TruncatedSeries, coerce_poly, count_words, tensor


@dataclass(frozen=True)
class Lambda:
    """A point of the open unit ball of ``C^n``."""

    entries: tuple

    def __post_init__(self):
        ent = tuple(complex(x) for x in self.entries)
        if not ent:
            raise PreconditionError("lambda needs at least one entry")
        object.__setattr__(self, "entries", ent)
        if not self.norm < 1:
            raise PreconditionError(f"||lambda|| must be < 1, got {self.norm}")

    @classmethod
    def parse(cls, text: str) -> "Lambda":
        """Parse ``"0.5,0.2"`` or ``"0.5+0.1j,0"``."""
        try:
            return cls(tuple(complex(p.strip().replace(" ", "")) for p in text.split(",")))
        except ValueError as exc:
            raise PreconditionError(f"cannot parse lambda {text!r}") from exc

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def norm(self) -> float:
        return math.sqrt(math.fsum(abs(x) ** 2 for x in self.entries))

    @property
    def z_norm2(self) -> float:
        """``||z_lam||_2^2 = 1 / (1 - ||lam||^2)``."""
        return 1.0 / (1.0 - self.norm ** 2)

    def word_value(self, f) -> complex:
        out = 1.0 + 0j
        for a in f:
            out *= self.entries[a - 1]
        return out

    def to_json_obj(self) -> list:
        return [[x.real, x.imag] for x in self.entries]


def _as_lambda(lam) -> Lambda:
    return lam if isinstance(lam, Lambda) else Lambda(tuple(lam))


def z_tail(lam, N: int) -> float:
    """l2 norm of the part of ``z_lam`` beyond degree ``N``."""
    r2 = _as_lambda(lam).norm ** 2
    return math.sqrt(r2 ** (N + 1) / (1 - r2))


def degree_for_tail(lam, tail: float) -> int:
    """Smallest ``N`` with ``z_tail(lam, N) <= tail``."""
    lam = _as_lambda(lam)
    if lam.norm == 0:
        return 0
    r2 = lam.norm ** 2
    # r2^(N+1) <= tail^2 (1 - r2)
    N = math.ceil(math.log(tail ** 2 * (1 - r2)) / math.log(r2)) - 1
    N = max(N, 0)
    while z_tail(lam, N) > tail:
        N += 1
    return N


def z_lambda(lam, N: int, cap: int = 2_000_000) -> TruncatedSeries:
    """``sum_{|f| <= N} lam_f e_f`` with tail bound ``sqrt(r^(2(N+1)) / (1 - r^2))``.

    Words through letters with ``lam_i = 0`` have zero coefficient and are
    not generated, so coordinate-aligned points stay cheap.
    """
    lam = _as_lambda(lam)
    if N < 0:
        raise PreconditionError("N must be >= 0")
    live = [i + 1 for i, x in enumerate(lam.entries) if x != 0]
    if count_words(len(live), N) > cap if live else False:
        raise PreconditionError(f"z_lambda at degree {N} would need more than {cap} terms")
    # each coefficient is computed once per multidegree, so words with the
    # same letter counts (a word and its flip, say) get bit-identical values
    start = (0,) * lam.n
    value = {start: 1.0 + 0j}
    terms = {(): 1.0 + 0j}
    layer = {(): start}
    for _ in range(N):
        nxt = {}
        for w, deg in layer.items():
            for a in live:
                d = deg[:a - 1] + (deg[a - 1] + 1,) + deg[a:]
                if d not in value:
                    value[d] = value[deg] * lam.entries[a - 1]
                nxt[w + (a,)] = d
                terms[w + (a,)] = value[d]
        layer = nxt
    return TruncatedSeries(FreePoly._raw(lam.n, terms, prune=0.0), N, z_tail(lam, N))


def _check_alphabet(psi: FreePoly, lam: Lambda) -> None:
    if psi.n != lam.n:
        raise PreconditionError(f"alphabet {psi.n} does not match lambda of length {lam.n}")


def abelian_eval(psi, lam) -> complex:
    """``<psi, z_lam> = sum_f a_f conj(lam_f)``, an exact finite sum.

    For real ``lam`` this is the abelianized polynomial evaluated at
    ``lam``; for complex ``lam`` it is evaluated at ``conj(lam)``.
    """
    psi = coerce_poly(psi)
    lam = _as_lambda(lam)
    _check_alphabet(psi, lam)
    conj = [x.conjugate() for x in lam.entries]
    total = 0j
    for w, a in psi.terms.items():
        v = a
        for letter in w:
            v *= conj[letter - 1]
        total += v
    return total


def abelianize(psi) -> dict:
    """Collapse each word to its multidegree and sum coefficients.

    Keys are tuples ``(k_1, ..., k_n)`` counting each letter; zero sums are
    dropped only when exactly zero.
    """
    psi = coerce_poly(psi)
    acc: dict = defaultdict(complex)
    for w, a in psi.terms.items():
        deg = [0] * psi.n
        for letter in w:
            deg[letter - 1] += 1
        acc[tuple(deg)] += a
    return {k: v for k, v in acc.items() if v != 0}


def in_commutator_ideal(psi, tol: float | None = None) -> bool:
    """True when every abelianized coefficient vanishes.

    The default tolerance is ``1e-12 * max(1, l1(psi))``, which absorbs
    rounding in coefficients produced by floating-point arithmetic; pass
    ``tol=0`` for an exact test.
    """
    psi = coerce_poly(psi)
    if tol is None:
        tol = 1e-12 * max(1.0, psi.l1())
    return all(abs(v) <= tol for v in abelianize(psi).values())


def left_delete(psi: FreePoly, letter: int) -> FreePoly:
    """``S_letter^* psi``: keep words starting with ``letter`` and strip it."""
    return FreePoly._raw(psi.n, {w[1:]: c for w, c in psi.terms.items() if w and w[0] == letter}, prune=0.0)


def q_lambda(psi, lam, N: int) -> TruncatedSeries:
    """Projection onto ``M_lam``: ``psi - (1 - ||lam||^2) <psi, z_lam> z_lam``.

    ``z_lam`` is truncated at degree ``N``; the tail bound is the
    coefficient times the tail of ``z_lam`` (plus any tail of ``psi``).
    """
    src_tail = psi.tail_bound if isinstance(psi, TruncatedSeries) else 0.0
    psi = coerce_poly(psi)
    lam = _as_lambda(lam)
    _check_alphabet(psi, lam)
    z = z_lambda(lam, N)
    c = (1 - lam.norm ** 2) * abelian_eval(psi, lam)
    out = psi - z.poly * c
    return TruncatedSeries(out, max(N, psi.degree, 0), abs(c) * z.tail_bound + src_tail)


def p_lambda(psi, lam, N: int) -> TruncatedSeries:
    """Projection onto the wandering subspace of ``M_lam``: ``Q - sum_i S_i Q S_i^*``.

    Since ``sum_i S_i S_i^*`` removes only the constant term this equals
    ``psi(0) e_0 - c_0 z_lam + sum_i c_i e_i (x) z_lam`` with
    ``c_0 = (1 - ||lam||^2) <psi, z_lam>`` and
    ``c_i = (1 - ||lam||^2) <S_i^* psi, z_lam>``.
    """
    src_tail = psi.tail_bound if isinstance(psi, TruncatedSeries) else 0.0
    psi = coerce_poly(psi)
    lam = _as_lambda(lam)
    _check_alphabet(psi, lam)
    n = psi.n
    z = z_lambda(lam, N)
    w = 1 - lam.norm ** 2
    c0 = w * abelian_eval(psi, lam)
    ci = [w * abelian_eval(left_delete(psi, i), lam) for i in range(1, n + 1)]
    shifted = {}
    for i, c in enumerate(ci, start=1):
        if c == 0:
            continue
        for f, a in z.poly.terms.items():
            shifted[(i,) + f] = a * c
    out = FreePoly.monomial(n, (), psi.coeff(())) - z.poly * c0 + FreePoly._raw(n, shifted, prune=0.0)
    tail = (abs(c0) + math.sqrt(math.fsum(abs(c) ** 2 for c in ci))) * z.tail_bound
    # projections are contractions, so an input tail stays bounded by itself
    return TruncatedSeries(out, N + 1, tail + src_tail)


def wandering_lambda(lam, N: int) -> list:
    """Unit vectors ``phi_0, phi_1, ..., phi_n`` spanning the wandering subspace of ``M_lam``.

    ``phi_0 = (e_0 - (1 - r^2) z_lam) / r`` with ``r = ||lam||`` and
    ``phi_i = a_i z_lam (x) (e_i - conj(lam_i))`` with
    ``a_i = sqrt((1 - r^2) / (1 - |lam_i|^2))``.  Each is phase normalized.
    ``phi_0`` is omitted when ``lam = 0``, where it degenerates.  The
    returned vectors are inner up to their tail bounds and their flips lie
    in ``M_lam``.
    """
    lam = _as_lambda(lam)
    n = lam.n
    z = z_lambda(lam, N)
    r = lam.norm
    w = 1 - r ** 2
    out = []
    if r > 0:
        phi0 = (FreePoly.one(n) - z.poly * w) / r
        out.append(TruncatedSeries(phi0.phase_normalized(), N, w * z.tail_bound / r))
    for i in range(1, n + 1):
        li = lam.entries[i - 1]
        a = math.sqrt(w / (1 - abs(li) ** 2))
        factor = FreePoly(n, {(i,): 1.0, (): -li.conjugate()})
        phi = tensor(z.poly, factor) * a
        out.append(TruncatedSeries(phi.phase_normalized(), N + 1, a * (1 + abs(li)) * z.tail_bound))
    return out


def m_lambda_pairing(psi, lam) -> tuple:
    """``(pairing, uncertainty)`` for containment of ``psi`` in ``M_lam``.

    The uncertainty is ``tail * ||z_lam||_2`` for a truncated series and 0
    for a polynomial.
    """
    lam = _as_lambda(lam)
    tail = psi.tail_bound if isinstance(psi, TruncatedSeries) else 0.0
    return abelian_eval(psi, lam), tail * math.sqrt(lam.z_norm2)


def m_lambda_contains(psi, lam, tol: float = 1e-12) -> bool:
    """Does the two-sided invariant subspace generated by ``psi`` lie in ``M_lam``?

    ``<e_p psi e_q, z_lam> = conj(lam_p lam_q) <psi, z_lam>``, so this holds
    iff the pairing vanishes.  For truncated series the answer is True
    when ``|pairing| <= tol + uncertainty``, i.e. containment cannot be
    ruled out.
    """
    val, unc = m_lambda_pairing(psi, lam)
    return abs(val) <= tol + unc


def ball_grid(n_points: int, radius: float) -> list:
    """Points ``(l1, l2)`` with ``l1`` real and ``l2`` complex, on a cube grid clipped to the ball."""
    axis = np.linspace(-radius, radius, n_points)
    pts = []
    for a in axis:
        for b in axis:
            for c in axis:
                if a * a + b * b + c * c < radius ** 2 + 1e-15 and a * a + b * b + c * c < 1:
                    pts.append(Lambda((a, complex(b, c))))
    return pts


def coordinate_generators(lam) -> list:
    """``e_j - conj(lam_j) e_0``, a generating set of ``M_lam`` as an invariant subspace."""
    lam = _as_lambda(lam)
    n = lam.n
    return [FreePoly(n, {(j,): 1.0, (): -lam.entries[j - 1].conjugate()}) for j in range(1, n + 1)]
