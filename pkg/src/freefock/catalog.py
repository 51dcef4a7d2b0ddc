"""Constructors for standard inner, outer and invertible elements.

Polynomial constructors return :class:`FreePoly`; series constructors return
:class:`TruncatedSeries` whose ``tail_bound`` bounds the l2 norm of
everything discarded beyond the truncation degree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from freefock.errors import PreconditionError
from freefock.freepoly import (
    FreePoly,
    TruncatedSeries,
    coerce_poly,
    l1_upper_bound,
    tensor,
    validate_word,
)


def monomial(n: int, f) -> FreePoly:
    """The unit monomial ``e_f`` (inner for every word, including ``()``)."""
    return FreePoly.monomial(n, tuple(f))


def homogeneous(n: int, coeffs: dict) -> FreePoly:
    """Normalized combination of words of one common length.

    Such vectors are inner: distinct words of equal length have orthogonal
    right translates.
    """
    if not coeffs:
        raise PreconditionError("need at least one word")
    lengths = {len(tuple(w)) for w in coeffs}
    if len(lengths) != 1:
        raise PreconditionError(f"words of mixed lengths {sorted(lengths)}")
    poly = FreePoly(n, {tuple(w): c for w, c in coeffs.items()})
    if poly.is_zero():
        raise PreconditionError("all coefficients are zero")
    return poly.normalized()


def distinct_first_letter(n: int, terms: Sequence) -> FreePoly:
    """Normalized combination of nonempty words with pairwise distinct first letters."""
    if not terms:
        raise PreconditionError("need at least one term")
    seen = set()
    acc = {}
    for word, c in terms:
        word = validate_word(word, n)
        if not word:
            raise PreconditionError("the empty word is not allowed here")
        if word[0] in seen:
            raise PreconditionError(f"first letter {word[0]} repeats")
        seen.add(word[0])
        acc[word] = c
    poly = FreePoly(n, acc)
    if poly.is_zero():
        raise PreconditionError("all coefficients are zero")
    return poly.normalized()


def right_letter_inner(psi: FreePoly, letter: int) -> FreePoly:
    """``psi / ||psi||_2`` followed by ``e_letter``; inner when ``psi`` avoids ``letter``."""
    psi = coerce_poly(psi)
    if psi.is_zero():
        raise PreconditionError("psi must be nonzero")
    if not 1 <= letter <= psi.n:
        raise PreconditionError(f"letter {letter} outside 1..{psi.n}")
    if letter in psi.letters():
        raise PreconditionError(f"psi already uses letter {letter}")
    return tensor(psi.normalized(), FreePoly.monomial(psi.n, (letter,)))


@dataclass(frozen=True)
class ClassicalCoeffs:
    """Taylor coefficients ``c_0, c_1, ...`` of a one-variable function.

    ``tail_l2`` bounds the l2 norm of the coefficients beyond the given
    ones (0 when the list is the whole function).  ``sup_norm`` is the
    classical sup norm on the disk, when known.
    """

    coeffs: tuple
    tail_l2: float = 0.0
    sup_norm: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(complex(c) for c in self.coeffs))
        if not math.isfinite(self.tail_l2) or self.tail_l2 < 0:
            raise PreconditionError("tail_l2 must be finite and >= 0")


def _power_word(f, k: int):
    return tuple(f) * k


def inherited(n: int, f, c, N: int) -> TruncatedSeries:
    """``sum_k c_k e_f^k`` truncated to degree ``N``.

    Substituting ``e_f`` for ``z`` is isometric from the classical Hardy
    space, so inner (outer) inputs give inner (outer) outputs.
    """
    f = validate_word(f, n)
    if not f:
        raise PreconditionError("f must be a nonempty word")
    if N < 0:
        raise PreconditionError("N must be >= 0")
    if not isinstance(c, ClassicalCoeffs):
        c = ClassicalCoeffs(tuple(c))
    K = N // len(f)
    kept = {_power_word(f, k): a for k, a in enumerate(c.coeffs[:K + 1])}
    dropped = math.fsum(abs(a) ** 2 for a in c.coeffs[K + 1:])
    tail = math.sqrt(dropped + c.tail_l2 ** 2)
    return TruncatedSeries(FreePoly(n, kept), N, tail)


def _check_mu(mu) -> complex:
    mu = complex(mu)
    if not abs(mu) < 1:
        raise PreconditionError(f"|mu| must be < 1, got {abs(mu)}")
    return mu


def mobius_coeffs(mu, K: int) -> list:
    """Taylor coefficients ``c_0..c_K`` of ``(z - mu) / (1 - conj(mu) z)``."""
    mu = _check_mu(mu)
    r2 = abs(mu) ** 2
    out = [-mu]
    out += [mu.conjugate() ** (k - 1) * (1 - r2) for k in range(1, K + 1)]
    return out


def mobius(n: int, f, mu, N: int) -> TruncatedSeries:
    """``(e_f - mu) (x) (e_0 - conj(mu) e_f)^{-1}`` truncated to degree ``N``.

    The constant coefficient is ``-mu``.  The tail bound is the exact l2
    norm of the discarded coefficients, ``sqrt(1 - |mu|^2) |mu|^K`` with
    ``K = N // |f|``.
    """
    f = validate_word(f, n)
    if not f:
        raise PreconditionError("f must be a nonempty word")
    mu = _check_mu(mu)
    if N < len(f):
        raise PreconditionError("N must be at least |f|")
    K = N // len(f)
    poly = FreePoly(n, {_power_word(f, k): a for k, a in enumerate(mobius_coeffs(mu, K))})
    tail = math.sqrt(1 - abs(mu) ** 2) * abs(mu) ** K
    return TruncatedSeries(poly, N, tail)


def h_series(n: int, f, mu, N: int) -> TruncatedSeries:
    """``sum_k conj(mu)^k e_f^k`` truncated to degree ``N``.

    This is the reproducing vector at ``mu`` for the substitution
    ``z -> e_f``; it is orthogonal to ``mobius(f, mu) (x) g`` for every
    ``g``.  For real ``mu`` the conjugate makes no difference.
    """
    f = validate_word(f, n)
    if not f:
        raise PreconditionError("f must be a nonempty word")
    mu = _check_mu(mu)
    if N < 0:
        raise PreconditionError("N must be >= 0")
    K = N // len(f)
    mb = mu.conjugate()
    poly = FreePoly(n, {_power_word(f, k): mb ** k for k in range(K + 1)})
    r2 = abs(mu) ** 2
    tail = math.sqrt(r2 ** (K + 1) / (1 - r2))
    return TruncatedSeries(poly, N, tail)


def exp_series(phi: FreePoly, tol: float = 1e-12, max_terms: int = 200) -> TruncatedSeries:
    """Partial sum of ``sum_k phi^k / k!``.

    Terms are added until the l1 bound ``L^k / k!`` of the next one falls
    below ``tol`` (``L = l1(phi)``).  The tail bound is a geometric bound on
    the scalar remainder ``sum_{j>=k} L^j / j!``, which dominates the l2
    norm of the rest.
    """
    phi = coerce_poly(phi)
    if tol <= 0:
        raise PreconditionError("tol must be positive")
    L = l1_upper_bound(phi)
    total = FreePoly.one(phi.n)
    term = FreePoly.one(phi.n)
    k = 1
    scalar = 1.0
    while scalar * L / k >= tol or k + 1 <= L:
        if k > max_terms:
            raise PreconditionError(f"exp series needs more than {max_terms} terms")
        term = tensor(term, phi) / k
        total = total + term
        scalar *= L / k
        k += 1
    # sum_{j>=k} L^j/j! <= (L^k/k!) / (1 - L/(k+1)), and k > L here
    nxt = scalar * L / k
    tail = nxt / (1 - L / (k + 1)) if L > 0 else 0.0
    return TruncatedSeries(total, max(total.degree, 0), tail)


def geometric_inverse(phi: FreePoly, N: int) -> TruncatedSeries:
    """Truncation of ``sum_k phi^k``, the inverse of ``e_0 - phi``.

    Requires ``l1(phi) < 1``.  Coefficients are exact through degree ``N``.
    A constant term ``a`` is factored out first, ``e_0 - phi = (1 - a)
    (e_0 - phi')``, so that ``phi'`` has none and its ``k``-th power only
    reaches past degree ``N`` once ``k >= K0 = ceil((N + 1) / deg phi)``.
    The tail bound ``(1 + L) L'^K0 / ((1 - L') |1 - a|)`` covers both the
    dropped coefficients and the remainder ``(e_0 - phi) (x) result - e_0``.
    """
    phi = coerce_poly(phi)
    if N < 0:
        raise PreconditionError("N must be >= 0")
    L = l1_upper_bound(phi)
    if not L < 1:
        raise PreconditionError(f"l1 bound {L} is not < 1; convergence cannot be certified")
    n = phi.n
    a = phi.coeff(())
    rest = phi - FreePoly.monomial(n, (), a) if a != 0 else phi
    if rest.is_zero():
        return TruncatedSeries(FreePoly.monomial(n, (), 1 / (1 - a)), N, 0.0)
    scale = 1 - a
    rest = rest / scale
    Lp = rest.l1()
    poly = _graded_geometric(rest, N) / scale
    K0 = -(-(N + 1) // rest.degree)
    tail = (1 + L) * Lp ** K0 / ((1 - Lp) * abs(scale))
    return TruncatedSeries(poly, N, tail)


def _graded_geometric(phi: FreePoly, N: int) -> FreePoly:
    """Exact coefficients through degree ``N`` of ``sum_k phi^k`` (phi without constant term)."""
    items = [(w, c) for w, c in phi.items() if w]
    b = {(): 1.0 + 0j}
    by_len = {0: [()]}
    for m in range(1, N + 1):
        layer = {}
        for f, c in items:
            if len(f) > m:
                continue
            for g in by_len.get(m - len(f), ()):
                h = f + g
                layer[h] = layer.get(h, 0) + c * b[g]
        layer = {h: c for h, c in layer.items() if c != 0}
        b.update(layer)
        by_len[m] = list(layer)
    return FreePoly._raw(phi.n, b)
