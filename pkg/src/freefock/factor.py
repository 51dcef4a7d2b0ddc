"""Inner/outer classification, inner-outer factorization and related tools.

Conventions
-----------
Left multiplication ``p -> phi (x) p`` is an isometry exactly when ``phi``
is *inner*.  An element ``psi`` is *outer* when ``psi (x) h`` can
approximate ``e_0``.  Every nonzero ``psi`` factors as ``phi (x) g`` with
``phi`` inner and ``g`` outer, unique up to a unimodular scalar.

The least-squares problems below only involve columns ``psi (x) e_q``.
Such a column can only meet the rows ``f q`` with ``f`` in the support of
``psi``, so the problem splits into connected components of a bipartite
row/column graph.  Only the component of the right-hand side matters; it
is found by breadth-first search and is often far smaller than the full
set of words (one-letter inputs give a single chain).
"""
from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from freefock import opnorm
from freefock.errors import NotDivisibleError, PreconditionError, ResourceError
from freefock.freepoly import (
    FreePoly,
    TruncatedSeries,
    adjoint_apply,
    as_series,
    coerce_poly,
    compress_alphabet,
    count_words,
    flip,
    tensor,
)

log = logging.getLogger(__name__)

#: Singular values below ``RANK_RTOL * sigma_max`` count as zero.
RANK_RTOL = 1e-9
DENSE_LSTSQ_COLUMNS = 800


# -- inner test -------------------------------------------------------------

def _tail_allowance(x) -> float:
    if not isinstance(x, TruncatedSeries) or x.tail_bound == 0:
        return 0.0
    t = x.tail_bound
    return t * (2 * x.poly.norm2() + t)


def shift_correlations(phi: FreePoly) -> dict:
    """``{s: <phi, phi (x) e_s>}`` for every nonempty ``s`` where it is nonzero.

    ``<phi, phi (x) e_s>`` collects ``a_w conj(a_u)`` over support words
    ``w = u s``, so it suffices to look at support pairs where one word is
    a proper prefix of the other.
    """
    terms = phi.terms
    lens = sorted({len(w) for w in terms})
    out: dict = {}
    for w, a in terms.items():
        for k in lens:
            if k >= len(w):
                break
            b = terms.get(w[:k])
            if b is not None:
                s = w[k:]
                out[s] = out.get(s, 0j) + a * b.conjugate()
    return out


def inner_defect(phi) -> float:
    """``max(| ||phi||_2 - 1 |, max_s |<phi, phi (x) e_s>|)`` on the stored polynomial.

    The right translates ``phi (x) e_f`` are orthonormal exactly when this
    vanishes: ``<phi e_f, phi e_g>`` is zero unless one of ``f, g`` is a
    suffix of the other, say ``g = s f``, and then it equals
    ``<phi, phi e_s>`` (or its conjugate) for the leftover prefix ``s``.
    """
    poly = coerce_poly(phi)
    defect = abs(poly.norm2() - 1.0)
    corr = shift_correlations(poly)
    if corr:
        defect = max(defect, max(abs(v) for v in corr.values()))
    return defect


def is_inner(phi, tol: float = 1e-9) -> tuple:
    """``(verdict, defect)``; the verdict allows ``tol`` plus the tail allowance.

    For a truncated series with tail ``t`` the allowance is
    ``t (2 ||p||_2 + t)``, which bounds how far the true correlations can
    be from those of the stored polynomial ``p``.
    """
    if tol <= 0:
        raise PreconditionError("tol must be positive")
    defect = inner_defect(phi)
    return defect <= tol + _tail_allowance(phi), defect


# -- component least squares --------------------------------------------------

def _component(polys: Sequence[FreePoly], seeds, q_ok, cap: int):
    """Columns ``(j, q)`` and rows reachable from ``seeds``.

    Column ``(j, q)`` is ``polys[j] (x) e_q`` and is allowed when
    ``q_ok(q)``.  Returns ``(cols, rows)`` with rows in discovery order.
    """
    supports = [p.terms for p in polys]
    lens = [sorted({len(w) for w in s}) for s in supports]
    rows = {}
    cols = {}
    queue = deque()
    for w in seeds:
        if w not in rows:
            rows[w] = len(rows)
            queue.append(w)
    while queue:
        w = queue.popleft()
        for j, sup in enumerate(supports):
            for k in lens[j]:
                if k > len(w):
                    break
                if w[:k] not in sup:
                    continue
                q = w[k:]
                if (j, q) in cols or not q_ok(q):
                    continue
                cols[(j, q)] = len(cols)
                if len(cols) > cap:
                    raise ResourceError(f"least-squares component exceeds {cap} columns")
                for f in sup:
                    r = f + q
                    if r not in rows:
                        rows[r] = len(rows)
                        queue.append(r)
    return list(cols), rows


def _column_matrix(polys, cols, rows) -> sp.csc_matrix:
    data, ri, ci = [], [], []
    for c, (j, q) in enumerate(cols):
        for f, a in polys[j].terms.items():
            data.append(a)
            ri.append(rows[f + q])
            ci.append(c)
    return sp.csc_matrix((np.array(data, dtype=np.complex128), (ri, ci)),
                         shape=(len(rows), len(cols)))


def _rhs(rows, targets: Sequence[FreePoly]) -> np.ndarray:
    B = np.zeros((len(rows), len(targets)), dtype=np.complex128)
    for k, t in enumerate(targets):
        for w, c in t.terms.items():
            B[rows[w], k] = c
    return B


def _lstsq(A: sp.csc_matrix, B: np.ndarray) -> np.ndarray:
    """Minimum-norm least-squares solution with the module's rank threshold."""
    m, n = A.shape
    if n == 0:
        return np.zeros((0, B.shape[1]), dtype=np.complex128)
    if n <= DENSE_LSTSQ_COLUMNS:
        X, *_ = np.linalg.lstsq(A.toarray(), B, rcond=RANK_RTOL)
        return X
    AH = A.conj().T.tocsc()
    try:
        lu = spla.splu((AH @ A).tocsc())
        X = lu.solve(AH @ B)
        # one step of iterative refinement on the normal equations
        X = X + lu.solve(AH @ (B - A @ X))
        if np.all(np.isfinite(X)):
            return X
    except RuntimeError:  # singular normal matrix
        log.debug("normal equations singular; using LSQR")
    cols = []
    for k in range(B.shape[1]):
        cols.append(spla.lsqr(A, B[:, k], atol=1e-14, btol=1e-14, iter_lim=20 * n)[0])
    return np.column_stack(cols)


def _residuals(polys, targets, q_ok, cap):
    """Residuals of each target after projecting onto the columns ``polys[j] (x) e_q``.

    Returns ``(residual_polys, coefficient_dict_per_target)``.
    """
    n = targets[0].n
    seeds = [w for t in targets for w in t.terms]
    cols, rows = _component(polys, seeds, q_ok, cap)
    B = _rhs(rows, targets)
    if not cols:
        R = B
        X = np.zeros((0, len(targets)), dtype=np.complex128)
    else:
        A = _column_matrix(polys, cols, rows)
        X = _lstsq(A, B)
        R = B - A @ X
    words = list(rows)
    res = [FreePoly._raw(n, {words[i]: R[i, k] for i in np.nonzero(R[:, k])[0]}, prune=0.0)
           for k in range(len(targets))]
    coef = [{cols[c]: X[c, k] for c in range(len(cols))} for k in range(len(targets))]
    return res, coef


# -- outer test ---------------------------------------------------------------

def outer_distance(psi: FreePoly, m: int, cap: int = opnorm.DEFAULT_COLUMN_CAP) -> tuple:
    """``(dist, h)``: best approximation of ``e_0`` by ``psi (x) h`` with ``deg h <= m``."""
    psi = coerce_poly(psi)
    if psi.is_zero():
        raise PreconditionError("psi must be nonzero")
    one = FreePoly.one(psi.n)
    (res,), (coef,) = _residuals([psi], [one], lambda q: len(q) <= m, cap)
    h = FreePoly._raw(psi.n, {q: c for (_, q), c in coef.items()})
    return res.norm2(), h


def outer_profile(psi, N: int, cap: int = opnorm.DEFAULT_COLUMN_CAP) -> list:
    """``[dist_0, ..., dist_N]`` where ``dist_m = min_{deg h <= m} ||psi (x) h - e_0||_2``.

    Nonincreasing; ``psi`` is outer exactly when it tends to 0.  Letters
    that ``psi`` does not use are compressed away first, which does not
    change the distances.
    """
    psi, _ = compress_alphabet(coerce_poly(psi))
    if psi.is_zero():
        raise PreconditionError("psi must be nonzero")
    if N < 0:
        raise PreconditionError("N must be >= 0")
    return [outer_distance(psi, m, cap)[0] for m in range(N + 1)]


def outer_verdict(profile: Sequence[float], tol: float) -> str:
    """``"outer at tolerance"`` when the last distance is below ``tol``."""
    return "outer at tolerance" if profile[-1] < tol else "not outer at tolerance"


# -- factorization ------------------------------------------------------------

@dataclass(frozen=True)
class FactorizationResult:
    inner_part: TruncatedSeries
    outer_part: TruncatedSeries
    residual: float
    trunc_degree: int

    def to_json_obj(self) -> dict:
        return {"inner": self.inner_part.to_json_obj(), "outer": self.outer_part.to_json_obj(),
                "residual": self.residual, "degree": self.trunc_degree}


def inner_outer(psi, N: int, cap: int = opnorm.DEFAULT_COLUMN_CAP) -> FactorizationResult:
    """Factor ``psi = phi (x) g`` with ``phi`` inner and ``g`` outer, to degree ``N``.

    ``phi`` is the normalized part of ``psi`` orthogonal to
    ``psi (x) e_q`` for ``1 <= |q| <= N - deg psi``; in the limit this is
    orthogonal to all of ``psi (x) h`` with ``h(0) = 0``, which is what
    makes it inner.  Its phase is fixed so the first significant
    coefficient is positive real.  The outer part is
    ``g_h = <psi, phi (x) e_h>`` for ``|h| <= N`` and the reported residual
    is ``||psi - phi (x) g||_2``.
    """
    psi = coerce_poly(psi)
    if psi.is_zero():
        raise PreconditionError("psi must be nonzero")
    if N < psi.degree:
        raise PreconditionError("N must be at least deg psi")
    M = N - psi.degree
    (res,), _ = _residuals([psi], [psi], lambda q: 1 <= len(q) <= M, cap)
    phi = res.normalized().phase_normalized()
    g = adjoint_apply(phi, psi, max_len=N)
    residual = (psi - tensor(phi, g)).norm2()
    return FactorizationResult(TruncatedSeries(phi, max(N, phi.degree, 0)),
                               TruncatedSeries(g, max(N, g.degree, 0)), residual, N)


@dataclass(frozen=True)
class WanderingBasis:
    generators: list
    trunc_degree: int
    gram_defect: float

    @property
    def dim(self) -> int:
        return len(self.generators)

    def project(self, x: FreePoly) -> FreePoly:
        """Orthogonal projection of ``x`` onto the span of the basis."""
        out = FreePoly.zero(x.n)
        for b in self.generators:
            out = out + b * x.inner(b)
        return out

    def containment_residual(self, x: FreePoly) -> float:
        """``||x - P x||_2`` for the projection ``P`` onto the span."""
        return (x - self.project(x)).norm2()


def wandering_basis(generators, N: int, cap: int = opnorm.DEFAULT_COLUMN_CAP) -> WanderingBasis:
    """Orthonormal basis of the wandering subspace of the invariant subspace spanned by ``generators``.

    Works with ``M_N = span{e_p (x) v : v in generators, |p| <= N}`` and
    returns an orthonormal basis of ``M_N`` minus its shifts, i.e. the
    residuals of the generators after projecting out
    ``span{e_p (x) v : 1 <= |p| <= N}``.  The computation runs on flipped
    words, where those shifts become right multiplications and the
    component search above applies.  Flipping a returned vector gives an
    inner function (approximately, for finite ``N``).
    """
    gens = [coerce_poly(g) for g in generators]
    if not gens:
        raise PreconditionError("need at least one generator")
    if any(g.is_zero() for g in gens):
        raise PreconditionError("generators must be nonzero")
    n = gens[0].n
    flipped = [flip(g) for g in gens]
    res, _ = _residuals(flipped, flipped, lambda q: 1 <= len(q) <= N, cap)
    words = sorted({w for r in res for w in r.terms}, key=lambda w: (len(w), w))
    pos = {w: i for i, w in enumerate(words)}
    R = np.zeros((len(words), len(res)), dtype=np.complex128)
    for k, r in enumerate(res):
        for w, c in r.terms.items():
            R[pos[w], k] = c
    basis = []
    if words:
        U, s, _ = np.linalg.svd(R, full_matrices=False)
        keep = s > RANK_RTOL * s[0] if s.size and s[0] > 0 else np.zeros(0, dtype=bool)
        for k in np.nonzero(keep)[0]:
            v = FreePoly._raw(n, {words[i]: U[i, k] for i in np.nonzero(U[:, k])[0]})
            basis.append(flip(v.phase_normalized()))
    gram = 0.0
    for i, a in enumerate(basis):
        for j, b in enumerate(basis):
            gram = max(gram, abs(a.inner(b) - (1.0 if i == j else 0.0)))
    return WanderingBasis(basis, N, gram)


# -- division and inverses ----------------------------------------------------

def inner_divide(phi1, phi2, N: int, tol: float = 1e-8) -> TruncatedSeries:
    """Inner ``phi3`` with ``phi1 = phi2 (x) phi3``, or :class:`NotDivisibleError`.

    The candidate is ``c_h = <phi1, phi2 (x) e_h>`` for ``|h| <= N``.  It is
    accepted when ``||phi1 - phi2 (x) phi3||_2 <= tol + t1 + 2 t2`` and
    ``phi3`` passes :func:`is_inner` with the same slack, where ``t1, t2``
    are the tail bounds of the inputs.
    """
    s1, s2 = as_series(phi1), as_series(phi2)
    for name, s in (("phi1", s1), ("phi2", s2)):
        ok, defect = is_inner(s, max(tol, 1e-12))
        if not ok:
            raise PreconditionError(f"{name} is not inner (defect {defect:.3g})")
    slack = tol + s1.tail_bound + 2 * s2.tail_bound
    c = adjoint_apply(s2.poly, s1.poly, max_len=N)
    miss = (s1.poly - tensor(s2.poly, c)).norm2()
    if miss > slack:
        raise NotDivisibleError(f"range containment fails: residual {miss:.3g} > {slack:.3g}")
    out = TruncatedSeries(c, max(N, c.degree, 0), s1.tail_bound + s2.tail_bound)
    ok, defect = is_inner(out, slack)
    if not ok:
        raise NotDivisibleError(f"quotient is not inner (defect {defect:.3g})")
    return out


@dataclass(frozen=True)
class FormalInverse:
    """Truncated formal inverse with growth diagnostics.

    ``tail_bound`` is ``inf`` when no bound on the discarded coefficients
    can be certified (the formal inverse need not even lie in the Fock
    space).  ``norms[k]`` is the l2 norm of the inverse truncated to
    degree ``k``.
    """

    poly: FreePoly
    trunc_degree: int
    tail_bound: float
    norms: tuple = field(default_factory=tuple)

    @property
    def certified(self) -> bool:
        return math.isfinite(self.tail_bound)

    def as_series(self) -> TruncatedSeries:
        if not self.certified:
            raise PreconditionError("no tail bound is known for this inverse")
        return TruncatedSeries(self.poly, self.trunc_degree, self.tail_bound)

    def growth_rate(self) -> float:
        """Geometric growth factor of ``norms`` over the second half of the degrees."""
        k1, k2 = len(self.norms) // 2, len(self.norms) - 1
        if k2 <= k1 or self.norms[k1] == 0:
            return float("nan")
        return (self.norms[k2] / self.norms[k1]) ** (1.0 / (k2 - k1))

    def to_json_obj(self) -> dict:
        obj = self.poly.to_json_obj()
        obj.update(trunc_degree=self.trunc_degree,
                   tail_bound=self.tail_bound if self.certified else None,
                   norms=list(self.norms), growth_rate=self.growth_rate())
        return obj


def formal_inverse(phi, N: int, cap: int = opnorm.DEFAULT_COLUMN_CAP) -> FormalInverse:
    """Unique ``psi_N`` with ``phi (x) psi_N = e_0`` modulo words longer than ``N``.

    Graded recursion: ``b_() = 1/a_0`` and
    ``b_h = -(1/a_0) sum_{h = f g, f != ()} a_f b_g``.  When
    ``sum_{f != ()} |a_f| < |a_0|`` the inverse is a convergent geometric
    series and a tail bound is attached; otherwise the tail is unknown.
    """
    phi = coerce_poly(phi)
    if N < 0:
        raise PreconditionError("N must be >= 0")
    a0 = phi.coeff(())
    if a0 == 0:
        raise PreconditionError("constant coefficient is zero: not formally invertible")
    n = phi.n
    items = [(w, c) for w, c in phi.items() if w]
    b = {(): 1 / a0}
    layer_words = {0: [()]}
    sq = [abs(1 / a0) ** 2]
    total = 1
    for m in range(1, N + 1):
        layer: dict = {}
        for f, c in items:
            if len(f) > m:
                continue
            for g in layer_words.get(m - len(f), ()):
                h = f + g
                layer[h] = layer.get(h, 0j) - c * b[g] / a0
        layer = {h: v for h, v in layer.items() if v != 0}
        total += len(layer)
        if total > cap:
            raise ResourceError(f"formal inverse exceeds {cap} coefficients")
        b.update(layer)
        layer_words[m] = list(layer)
        sq.append(math.fsum(abs(v) ** 2 for v in layer.values()))
    norms = tuple(math.sqrt(math.fsum(sq[:k + 1])) for k in range(N + 1))
    poly = FreePoly._raw(n, b)
    rest = phi - FreePoly.monomial(n, (), a0)
    Lp = rest.l1() / abs(a0)
    if rest.is_zero():
        tail = 0.0
    elif Lp < 1:
        K0 = -(-(N + 1) // rest.degree)
        tail = Lp ** K0 / ((1 - Lp) * abs(a0))
    else:
        tail = float("inf")
    return FormalInverse(poly, N, tail, norms)


@dataclass(frozen=True)
class InvertibilityReport:
    outer_profile: list
    sigma_min_profile: list
    sigma_degrees: list
    inverse_norms: list
    inverse_growth: float
    alphabet: int
    invertible: Optional[bool]
    verdict: str

    def to_json_obj(self) -> dict:
        return {
            "outer_profile": self.outer_profile,
            "sigma_min_profile": self.sigma_min_profile,
            "sigma_degrees": self.sigma_degrees,
            "inverse_norms": self.inverse_norms,
            "inverse_growth": self.inverse_growth,
            "alphabet": self.alphabet,
            "invertible": self.invertible,
            "verdict": self.verdict,
        }


def invertibility_report(phi, N: int, tol: float = 1e-6, sigma_floor: float = 1e-3,
                         section_columns: int = 5000,
                         cap: int = opnorm.DEFAULT_COLUMN_CAP) -> InvertibilityReport:
    """Evidence for or against invertibility of ``phi`` in the multiplier algebra.

    ``phi`` is invertible exactly when it is outer and bounded below.  The
    report combines the outer distance profile, the smallest singular
    values of finite sections (for degrees whose sections have at most
    ``section_columns`` columns) and the growth of the formal inverse.  All
    verdicts are at the given degree and tolerance, never certificates.
    Unused letters are compressed away first.
    """
    poly, m = compress_alphabet(coerce_poly(phi))
    if poly.is_zero():
        return InvertibilityReport([], [], [], [], float("nan"), m, False, "zero is not invertible")
    prof = outer_profile(poly, N, cap)
    degrees = [k for k in range(N + 1) if count_words(m, k) <= section_columns]
    sig = opnorm.sigma_min_lower_profile(poly, degrees, cap) if degrees else []
    if poly.coeff(()) != 0:
        inv = formal_inverse(poly, N, cap)
        norms, growth = list(inv.norms), inv.growth_rate()
    else:
        norms, growth = [], float("inf")
    outer_ok = prof[-1] < tol
    below_ok = bool(sig) and sig[-1] > sigma_floor
    if outer_ok and below_ok:
        return InvertibilityReport(prof, sig, degrees, norms, growth, m, True,
                                   "invertible at tolerance")
    if not outer_ok:
        return InvertibilityReport(prof, sig, degrees, norms, growth, m, False,
                                   "not invertible at tolerance: not outer")
    return InvertibilityReport(prof, sig, degrees, norms, growth, m, None,
                               "inconclusive: outer but not bounded below at this degree")
