"""Words over ``{1..n}`` and sparse free polynomials in the full Fock space.

A word is a tuple of letters; ``()`` is the vacuum ``e_0``.  A
:class:`FreePoly` is a finite complex combination of words, i.e. a finitely
supported vector of the Fock space with the words as orthonormal basis.
Multiplication is concatenation of words (the tensor product), so
``(phi @ psi)`` has coefficient ``sum_{h = f g} a_f b_g`` at ``h``.

Words are ordered graded-lexicographically: by length, then letter by
letter.  The position of a word in that order is its *index*, which is what
the finite-section machinery uses for matrix rows and columns.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from freefock.errors import AlphabetMismatchError, PreconditionError

Word = tuple

#: Coefficients below this modulus are dropped after arithmetic.
PRUNE_EPS = 1e-15


# -- words -----------------------------------------------------------------

def validate_word(word, n: int) -> Word:
    w = tuple(int(a) for a in word)
    for a in w:
        if not 1 <= a <= n:
            raise PreconditionError(f"letter {a} outside alphabet 1..{n}")
    return w


def concat(f: Word, g: Word) -> Word:
    return tuple(f) + tuple(g)


def reverse(f: Word) -> Word:
    return tuple(reversed(f))


def word_key(w: Word):
    """Sort key for graded-lexicographic order."""
    return (len(w), w)


def count_words(n: int, N: int) -> int:
    """Number of words of length at most ``N`` over ``n`` letters."""
    if N < 0:
        return 0
    if n == 1:
        return N + 1
    return (n ** (N + 1) - 1) // (n - 1)


def word_index(w: Word, n: int) -> int:
    """Position of ``w`` in graded-lexicographic order (``()`` is 0)."""
    val = 0
    for a in w:
        val = val * n + (a - 1)
    return count_words(n, len(w) - 1) + val


def index_word(i: int, n: int) -> Word:
    """Inverse of :func:`word_index`."""
    if i < 0:
        raise PreconditionError("negative word index")
    if n == 1:
        return (1,) * i
    length = 0
    while count_words(n, length) <= i:
        length += 1
    val = i - count_words(n, length - 1)
    letters = []
    for _ in range(length):
        val, r = divmod(val, n)
        letters.append(r + 1)
    return tuple(reversed(letters))


def words_upto(n: int, N: int) -> Iterator[Word]:
    """All words of length ``<= N`` in graded-lexicographic order."""
    layer = [()]
    for _ in range(N + 1):
        yield from layer
        layer = [w + (a,) for w in layer for a in range(1, n + 1)]


def words_of_length(n: int, k: int) -> Iterator[Word]:
    layer = [()]
    for _ in range(k):
        layer = [w + (a,) for w in layer for a in range(1, n + 1)]
    return iter(layer)


# -- polynomials ------------------------------------------------------------

class FreePoly:
    """Immutable sparse element of ``F^2(H_n)`` with finite support.

    Parameters
    ----------
    n : int
        Alphabet size.
    terms : mapping or iterable of (word, coefficient) pairs
        Repeated words are summed.  Exact zeros are dropped.
    """

    __slots__ = ("n", "_terms")

    def __init__(self, n: int, terms=None):
        if int(n) < 1:
            raise PreconditionError("alphabet size must be positive")
        self.n = int(n)
        acc: dict = {}
        if terms is not None:
            items = terms.items() if isinstance(terms, Mapping) else terms
            for w, c in items:
                w = validate_word(w, self.n)
                acc[w] = acc.get(w, 0j) + complex(c)
        self._terms = {w: c for w, c in acc.items() if c != 0}

    @classmethod
    def _raw(cls, n: int, terms: dict, prune: float = PRUNE_EPS) -> "FreePoly":
        # trusted constructor: words already validated
        obj = cls.__new__(cls)
        obj.n = n
        obj._terms = {w: c for w, c in terms.items() if abs(c) >= prune and c != 0}
        return obj

    # constructors
    @classmethod
    def zero(cls, n: int) -> "FreePoly":
        return cls(n)

    @classmethod
    def one(cls, n: int) -> "FreePoly":
        return cls(n, {(): 1.0})

    @classmethod
    def monomial(cls, n: int, word, coeff=1.0) -> "FreePoly":
        return cls(n, {tuple(word): coeff})

    @classmethod
    def from_dense(cls, n: int, vec, words) -> "FreePoly":
        """Build from a coefficient vector aligned with ``words``."""
        return cls._raw(n, {w: complex(c) for w, c in zip(words, vec)})

    # inspection
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        """(word, coefficient) pairs in graded-lexicographic order."""
        return sorted(self._terms.items(), key=lambda kv: word_key(kv[0]))

    def words(self) -> list:
        return sorted(self._terms, key=word_key)

    def coeff(self, word) -> complex:
        return self._terms.get(tuple(word), 0j)

    @property
    def degree(self) -> int:
        return max((len(w) for w in self._terms), default=-1)

    @property
    def min_degree(self) -> int:
        return min((len(w) for w in self._terms), default=-1)

    def is_zero(self) -> bool:
        return not self._terms

    def is_homogeneous(self) -> bool:
        return len({len(w) for w in self._terms}) <= 1

    def letters(self) -> set:
        return {a for w in self._terms for a in w}

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self):
        return iter(self.words())

    def __repr__(self) -> str:
        if not self._terms:
            return f"FreePoly(n={self.n}, 0)"
        parts = []
        for w, c in self.items():
            name = "e0" if not w else "e" + "".join(map(str, w)) if self.n < 10 else "e" + ".".join(map(str, w))
            parts.append(f"({c:.6g}){name}")
        return f"FreePoly(n={self.n}, " + " + ".join(parts) + ")"

    # comparison
    def __eq__(self, other) -> bool:
        if not isinstance(other, FreePoly):
            return NotImplemented
        return self.n == other.n and self._terms == other._terms

    __hash__ = None

    def _check(self, other: "FreePoly") -> None:
        if not isinstance(other, FreePoly):
            raise TypeError(f"expected FreePoly, got {type(other).__name__}")
        if other.n != self.n:
            raise AlphabetMismatchError(f"alphabet sizes differ: {self.n} vs {other.n}")

    # linear structure
    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = FreePoly.monomial(self.n, (), other)
        self._check(other)
        acc = dict(self._terms)
        for w, c in other._terms.items():
            acc[w] = acc.get(w, 0j) + c
        return FreePoly._raw(self.n, acc)

    __radd__ = __add__

    def __neg__(self):
        return FreePoly._raw(self.n, {w: -c for w, c in self._terms.items()}, prune=0.0)

    def __sub__(self, other):
        if isinstance(other, (int, float, complex)):
            other = FreePoly.monomial(self.n, (), other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, scalar):
        if isinstance(scalar, FreePoly):
            raise TypeError("use @ (or tensor) for the product of polynomials")
        s = complex(scalar)
        return FreePoly._raw(self.n, {w: s * c for w, c in self._terms.items()})

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / complex(scalar))

    def __matmul__(self, other):
        return tensor(self, other)

    def conj(self) -> "FreePoly":
        return FreePoly._raw(self.n, {w: c.conjugate() for w, c in self._terms.items()}, prune=0.0)

    # Hilbert structure
    def inner(self, other: "FreePoly") -> complex:
        return inner_product(self, other)

    def norm2(self) -> float:
        return math.sqrt(math.fsum(abs(c) ** 2 for c in self._terms.values()))

    def l1(self) -> float:
        return math.fsum(abs(c) for c in self._terms.values())

    def normalized(self) -> "FreePoly":
        nrm = self.norm2()
        if nrm == 0:
            raise PreconditionError("cannot normalize the zero polynomial")
        return self / nrm

    def flip(self) -> "FreePoly":
        return flip(self)

    def truncate(self, N: int) -> "FreePoly":
        """Drop every word longer than ``N``."""
        return FreePoly._raw(self.n, {w: c for w, c in self._terms.items() if len(w) <= N}, prune=0.0)

    def homogeneous_part(self, k: int) -> "FreePoly":
        return FreePoly._raw(self.n, {w: c for w, c in self._terms.items() if len(w) == k}, prune=0.0)

    def distance(self, other: "FreePoly") -> float:
        return (self - other).norm2()

    def power(self, k: int) -> "FreePoly":
        out = FreePoly.one(self.n)
        for _ in range(k):
            out = tensor(out, self)
        return out

    def relabel(self, mapping: Mapping[int, int], n: int) -> "FreePoly":
        """Rename letters through ``mapping`` into an alphabet of size ``n``."""
        return FreePoly._raw(n, {tuple(mapping[a] for a in w): c for w, c in self._terms.items()}, prune=0.0)

    def phase_normalized(self, rel: float = 1e-9) -> "FreePoly":
        """Rotate so the first significant coefficient is positive real.

        "Significant" means modulus above ``rel`` times the largest
        modulus; coefficients are scanned in graded-lexicographic order.
        """
        if not self._terms:
            return self
        cutoff = rel * max(abs(c) for c in self._terms.values())
        for _, c in self.items():
            if abs(c) > cutoff:
                return self * (abs(c) / c)
        return self

    # serialization
    def to_json_obj(self) -> dict:
        return {
            "n": self.n,
            "terms": [{"word": list(w), "re": c.real, "im": c.imag} for w, c in self.items()],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_json_obj(), **kw)

    @classmethod
    def from_json_obj(cls, obj) -> "FreePoly":
        if not isinstance(obj, Mapping) or "n" not in obj or "terms" not in obj:
            raise PreconditionError('polynomial JSON needs keys "n" and "terms"')
        n = obj["n"]
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise PreconditionError('"n" must be a positive integer')
        seen = set()
        terms = []
        for t in obj["terms"]:
            try:
                word = t["word"]
                re, im = float(t.get("re", 0.0)), float(t.get("im", 0.0))
            except (KeyError, TypeError, ValueError) as exc:
                raise PreconditionError(f"malformed term {t!r}") from exc
            if not isinstance(word, list) or not all(isinstance(a, int) and not isinstance(a, bool) for a in word):
                raise PreconditionError(f"word must be a list of integers: {word!r}")
            w = validate_word(word, n)
            if w in seen:
                raise PreconditionError(f"duplicate word {list(w)}")
            seen.add(w)
            terms.append((w, complex(re, im)))
        return cls(n, terms)

    @classmethod
    def from_json(cls, text: str) -> "FreePoly":
        return cls.from_json_obj(json.loads(text))


def tensor(phi: FreePoly, psi: FreePoly) -> FreePoly:
    """Concatenation product: coefficient of ``h`` is ``sum_{h=fg} a_f b_g``."""
    phi._check(psi)
    acc: dict = {}
    get = acc.get
    for f, a in phi._terms.items():
        for g, b in psi._terms.items():
            h = f + g
            acc[h] = get(h, 0j) + a * b
    return FreePoly._raw(phi.n, acc)


def flip(phi: FreePoly) -> FreePoly:
    """Reverse every word; unitary involution of the Fock space."""
    return FreePoly._raw(phi.n, {w[::-1]: c for w, c in phi._terms.items()}, prune=0.0)


def inner_product(phi: FreePoly, psi: FreePoly) -> complex:
    """``<phi, psi> = sum_f a_f conj(b_f)`` (linear in the first slot)."""
    phi._check(psi)
    small, large, swap = (phi, psi, False) if len(phi) <= len(psi) else (psi, phi, True)
    s = 0j
    for w, c in small._terms.items():
        d = large._terms.get(w)
        if d is not None:
            s += c * d.conjugate() if not swap else d * c.conjugate()
    return s


def l1_upper_bound(phi) -> float:
    """``sum |a_f|``; an upper bound for the multiplier norm."""
    if isinstance(phi, TruncatedSeries):
        return phi.poly.l1()
    return phi.l1()


def adjoint_apply(phi: FreePoly, psi: FreePoly, max_len: int | None = None) -> FreePoly:
    """Apply the adjoint of left multiplication by ``phi`` to ``psi``.

    Returns ``sum_h <psi, phi (x) e_h> e_h``; for inner ``phi`` this
    recovers ``chi`` from ``psi = phi (x) chi``.  Words ``h`` longer than
    ``max_len`` are dropped.
    """
    phi._check(psi)
    pterms = phi._terms
    lens = sorted({len(u) for u in pterms})
    acc: dict = {}
    for w, c in psi._terms.items():
        for k in lens:
            if k > len(w):
                break
            a = pterms.get(w[:k])
            if a is None:
                continue
            h = w[k:]
            if max_len is not None and len(h) > max_len:
                continue
            acc[h] = acc.get(h, 0j) + c * a.conjugate()
    return FreePoly._raw(phi.n, acc)


def compress_alphabet(phi: FreePoly) -> tuple:
    """Relabel the letters actually used to ``1..m``.

    Returns ``(relabelled, m)``.  Left multiplication by a polynomial in a
    sub-alphabet splits into orthogonal blocks, the largest of which is the
    section over that sub-alphabet, so norms and extreme singular values of
    sections are unchanged.
    """
    used = sorted(phi.letters())
    if len(used) == phi.n or not used:
        if not used:
            return phi.relabel({}, 1), 1
        return phi, phi.n
    mapping = {a: i + 1 for i, a in enumerate(used)}
    return phi.relabel(mapping, len(used)), len(used)


def coerce_poly(x) -> FreePoly:
    if isinstance(x, TruncatedSeries):
        return x.poly
    if isinstance(x, FreePoly):
        return x
    raise TypeError(f"expected FreePoly or TruncatedSeries, got {type(x).__name__}")


@dataclass(frozen=True)
class TruncatedSeries:
    """A series known through its terms of degree ``<= trunc_degree``.

    ``tail_bound`` bounds the l2 norm of everything that was discarded;
    it is ``0.0`` for exact polynomials.
    """

    poly: FreePoly
    trunc_degree: int
    tail_bound: float = 0.0

    def __post_init__(self):
        if self.trunc_degree < 0:
            raise PreconditionError("trunc_degree must be >= 0")
        if self.poly.degree > self.trunc_degree:
            raise PreconditionError("poly degree exceeds trunc_degree")
        if not (self.tail_bound >= 0 and math.isfinite(self.tail_bound)):
            raise PreconditionError("tail_bound must be finite and nonnegative")

    @classmethod
    def exact(cls, poly: FreePoly) -> "TruncatedSeries":
        return cls(poly, max(poly.degree, 0), 0.0)

    @property
    def n(self) -> int:
        return self.poly.n

    def to_json_obj(self) -> dict:
        obj = self.poly.to_json_obj()
        obj["trunc_degree"] = self.trunc_degree
        obj["tail_bound"] = self.tail_bound
        return obj


def as_series(x) -> TruncatedSeries:
    if isinstance(x, TruncatedSeries):
        return x
    if isinstance(x, FreePoly):
        return TruncatedSeries.exact(x)
    raise TypeError(f"expected FreePoly or TruncatedSeries, got {type(x).__name__}")
