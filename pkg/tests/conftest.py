import itertools
import math

import numpy as np
import pytest
from hypothesis import settings, strategies as st

from freefock.freepoly import FreePoly

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def words(n, max_len):
    return st.lists(st.integers(1, n), max_size=max_len).map(tuple)


coeffs = st.complex_numbers(min_magnitude=0.05, max_magnitude=2.0, allow_nan=False, allow_infinity=False)


@st.composite
def polys(draw, n=2, max_len=3, max_terms=5, nonzero=True):
    terms = draw(st.dictionaries(words(n, max_len), coeffs, min_size=1 if nonzero else 0, max_size=max_terms))
    return FreePoly(n, terms)


def random_poly(rng, n=2, max_deg=3, terms=4, real=False):
    out = {}
    for _ in range(terms):
        k = int(rng.integers(0, max_deg + 1))
        w = tuple(int(a) for a in rng.integers(1, n + 1, size=k))
        c = rng.standard_normal() + (0 if real else 1j * rng.standard_normal())
        out[w] = out.get(w, 0) + c
    p = FreePoly(n, out)
    return p if not p.is_zero() else FreePoly.one(n)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def e(n, word=(), c=1.0):
    return FreePoly.monomial(n, tuple(word), c)


# one (criterion, passed, detail) entry per acceptance check, printed at the end
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
