import math

import numpy as np
import pytest

from conftest import e
from oracles import circle_sup, geometric_inverse_bruteforce, series_divide
from freefock import catalog, factor, opnorm
from freefock.errors import PreconditionError
from freefock.freepoly import FreePoly, inner_product, tensor


def test_monomials_are_inner():
    assert catalog.monomial(2, ()) == e(2)
    for w in [(1, 2), (2, 2, 2)]:
        assert factor.is_inner(catalog.monomial(2, w)) == (True, 0.0)


def test_homogeneous_examples():
    x = catalog.homogeneous(2, {(1,): 1, (2,): 1})
    assert x == FreePoly(2, {(1,): 1, (2,): 1}) / math.sqrt(2)
    x2 = catalog.homogeneous(2, {(1, 1): 1, (1, 2): 1, (2, 1): 1, (2, 2): 1})
    assert all(c == pytest.approx(0.5) for c in x2.terms.values())
    assert catalog.homogeneous(2, {(1,): 3}) == e(2, (1,))
    with pytest.raises(PreconditionError):
        catalog.homogeneous(2, {(1,): 1, (1, 2): 1})


def test_distinct_first_letter():
    y = catalog.distinct_first_letter(2, [((1,), 1 / math.sqrt(2)), ((2, 2, 2), 1 / math.sqrt(2))])
    assert y.coeff((1,)) == pytest.approx(1 / math.sqrt(2))
    assert factor.is_inner(y)[0]
    assert catalog.distinct_first_letter(2, [((1,), 1)]) == e(2, (1,))
    with pytest.raises(PreconditionError):
        catalog.distinct_first_letter(2, [((1,), 1), ((1, 2), 1)])
    with pytest.raises(PreconditionError):
        catalog.distinct_first_letter(2, [((), 1)])


def test_right_letter_inner():
    phi = catalog.right_letter_inner(FreePoly(2, {(): 1, (1,): 1}), 2)
    assert phi == FreePoly(2, {(2,): 1, (1, 2): 1}) / math.sqrt(2)
    assert factor.is_inner(phi)[0]
    assert catalog.right_letter_inner(e(2), 1) == e(2, (1,))
    with pytest.raises(PreconditionError):
        catalog.right_letter_inner(e(2, (2,)), 2)


def test_mobius_coefficients_by_long_division():
    s = catalog.mobius(1, (1,), 0.5, 3)
    assert s.poly == FreePoly(1, {(): -0.5, (1,): 0.75, (1, 1): 0.375, (1, 1, 1): 0.1875})
    for mu in (0.3, 0.5j, -0.7, 0.2 - 0.6j):
        ref = series_divide([-mu, 1], [1, -np.conj(mu)], 12)
        got = catalog.mobius_coeffs(mu, 12)
        np.testing.assert_allclose(got, ref, atol=1e-15)


def test_mobius_zero_mu_and_constant_term():
    assert catalog.mobius(2, (1, 2), 0, 5).poly == e(2, (1, 2))
    assert catalog.mobius(2, (1, 2), 0, 5).tail_bound == 0
    for mu in (0.3, 0.5j, -0.7):
        assert catalog.mobius(2, (2, 1), mu, 6).poly.coeff(()) == -mu
    with pytest.raises(PreconditionError):
        catalog.mobius(1, (1,), 1.0, 4)


def test_mobius_tail_is_exact_remainder():
    # the l2 norm of all coefficients is 1 (inner); the tail is what is missing
    for mu in (0.3, 0.5j, -0.7):
        s = catalog.mobius(1, (1,), mu, 10)
        assert s.poly.norm2() ** 2 + s.tail_bound ** 2 == pytest.approx(1.0, abs=1e-14)


def test_mobius_is_inner_within_tail():
    for f in [(1,), (1, 2)]:
        for mu in (0.3, 0.5j, -0.7):
            s = catalog.mobius(2, f, mu, 30)
            ok, defect = factor.is_inner(s, 1e-9)
            assert ok


def test_mobius_factor_identity():
    mu = 0.4 + 0.3j
    s = catalog.mobius(2, (1, 2), mu, 20)
    lhs = tensor(s.poly, FreePoly(2, {(): 1, (1, 2): -np.conj(mu)}))
    rhs = FreePoly(2, {(1, 2): 1, (): -mu})
    assert lhs.truncate(20).distance(rhs) <= s.tail_bound * (1 + abs(mu)) + 1e-14


def test_h_series():
    assert catalog.h_series(2, (1,), 0, 4).poly == e(2)
    assert catalog.h_series(1, (1,), 0.5, 2).poly == FreePoly(1, {(): 1, (1,): 0.5, (1, 1): 0.25})


@pytest.mark.parametrize("mu", [0.5, 0.3 + 0.4j, -0.6j])
def test_h_series_orthogonal_to_mobius_range(mu):
    prev = None
    for N in (10, 20, 40):
        m = catalog.mobius(2, (1,), mu, N)
        h = catalog.h_series(2, (1,), mu, N)
        worst = 0.0
        for g in [(), (1,), (2,), (1, 1), (1, 2), (2, 1, 2)]:
            worst = max(worst, abs(inner_product(tensor(m.poly, e(2, g)), h.poly)))
        assert worst <= m.tail_bound * (1 / math.sqrt(1 - abs(mu) ** 2)) + 1e-14
        if prev is not None:
            assert worst <= prev + 1e-15
        prev = worst


def test_inherited():
    mu = 0.5
    K = 12
    c = [-mu] + [mu ** (k - 1) * (1 - mu ** 2) for k in range(1, K + 1)]
    assert catalog.inherited(1, (1,), c, K).poly == catalog.mobius(1, (1,), mu, K).poly
    assert catalog.inherited(2, (1, 2), [0, 1], 4).poly == e(2, (1, 2))
    s = catalog.inherited(1, (1,), [1, 1], 10)
    assert s.poly == FreePoly(1, {(): 1, (1,): 1}) and s.tail_bound == 0


def test_inherited_tail():
    s = catalog.inherited(2, (1, 2), [1, 0.5, 0.25, 0.125], 3)
    assert s.poly == FreePoly(2, {(): 1, (1, 2): 0.5})
    assert s.tail_bound == pytest.approx(math.hypot(0.25, 0.125))


def test_inherited_preserves_sup_norm(rng):
    for _ in range(4):
        c = rng.standard_normal(int(rng.integers(2, 9))) * 0.5
        ref = circle_sup(c)
        s = catalog.inherited(1, (1,), c, 60)
        est = opnorm.linf_lower(s, 400)
        assert est <= ref * (1 + 1e-9)
        assert est >= 0.98 * ref
    # substitution of a longer word gives the same norm in two letters
    c = [1, -0.5, 0.25]
    s = catalog.inherited(2, (2, 1), c, 20)
    val = opnorm.linf_lower(s, 12)
    assert 0.95 * circle_sup(c) <= val <= circle_sup(c) * (1 + 1e-9)


def test_exp_series():
    assert catalog.exp_series(FreePoly.zero(2)).poly == e(2)
    s = catalog.exp_series(e(1, (1,)), tol=1e-14)
    for k in range(10):
        assert s.poly.coeff((1,) * k) == pytest.approx(1 / math.factorial(k), rel=1e-15)
    assert s.tail_bound < 1e-13


def test_exp_series_inverse_pair():
    phi = FreePoly(2, {(1,): 0.3, (2, 1): -0.2j})
    a = catalog.exp_series(phi, tol=1e-9)
    b = catalog.exp_series(-phi, tol=1e-9)
    prod = tensor(a.poly, b.poly)
    L = phi.l1()
    # each factor is within its tail of the true exponential, whose norms are <= e^L
    bound = math.exp(L) * (a.tail_bound + b.tail_bound) + a.tail_bound * b.tail_bound
    assert prod.distance(e(2)) <= bound + 1e-13


def test_geometric_inverse():
    assert catalog.geometric_inverse(FreePoly.zero(2), 5).poly == e(2)
    g = catalog.geometric_inverse(e(1, (1,), 0.5), 8)
    assert g.poly.distance(catalog.h_series(1, (1,), 0.5, 8).poly) <= 1e-15
    g = catalog.geometric_inverse(FreePoly(2, {(1,): 0.3, (2,): 0.3}), 4)
    for w, c in g.poly.items():
        assert c == pytest.approx(0.3 ** len(w), rel=1e-12)
    assert len(g.poly) == 31
    with pytest.raises(PreconditionError):
        catalog.geometric_inverse(FreePoly(2, {(1,): 0.6, (2,): 0.5}), 4)


def test_geometric_inverse_against_bruteforce_and_remainder(rng):
    for _ in range(5):
        phi = FreePoly(2, {(): 0.1 * rng.standard_normal(), (1,): 0.2, (2, 1): 0.25j, (1, 1, 2): -0.2})
        N = 7
        g = catalog.geometric_inverse(phi, N)
        rem = tensor(e(2) - phi, g.poly) - e(2)
        assert rem.truncate(N).norm2() <= 1e-13
        assert rem.norm2() <= g.tail_bound
    # without a constant term, powers beyond N cannot reach degree <= N
    phi = FreePoly(2, {(1,): 0.2, (2, 1): 0.25j, (1, 1, 2): -0.2})
    assert catalog.geometric_inverse(phi, 7).poly.distance(geometric_inverse_bruteforce(phi, 7)) <= 1e-14
