import json
import math

import numpy as np
import pytest
import scipy.io
from hypothesis import given, settings

from conftest import e, polys, random_poly
from oracles import dense_section, toeplitz_section
from freefock import catalog, opnorm
from freefock.errors import PreconditionError, ResourceError
from freefock.freepoly import FreePoly, TruncatedSeries, count_words, l1_upper_bound, tensor, words_upto

ONE_PLUS_Z = FreePoly(1, {(): 1, (1,): 1})


def test_shape_and_isometry_of_single_letter():
    sec = opnorm.finite_section(e(2, (1,)), 1)
    assert sec.shape[1] == 3
    np.testing.assert_allclose(sec.singular_values(), 1.0, atol=1e-14)
    for j, g in enumerate(words_upto(2, 1)):
        assert sec.column(j) == e(2, (1,) + g)


@pytest.mark.parametrize("n,N", [(1, 4), (2, 3), (3, 2)])
def test_column_count(n, N):
    sec = opnorm.finite_section(e(n, (1,)), N)
    assert sec.shape[1] == count_words(n, N)


@given(polys(n=2, max_len=3))
@settings(max_examples=25)
def test_column_identity(phi):
    N = 3
    sec = opnorm.finite_section(phi, N)
    for j, g in enumerate(sec.column_words()):
        assert sec.column(j) == tensor(phi, e(2, g))


def test_sparse_and_dense_agree_with_oracle(rng):
    for _ in range(5):
        phi = random_poly(rng, n=2, max_deg=3, terms=4)
        sec = opnorm.finite_section(phi, 4)
        ref = np.linalg.svd(dense_section(phi, 4), compute_uv=False)
        np.testing.assert_allclose(sec.singular_values(), ref, atol=1e-12)


def test_one_letter_band_matrix():
    A = toeplitz_section([1, 1], 2)
    assert A.shape == (4, 3)
    ref = np.linalg.svd(A, compute_uv=False)[0]
    assert opnorm.linf_lower(ONE_PLUS_Z, 2) == pytest.approx(ref, rel=1e-13)


def test_homogeneous_unit_vector_is_isometric():
    phi = FreePoly(2, {(1,): 1, (2,): 1}).normalized()
    for N in range(5):
        np.testing.assert_allclose(opnorm.finite_section(phi, N).singular_values(), 1.0, atol=1e-12)


def test_inner_monomial_norm_one():
    for N in (0, 3, 8, 11):
        assert opnorm.linf_lower(e(2, (1, 2)), N) == pytest.approx(1.0, abs=1e-12)


def test_toeplitz_cross_validation():
    values = []
    for N in (5, 10, 40, 200):
        ref = np.linalg.svd(toeplitz_section([1, 1], N), compute_uv=False)[0]
        got = opnorm.linf_lower(ONE_PLUS_Z, N)
        assert got == pytest.approx(ref, rel=1e-11)
        values.append(got)
    assert values == sorted(values)
    assert values[-1] < 2.0


def test_right_letter_product_has_norm_sqrt2():
    p = tensor(FreePoly(2, {(): 1, (1,): 1}), e(2, (2,)))
    for N in range(8):
        assert opnorm.linf_lower(p, N) == pytest.approx(math.sqrt(2), abs=1e-12)


def test_linf_estimate_examples():
    assert opnorm.linf_estimate(e(2, (1,)), 1e-9) == (pytest.approx(1.0), True)
    val, ok = opnorm.linf_estimate(FreePoly(2, {(2,): 1, (1, 1): 1}).normalized(), 1e-9)
    assert ok and val == pytest.approx(1.0, abs=1e-12)
    val, ok = opnorm.linf_estimate(ONE_PLUS_Z, 1e-3, N_max=500)
    assert ok and 1.99 <= val <= 2.0


def test_linf_estimate_rejects_bad_tol():
    with pytest.raises(PreconditionError):
        opnorm.linf_estimate(ONE_PLUS_Z, 0.0)


def test_right_mult_norm():
    p = FreePoly(2, {(): 1, (1,): 1})
    for N in (0, 4, 8):
        assert opnorm.right_mult_norm(tensor(e(2, (2,)), p), N) == pytest.approx(math.sqrt(2), abs=1e-12)
    assert opnorm.right_mult_norm(e(2, (1,)), 5) == pytest.approx(1.0)
    vals = [opnorm.right_mult_norm(tensor(p, e(2, (2,))), N) for N in (2, 6, 10)]
    refs = [np.linalg.svd(toeplitz_section([1, 1], N), compute_uv=False)[0] for N in (2, 6, 10)]
    np.testing.assert_allclose(vals, refs, rtol=1e-11)


def test_sigma_min_profiles():
    prof = opnorm.sigma_min_lower_profile(FreePoly(1, {(): 1, (1,): -0.5}), [1, 5, 20, 100, 400])
    assert all(v >= 0.5 for v in prof)
    assert all(a >= b - 1e-12 for a, b in zip(prof, prof[1:]))
    assert opnorm.sigma_min_lower_profile(e(2, (1,)), [0, 3, 6]) == pytest.approx([1, 1, 1])
    phi = FreePoly(2, {(1,): 1, (): -0.5})
    got = opnorm.sigma_min_lower_profile(phi, [1, 2, 3, 4])
    ref = [np.linalg.svd(dense_section(phi, N), compute_uv=False)[-1] for N in [1, 2, 3, 4]]
    np.testing.assert_allclose(got, ref, rtol=1e-10)


def test_sigma_min_profile_preconditions():
    with pytest.raises(PreconditionError):
        opnorm.sigma_min_lower_profile(ONE_PLUS_Z, [])
    with pytest.raises(PreconditionError):
        opnorm.sigma_min_lower_profile(ONE_PLUS_Z, [3, 2])


@pytest.mark.parametrize("method", ["lanczos", "power"])
def test_iterative_solvers_match_dense(method, rng):
    phi = random_poly(rng, n=2, max_deg=2, terms=4)
    sec = opnorm.finite_section(phi, 6)
    ref = np.linalg.svd(dense_section(phi, 6), compute_uv=False)[0]
    val, ok = opnorm.sigma_max(sec, method=method)
    assert val <= ref * (1 + 1e-12)
    assert val == pytest.approx(ref, rel=1e-6 if method == "power" else 1e-10)


def test_banded_solver_matches_dense():
    phi = FreePoly(1, {(): 0.3, (1,): -1 + 0.2j, (1, 1, 1): 0.5j})
    sec = opnorm.finite_section(phi, 30)
    s = np.linalg.svd(sec.to_dense(), compute_uv=False)
    assert opnorm.sigma_max(sec, "banded")[0] == pytest.approx(s[0], rel=1e-12)
    assert opnorm.sigma_min(sec, "banded")[0] == pytest.approx(s[-1], rel=1e-9)


def test_sigma_min_lanczos_matches_dense(rng):
    phi = FreePoly(2, {(): 1, (1,): 0.4, (2, 1): -0.3j})
    sec = opnorm.finite_section(phi, 6)
    ref = np.linalg.svd(sec.to_dense(), compute_uv=False)[-1]
    assert opnorm.sigma_min(sec, "lanczos")[0] == pytest.approx(ref, rel=1e-8)


def test_monotone_and_sandwiched_on_catalog():
    examples = [
        ONE_PLUS_Z,
        FreePoly(2, {(): 1, (1,): 1, (2, 2): -0.5}),
        catalog.mobius(2, (1, 2), 0.5, 6).poly,
        catalog.distinct_first_letter(2, [((1,), 1), ((2, 2, 2), 1)]),
    ]
    for phi in examples:
        vals = [opnorm.linf_lower(phi, N) for N in range(8)]
        assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))
        assert vals[-1] <= l1_upper_bound(phi) + 1e-12
        mins = opnorm.sigma_min_lower_profile(phi, list(range(8)))
        assert all(a >= b - 1e-12 for a, b in zip(mins, mins[1:]))


def test_homogeneous_norm_law(rng):
    for _ in range(10):
        k = int(rng.integers(1, 4))
        words = {tuple(int(a) for a in rng.integers(1, 3, size=k)): complex(*rng.standard_normal(2)) for _ in range(4)}
        x = catalog.homogeneous(2, words)
        assert opnorm.linf_lower(x, 5) == pytest.approx(1.0, abs=1e-10)


def test_column_cap():
    with pytest.raises(ResourceError):
        opnorm.finite_section(e(2, (1,)), 12, cap=100)


def test_series_interval_carries_tail():
    s = catalog.mobius(1, (1,), 0.5, 4)
    est = opnorm.linf_estimate_report(s, 1e-6, N_max=30)
    assert est.tail_bound == s.tail_bound
    lo, hi = est.interval
    assert lo == est.value and hi >= l1_upper_bound(s) + s.tail_bound - 1e-15


def test_matrix_market_export(tmp_path):
    phi = FreePoly(2, {(): 1, (2,): 0.5j})
    sec = opnorm.finite_section(phi, 3)
    mtx, table = opnorm.export_matrix_market(sec, tmp_path / "sec.mtx")
    M = scipy.io.mmread(str(mtx)).toarray()
    np.testing.assert_allclose(M, sec.to_dense())
    words = json.loads(table.read_text())
    assert [tuple(w) for w in words["columns"]] == sec.column_words()
