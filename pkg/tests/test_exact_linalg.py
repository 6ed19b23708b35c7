from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import brute_rank, segre, span_points, sympy_rank
from segre_lab.errors import DimensionMismatch, InvalidPoint
from segre_lab.exact_linalg import (
    FieldSpec,
    ScalarMatrix,
    _pack_gf2,
    _rank_mod_p,
    batch_rank,
    in_span,
    kernel_basis,
    rank,
    rank_gf2_packed,
    rank_of_vectors,
    rref,
    span_basis,
    subspace_intersection,
)

PRIMES = [2, 3, 5, 7]


@st.composite
def matrices(draw, p=None, max_rows=6, max_cols=7):
    p = draw(st.sampled_from(PRIMES)) if p is None else p
    m = draw(st.integers(1, max_rows))
    n = draw(st.integers(1, max_cols))
    rows = draw(st.lists(st.lists(st.integers(0, p - 1), min_size=n, max_size=n), min_size=m, max_size=m))
    return FieldSpec.gf(p), rows, n


@st.composite
def rational_matrices(draw, max_rows=5, max_cols=5):
    m = draw(st.integers(1, max_rows))
    n = draw(st.integers(1, max_cols))
    entry = st.fractions(min_value=-6, max_value=6, max_denominator=5)
    rows = draw(st.lists(st.lists(entry, min_size=n, max_size=n), min_size=m, max_size=m))
    return FieldSpec.rationals(), rows, n


# -- examples ---------------------------------------------------------------


def test_identity_rank_gf5():
    assert ScalarMatrix.identity(FieldSpec.gf(5), 3).rank() == 3


def test_equal_rows_gf2():
    assert ScalarMatrix.from_rows(FieldSpec.gf(2), [[1, 1], [1, 1]]).rank() == 1


def test_six_by_eight_segre_matrix_rank_matches_oracle():
    # three points on a line of factor 1 plus three further points of (P^1)^3
    pts = [
        ((1, 0), (1, 0), (0, 1)),
        ((0, 1), (1, 0), (0, 1)),
        ((1, 1), (1, 0), (0, 1)),
        ((1, 2), (0, 1), (1, 1)),
        ((1, 1), (1, 1), (1, 0)),
        ((0, 1), (1, 2), (1, 2)),
    ]
    rows = [segre(p, 3) for p in pts]
    M = ScalarMatrix.from_rows(FieldSpec.gf(3), rows)
    assert M.shape == (6, 8)
    assert M.rank() == 5  # frozen from the sympy and span-count oracles
    assert sympy_rank(3, rows, 8) == 5


def test_kernel_of_identity_is_empty():
    assert kernel_basis(ScalarMatrix.identity(FieldSpec.gf(3), 4)) == []


def test_kernel_of_zero_matrix():
    K = kernel_basis(ScalarMatrix.zeros(FieldSpec.gf(7), 2, 3))
    assert len(K) == 3
    assert rank_of_vectors(FieldSpec.gf(7), K) == 3


def test_bidegree_11_forms_through_five_points_of_a_conic():
    # five points of the diagonal of P^1 x P^1 over GF(5), i.e. of the curve x0 y1 - x1 y0 = 0
    f = FieldSpec.gf(5)
    pts = [((1, t), (1, t)) for t in range(4)] + [((0, 1), (0, 1))]
    M = ScalarMatrix.from_rows(f, [segre(p, 5) for p in pts])
    K = M.kernel_basis()
    assert len(K) == 1
    # the kernel vector is the equation x0 y1 - x1 y0 (coefficients of x_a y_b)
    v = K[0]
    assert v[0] == 0 and v[3] == 0 and v[1] != 0 and (v[1] + v[2]) % 5 == 0


def test_intersection_of_a_line_with_itself():
    f = FieldSpec.gf(3)
    assert subspace_intersection(f, [(1, 2, 0)], [(2, 1, 0)]) == [(1, 2, 0)]


def test_intersection_of_two_axes_is_zero():
    f = FieldSpec.gf(3)
    assert subspace_intersection(f, [(1, 0, 0)], [(0, 1, 0)]) == []


def test_in_span_returns_coefficients():
    f = FieldSpec.gf(5)
    basis = [(1, 0, 0), (0, 1, 0)]
    assert in_span(f, (1, 0, 0), basis) == (True, (1, 0))
    assert in_span(f, (0, 0, 1), basis) == (False, None)


def test_dimension_mismatches_raise():
    f = FieldSpec.gf(3)
    with pytest.raises(DimensionMismatch):
        ScalarMatrix.from_rows(f, [[1, 2], [1]])
    with pytest.raises(DimensionMismatch):
        in_span(f, (1, 0), [(1, 0, 0)])
    with pytest.raises(DimensionMismatch):
        ScalarMatrix.identity(f, 2).apply((1, 2, 3))


def test_field_parsing_and_coercion():
    assert FieldSpec.parse("gf3") == FieldSpec.gf(3)
    assert FieldSpec.parse("GF(5)") == FieldSpec.gf(5)
    assert FieldSpec.parse("qq") == FieldSpec.rationals()
    with pytest.raises(ValueError):
        FieldSpec.gf(4)
    assert FieldSpec.gf(5)("1/2") == 3
    with pytest.raises(InvalidPoint):
        FieldSpec.gf(3)(Fraction(1, 3))
    with pytest.raises(InvalidPoint):
        FieldSpec.gf(3)(0.5)


def test_field_json_round_trip():
    for f in (FieldSpec.gf(2), FieldSpec.gf(7), FieldSpec.rationals()):
        assert FieldSpec.from_json(f.to_json()) == f


def test_rational_rank_has_no_float_drift():
    # Hilbert-like rows: float elimination loses rank information here
    rows = [[Fraction(1, i + j + 1) for j in range(6)] for i in range(6)]
    assert rank(ScalarMatrix.from_rows(FieldSpec.rationals(), rows)) == 6
    rows[5] = [a + b for a, b in zip(rows[0], rows[1])]
    assert rank(ScalarMatrix.from_rows(FieldSpec.rationals(), rows)) == 5


# -- properties --------------------------------------------------------------


@given(matrices())
def test_rank_matches_sympy(data):
    f, rows, n = data
    assert rank_of_vectors(f, rows, n) == sympy_rank(f.p, rows, n)


@given(matrices(max_rows=4, max_cols=4))
def test_rank_matches_span_count(data):
    f, rows, n = data
    if f.p ** len(rows) > 3000:
        return
    assert rank_of_vectors(f, rows, n) == brute_rank(f.p, rows)


@given(rational_matrices())
def test_rational_rank_matches_sympy(data):
    f, rows, n = data
    assert rank_of_vectors(f, rows, n) == sympy_rank(None, rows, n)


@given(st.one_of(matrices(), rational_matrices()))
def test_rank_equals_transpose_rank(data):
    f, rows, n = data
    M = ScalarMatrix.from_rows(f, rows, n)
    assert M.rank() == M.transpose().rank()


@given(st.one_of(matrices(), rational_matrices()))
def test_rank_nullity(data):
    f, rows, n = data
    M = ScalarMatrix.from_rows(f, rows, n)
    K = M.kernel_basis()
    assert M.rank() + len(K) == n
    for v in K:
        assert not any(M.apply(v))
    assert rank_of_vectors(f, K, n) == len(K)


@given(matrices(p=2, max_rows=8, max_cols=12))
def test_packed_gf2_rank_matches_plain_elimination(data):
    _, rows, n = data
    assert rank_gf2_packed(_pack_gf2(rows)) == _rank_mod_p(rows, 2, n)


@given(st.sampled_from(PRIMES), st.integers(1, 40), st.integers(1, 5), st.integers(1, 9), st.integers(0, 2**32 - 1))
def test_batch_rank_matches_scalar_rank(p, B, m, n, seed):
    arr = np.random.default_rng(seed).integers(0, p, size=(B, m, n))
    got = batch_rank(arr, p)
    want = [rank_of_vectors(FieldSpec.gf(p), a.tolist(), n) for a in arr]
    assert got.tolist() == want


@given(matrices(max_rows=4, max_cols=5), st.data())
def test_grassmann_identity(data, draw):
    f, U, n = data
    m = draw.draw(st.integers(1, 4))
    V = draw.draw(st.lists(st.lists(st.integers(0, f.p - 1), min_size=n, max_size=n), min_size=m, max_size=m))
    dim_u = rank_of_vectors(f, U, n)
    dim_v = rank_of_vectors(f, V, n)
    dim_sum = rank_of_vectors(f, U + V, n)
    inter = subspace_intersection(f, U, V)
    assert dim_u + dim_v == dim_sum + len(inter)
    for w in inter:
        assert in_span(f, w, U)[0] and in_span(f, w, V)[0]


@given(matrices(max_rows=3, max_cols=4), st.data())
def test_in_span_matches_enumeration(data, draw):
    f, basis, n = data
    if f.p ** len(basis) > 400:
        return
    v = tuple(draw.draw(st.lists(st.integers(0, f.p - 1), min_size=n, max_size=n)))
    ok, coeffs = in_span(f, v, basis)
    assert ok == (v in span_points(f.p, basis))
    if ok:
        combo = [sum(c * b[i] for c, b in zip(coeffs, basis)) % f.p for i in range(n)]
        assert tuple(combo) == v


@given(rational_matrices())
def test_rational_rref_is_deterministic_and_canonical(data):
    f, rows, n = data
    a = rref(f, rows, n)
    b = rref(f, [list(r) for r in rows], n)
    assert a == b
    red, pivots = a
    for row, c in zip(red, pivots):
        assert row[c] == 1
    # the RREF is an invariant of the row space
    scaled = [[x * 3 for x in r] for r in reversed(rows)]
    assert span_basis(f, scaled) == span_basis(f, rows)
