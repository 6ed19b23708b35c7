from __future__ import annotations

import random

import pytest
from hypothesis import given, strategies as st

from oracles import segre, sympy_rank
from segre_lab.constructions import gen_example_k2, gen_example_k3, random_concise_set
from segre_lab.errors import InvalidPoint, PreconditionError
from segre_lab.exact_linalg import FieldSpec
from segre_lab.multiproj import (
    MultiprojectiveSpace,
    PointSet,
    apply_projectivity,
    concision_hull,
    embed_set,
    is_concise,
    permute_factors,
    pointset_from_json,
    project_eta,
    project_pi,
    projective_points,
    random_invertible,
    segre_embed,
    width,
)
from strategies import point_sets

GF3 = FieldSpec.gf(3)


def Y(*dims, p=3):
    return MultiprojectiveSpace(dims, FieldSpec.gf(p))


# -- Segre embedding -----------------------------------------------------------


def test_segre_vector_length_in_three_lines():
    Y3 = Y(1, 1, 1)
    assert Y3.n_coords == 8 and Y3.r == 7
    assert len(segre_embed(((1, 0), (0, 1), (1, 1)), Y3)) == 8


def test_segre_of_first_basis_points_is_e0():
    Y3 = Y(2, 1, 3)
    p = ((1, 0, 0), (1, 0), (1, 0, 0, 0))
    v = segre_embed(p, Y3)
    assert v[0] == 1 and not any(v[1:])


def test_segre_direct_kronecker_gf5():
    assert segre_embed(((1, 1), (1, 2)), Y(1, 1, p=5)) == (1, 2, 1, 2)


def test_segre_rejects_wrong_components():
    with pytest.raises(InvalidPoint):
        segre_embed(((1, 0),), Y(1, 1))
    with pytest.raises(InvalidPoint):
        Y(1, 1).point([(1, 0, 0), (1, 0)])
    with pytest.raises(InvalidPoint):
        Y(1).point([(0, 0)])


def test_projective_point_counts():
    for p in (2, 3, 5):
        for n in range(4):
            assert len(projective_points(FieldSpec.gf(p), n)) == (p ** (n + 1) - 1) // (p - 1)


# -- projections ---------------------------------------------------------------


def test_singleton_projections():
    S = PointSet(Y(1, 2), [((1, 2), (0, 1, 1))])
    assert all(len(project_pi(S, i)) == 1 for i in range(2))
    assert width(S) == 0


def test_k2_projections_outside_the_two_special_factors_have_two_points():
    _, S = gen_example_k2(4, 1, 1, GF3, seed=1)
    for h in (2, 3):
        assert len(project_pi(S, h)) == 2


def test_collinear_triple_is_constant_off_its_factor():
    S = PointSet(Y(1, 1, 1), [((1, t), (1, 0), (0, 1)) for t in range(3)])
    assert [len(project_pi(S, i)) for i in range(3)] == [3, 1, 1]
    assert embed_set(S).rank() == 2


def test_width_of_k2_with_two_factors():
    _, S = gen_example_k2(2, 2, 2, GF3, seed=0)
    assert width(S) == 2


def test_width_with_a_shared_factor():
    S = PointSet(Y(1, 1, 1), [((1, a), (1, b), (0, 1)) for a in range(3) for b in range(2)])
    assert width(S) <= 2


def test_concision_hull_examples():
    single = concision_hull(PointSet(Y(2, 1), [((1, 1, 0), (0, 1))]))
    assert single.hull_dims == (0, 0)
    _, S = gen_example_k3(2, 3, FieldSpec.gf(5), seed=0)
    assert concision_hull(S).hull_dims[0] == 3
    flat = PointSet(Y(2, 1), [((1, 0, 0), (0, 1)), ((0, 1, 0), (0, 1))])
    h = concision_hull(flat)
    assert h.hull_dims == (1, 0) and h.width == 1 == width(flat)
    assert not h.concise


def test_embed_set_of_a_singleton():
    S = PointSet(Y(1, 1), [((1, 2), (1, 1))])
    M = embed_set(S)
    assert M.rows == (segre_embed(S.points[0], S.space),)


def test_four_generic_points_of_two_lines_are_independent():
    # drawn once with a fixed seed; the oracle confirms independence
    S = random_concise_set(Y(1, 1), 4, seed=0)
    rows = [segre(p, 3) for p in S.points]
    assert sympy_rank(3, rows, 4) == 4
    assert embed_set(S).rank() == 4


def test_project_eta_and_forget():
    S = PointSet(Y(1, 2), [((1, 0), (1, 0, 0)), ((0, 1), (1, 0, 0))])
    T = project_eta(S, 0)
    assert T.space.dims == (2,) and len(T) == 1
    with pytest.raises(PreconditionError):
        S.space.forget([0, 1])


# -- properties ------------------------------------------------------------------


@given(point_sets())
def test_embedding_matches_oracle_kronecker(S):
    p = S.field.p
    assert [list(v) for v in S.embedded] == [segre(pt, p) for pt in S.points]


@given(point_sets(), st.randoms(use_true_random=False))
def test_projectivities_preserve_rank_width_and_hull(S, rnd):
    i = rnd.randrange(S.space.k)
    g = random_invertible(S.field, S.space.dims[i] + 1, random.Random(rnd.random()))
    T = apply_projectivity(S, i, g)
    assert len(T) == len(S)
    assert T.embedded_rank == S.embedded_rank
    assert width(T) == width(S)
    assert concision_hull(T).hull_dims == concision_hull(S).hull_dims


@given(point_sets(), st.randoms(use_true_random=False))
def test_factor_permutations_preserve_invariants(S, rnd):
    perm = list(range(S.space.k))
    rnd.shuffle(perm)
    T = permute_factors(S, perm)
    assert T.embedded_rank == S.embedded_rank
    assert width(T) == width(S)
    assert sorted(concision_hull(T).hull_dims) == sorted(concision_hull(S).hull_dims)


@given(point_sets())
def test_hull_rewrite_preserves_rank_and_is_concise(S):
    h = concision_hull(S)
    R, keep = h.reduced()
    assert R.embedded_rank == S.embedded_rank
    assert is_concise(R) or len(S) == 1
    assert h.width == width(S) <= S.space.k
    assert all(0 <= d <= n for d, n in zip(h.hull_dims, S.space.dims))
    for p in S.points:
        assert h.from_hull_coordinates(h.to_hull_coordinates(p)) == p


@given(point_sets())
def test_json_round_trip(S):
    assert pointset_from_json(S.to_json()) == S


def test_json_round_trip_over_rationals():
    f = FieldSpec.rationals()
    S = PointSet(MultiprojectiveSpace((1, 2), f), [((2, 3), (1, "1/2", -4)), ((0, 5), (0, 0, 7))])
    T = pointset_from_json(S.to_json())
    assert T == S
    assert T.points[0][0] == (0, 1)


def test_point_sets_normalize_and_deduplicate():
    S = PointSet(Y(1), [((2, 2),), ((1, 1),), ((0, 2),)])
    assert S.points == (((0, 1),), ((1, 1),))
