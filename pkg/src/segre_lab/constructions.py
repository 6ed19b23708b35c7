"""Example families, elementary increasing, and family recognition.

Each generator builds its configuration from seeded random choices and
then re-checks the invariants it is supposed to have, raising
:class:`ConstructionError` if any fails.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Sequence

from .dependence import (
    defect,
    e_circuit_degree,
    is_circuit,
    is_equally_dependent,
    is_uniformly_dependent,
    subset_defect,
)
from .errors import ConstructionError, FieldTooSmall, PreconditionError
from .exact_linalg import (
    FieldSpec,
    in_span,
    projective_normalize,
    rank_of_vectors,
    span_basis,
    subspace_intersection,
)
from .multiproj import (
    MultiprojectiveSpace,
    PointSet,
    concision_hull,
    is_concise,
    projective_points,
    random_invertible,
)

MAX_TRIES = 10_000


# ---------------------------------------------------------------------------
# Small projective helpers
# ---------------------------------------------------------------------------


def _random_point(field: FieldSpec, n: int, rng: random.Random) -> tuple:
    if field.is_finite:
        return rng.choice(projective_points(field, n))
    while True:
        v = [rng.randint(-4, 4) for _ in range(n + 1)]
        if any(v):
            return projective_normalize(field, v)


def _random_nonzero(field: FieldSpec, rng: random.Random):
    if field.is_finite:
        return rng.randrange(1, field.p)
    while True:
        x = rng.randint(-6, 6)
        if x:
            return field(x)


def _on_line(field: FieldSpec, a: tuple, b: tuple, rng: random.Random) -> tuple:
    """A point of the line ``<a, b>`` other than ``a`` and ``b``."""
    c = _random_nonzero(field, rng)
    return projective_normalize(field, [field.add(x, field.mul(c, y)) for x, y in zip(a, b)])


def _collinear(field: FieldSpec, pts: Sequence[tuple]) -> bool:
    return rank_of_vectors(field, list(pts), len(pts[0])) <= 2


def _lift(field: FieldSpec, v: tuple, m: int) -> tuple:
    """Pad ``v`` with zeros to a point of ``P^m`` (hyperplane embedding)."""
    return tuple(v) + (field.zero,) * (m + 1 - len(v))


def _check(cond: bool, what: str) -> None:
    if not cond:
        raise ConstructionError(f"self-check failed: {what}")


# ---------------------------------------------------------------------------
# Elementary increasing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ElementaryIncreasingSpec:
    """Inputs of an elementary increasing of ``F = E u {o}`` in factor ``i``.

    ``u_i`` and ``v_i`` are coordinates in ``P^{m_i}``; when ``m_i = n_i + 1``
    the factor ``P^{n_i}`` is the hyperplane where the last coordinate is 0.
    """

    space: MultiprojectiveSpace
    E: tuple
    o: tuple
    i: int
    m_i: int
    u_i: tuple
    v_i: tuple


def elementary_increasing(spec: ElementaryIncreasingSpec) -> tuple[MultiprojectiveSpace, PointSet]:
    Y = spec.space
    f = Y.field
    i = spec.i
    if not 0 <= i < Y.k:
        raise PreconditionError(f"factor index {i} out of range")
    if any(n == 0 for h, n in enumerate(Y.dims) if h != i):
        raise PreconditionError("all factors other than the i-th must be positive dimensional")
    n_i = Y.dims[i]
    if spec.m_i not in (n_i, n_i + 1) or (n_i == 0 and spec.m_i != 1):
        raise PreconditionError(f"m_i={spec.m_i} not allowed for n_i={n_i}")
    E = [Y.point(p) for p in spec.E]
    o = Y.point(spec.o)
    if o in E:
        raise PreconditionError("the pivot o must not belong to E")
    W = MultiprojectiveSpace(tuple(spec.m_i if h == i else n for h, n in enumerate(Y.dims)), f)

    def lift(p):
        return tuple(_lift(f, c, spec.m_i) if h == i else c for h, c in enumerate(p))

    E_W = [lift(p) for p in E]
    o_W = lift(o)
    try:
        u_i = projective_normalize(f, spec.u_i)
        v_i = projective_normalize(f, spec.v_i)
    except ValueError as exc:
        raise PreconditionError(str(exc)) from exc
    if len(u_i) != spec.m_i + 1 or len(v_i) != spec.m_i + 1:
        raise PreconditionError("u_i, v_i must be points of P^{m_i}")
    E_i = {p[i] for p in E_W}
    if u_i in E_i or u_i == o_W[i]:
        raise PreconditionError("u_i must avoid E_i and o_i")
    if v_i in E_i:
        raise PreconditionError("v_i must avoid E_i")
    if v_i == u_i:
        raise PreconditionError("v_i must differ from u_i")
    if not in_span(f, v_i, [o_W[i], u_i])[0]:
        raise PreconditionError("v_i must lie on the line through o_i and u_i")
    u = tuple(u_i if h == i else c for h, c in enumerate(o_W))
    v = tuple(v_i if h == i else c for h, c in enumerate(o_W))
    G = PointSet(W, E_W + [u, v], normalized=True)
    F = PointSet(W, E_W + [o_W], normalized=True)
    _check(len(G) == len(E) + 2, "#G = #E + 2")
    span_G = span_basis(f, G.embedded)
    _check(all(in_span(f, x, span_G)[0] for x in F.embedded), "<nu(F)> inside <nu(G)>")
    return W, G


@dataclass(frozen=True)
class IncreasingWitness:
    pivot: tuple
    factor: int
    u: tuple
    v: tuple


def find_elementary_increasing(
    F: PointSet, G: PointSet, pivot: tuple | None = None, *, avoid_E: bool = True
) -> IncreasingWitness | None:
    """Decide whether ``G`` is an elementary increasing of ``F`` (same ambient).

    Tries every pivot ``o`` in ``F`` (or only ``pivot``), every factor and both
    orderings of the two new points.  With ``avoid_E=False`` the conditions
    ``u_i, v_i not in E_i`` are dropped (a diagnostic relaxation).
    """
    if F.space != G.space:
        raise PreconditionError("F and G must live in the same space")
    f = F.field
    Gs = set(G.points)
    for o in F.points:
        if pivot is not None and o != pivot:
            continue
        E = [p for p in F.points if p != o]
        if not set(E) <= Gs:
            continue
        new = sorted(Gs - set(E))
        if len(new) != 2 or len(G) != len(E) + 2:
            continue
        for i in range(F.space.k):
            E_i = {p[i] for p in E}
            for u, v in (new, new[::-1]):
                if any(u[h] != o[h] or v[h] != o[h] for h in range(F.space.k) if h != i):
                    continue
                if u[i] == o[i] or u[i] == v[i]:
                    continue
                if avoid_E and (u[i] in E_i or v[i] in E_i):
                    continue
                if not in_span(f, v[i], [o[i], u[i]])[0]:
                    continue
                return IncreasingWitness(o, i, u, v)
    return None


# ---------------------------------------------------------------------------
# Example families
# ---------------------------------------------------------------------------


def _require_points_on_line(field: FieldSpec, needed: int, what: str) -> None:
    if field.is_finite and field.p + 1 < needed:
        raise FieldTooSmall(
            f"{what}: needs {needed} distinct points on a line but P^1({field}) has {field.p + 1}"
        )


def _distinct_pair(field: FieldSpec, n: int, rng: random.Random) -> tuple:
    a = _random_point(field, n, rng)
    while True:
        b = _random_point(field, n, rng)
        if b != a:
            return a, b


def _seeded_attempts(seed: int, attempt):
    """Run ``attempt(rng)`` until it returns a value, with a deterministic stream."""
    rng = random.Random(seed)
    for _ in range(MAX_TRIES):
        out = attempt(rng)
        if out is not None:
            return out
    raise ConstructionError("no admissible configuration found")


def gen_example_k2(k: int, n1: int, n2: int, field: FieldSpec, seed: int = 0) -> tuple[MultiprojectiveSpace, PointSet]:
    """Six points ``o, p, u, v, w, z``: two collinear triples in distinct factors.

    ``u, v`` agree with ``o`` outside factor 1, ``w, z`` agree with ``p``
    outside factor 2, and ``o, p`` differ in every factor.
    """
    if k < 2:
        raise PreconditionError("this family needs k >= 2")
    if n1 not in (1, 2) or n2 not in (1, 2):
        raise PreconditionError("n1, n2 must be 1 or 2")
    for j, n in ((1, n1), (2, n2)):
        if n == 1:
            _require_points_on_line(field, 4, f"factor {j} with n={n} needs 4 distinct points of P^1")
    Y = MultiprojectiveSpace((n1, n2) + (1,) * (k - 2), field)

    def attempt(rng):
        o = []
        p = []
        for n in Y.dims:
            a, b = _distinct_pair(field, n, rng)
            o.append(a)
            p.append(b)
        # factor 1: u1, v1 on a line through o1, avoiding p1
        u1 = _random_point(field, n1, rng)
        if u1 in (o[0], p[0]):
            return None
        v1 = _on_line(field, o[0], u1, rng)
        if v1 == p[0]:
            return None
        if n1 == 2 and _collinear(field, [o[0], u1, p[0]]):
            return None
        w2 = _random_point(field, n2, rng)
        if w2 in (p[1], o[1]):
            return None
        z2 = _on_line(field, p[1], w2, rng)
        if z2 == o[1]:
            return None
        if n2 == 2 and _collinear(field, [p[1], w2, o[1]]):
            return None
        u = (u1,) + tuple(o[1:])
        v = (v1,) + tuple(o[1:])
        w = (p[0], w2) + tuple(p[2:])
        z = (p[0], z2) + tuple(p[2:])
        return PointSet(Y, [tuple(o), tuple(p), u, v, w, z], normalized=True)

    S = _seeded_attempts(seed, attempt)
    _check(len(S) == 6, "#S = 6")
    _check(is_concise(S), "S concise for Y")
    _check(defect(S) == 2, "e(S) = 2")
    _check(all(subset_defect(S, c) == 1 for c in itertools.combinations(range(6), 5)), "every 5-subset has e = 1")
    return Y, S


def _k3_lines(field: FieldSpec, n: int, rng: random.Random):
    if n == 1:
        line = ((field.one, field.zero), (field.zero, field.one))
        return line, line
    L = _distinct_pair(field, n, rng)
    D = _distinct_pair(field, n, rng)
    return L, D


def _validate_k3_lines(field: FieldSpec, n: int, L, D) -> None:
    bl = span_basis(field, list(L))
    bd = span_basis(field, list(D))
    if len(bl) != 2 or len(bd) != 2:
        raise PreconditionError("L and D must each be spanned by two distinct points")
    meet = subspace_intersection(field, bl, bd)
    if n == 2 and len(meet) == 2:
        raise PreconditionError("for n = 2 the lines L and D must differ")
    if n == 3 and meet:
        raise PreconditionError("for n = 3 the lines L and D must be disjoint")


def _points_on_line(field: FieldSpec, line, m: int, rng: random.Random, avoid=()) -> list | None:
    """``m`` distinct random points of the line ``<a, b>`` outside ``avoid``."""
    a, b = line
    if field.is_finite:
        p = field.p
        pts = sorted(
            {
                projective_normalize(field, [(c * x + d * y) % p for x, y in zip(a, b)])
                for c in range(p)
                for d in range(p)
                if c or d
            }
            - set(avoid)
        )
        return rng.sample(pts, m) if len(pts) >= m else None
    out: set = set()
    for _ in range(50 * m):
        c, d = rng.randint(-9, 9), rng.randint(-9, 9)
        if c or d:
            x = projective_normalize(field, [field.add(field.mul(field(c), x), field.mul(field(d), y)) for x, y in zip(a, b)])
            if x not in avoid:
                out.add(x)
        if len(out) == m:
            return sorted(out)
    return None


def gen_example_k3(
    k: int, n: int, field: FieldSpec, seed: int = 0, lines: tuple | None = None
) -> tuple[MultiprojectiveSpace, PointSet]:
    """Two collinear triples in the same factor ``P^n`` (on lines ``L`` and ``D``).

    ``lines`` optionally fixes ``(L, D)``, each given by two spanning points.
    """
    if n not in (1, 2, 3):
        raise PreconditionError("n must be 1, 2 or 3")
    if k < 1:
        raise PreconditionError("k must be positive")
    if n == 1:
        _require_points_on_line(field, 6, "n = 1 needs six distinct points of P^1")
    if n == 2:
        _require_points_on_line(field, 4, "n = 2 needs three points on each line besides L n D")
    if lines is not None:
        L = tuple(projective_normalize(field, x) for x in lines[0])
        D = tuple(projective_normalize(field, x) for x in lines[1])
        if any(len(x) != n + 1 for x in L + D):
            raise PreconditionError("line points must lie in P^n")
        _validate_k3_lines(field, n, L, D)
    Y = MultiprojectiveSpace((n,) + (1,) * (k - 1), field)

    def attempt(rng):
        if lines is None:
            LL, DD = _k3_lines(field, n, rng)
            try:
                _validate_k3_lines(field, n, LL, DD)
            except PreconditionError:
                return None
        else:
            LL, DD = L, D
        avoid = set()
        if n == 2:
            meet = subspace_intersection(field, span_basis(field, list(LL)), span_basis(field, list(DD)))
            avoid = {projective_normalize(field, meet[0])}
        A1 = _points_on_line(field, LL, 3, rng, avoid)
        if A1 is None:
            return None
        B1 = _points_on_line(field, DD, 3, rng, avoid | (set(A1) if n == 1 else set()))
        if B1 is None:
            return None
        if n == 1 and len(set(A1) | set(B1)) != 6:
            return None
        rest_o, rest_p = [], []
        for _ in range(k - 1):
            a, b = _distinct_pair(field, 1, rng)
            rest_o.append(a)
            rest_p.append(b)
        o, u, v = ((x,) + tuple(rest_o) for x in A1)
        p, w, z = ((x,) + tuple(rest_p) for x in B1)
        return PointSet(Y, [o, u, v, p, w, z], normalized=True)

    S = _seeded_attempts(seed, attempt)
    _check(len(S) == 6, "#S = 6")
    _check(is_concise(S), "S concise for Y")
    expected = 2 if k > 1 else 5 - n
    _check(defect(S) == expected, f"e(S) = {expected}")
    _check(is_equally_dependent(S), "S equally dependent")
    return Y, S


def gen_example_k4(k: int, n: int, s: int, field: FieldSpec, seed: int = 0) -> tuple[MultiprojectiveSpace, PointSet]:
    """``s`` points: a collinear triple on ``L`` and ``s - 3`` points over a line ``D``.

    As in the two-triple family, the triple shares its remaining
    coordinates ``o_i`` and the other ``s - 3`` points share ``p_i != o_i``.
    """
    if k < 2:
        raise PreconditionError("this family needs k > 1")
    if n not in (1, 2, 3):
        raise PreconditionError("n must be 1, 2 or 3")
    if s < 6:
        raise PreconditionError("this family needs s >= 6")
    m = s - 3
    if field.is_finite:
        cap = field.p + 1 if n in (1, 3) else field.p
        if m > cap:
            raise FieldTooSmall(f"{m} points on the line D need at most {cap} available over {field}")
        if n == 2 and field.p < 2:
            raise FieldTooSmall("field too small")
    Y = MultiprojectiveSpace((n,) + (1,) * (k - 1), field)

    def attempt(rng):
        LL, DD = _k3_lines(field, n, rng)
        try:
            _validate_k3_lines(field, n, LL, DD)
        except PreconditionError:
            return None
        avoid = set()
        if n == 2:
            meet = subspace_intersection(field, span_basis(field, list(LL)), span_basis(field, list(DD)))
            avoid = {projective_normalize(field, meet[0])}
        A1 = _points_on_line(field, LL, 3, rng, avoid)
        if A1 is None:
            return None
        B1 = _points_on_line(field, DD, m, rng, avoid)
        if B1 is None:
            return None
        rest_o, rest_p = [], []
        for _ in range(k - 1):
            x, y = _distinct_pair(field, 1, rng)
            rest_o.append(x)
            rest_p.append(y)
        pts = [(x,) + tuple(rest_o) for x in A1] + [(x,) + tuple(rest_p) for x in B1]
        return PointSet(Y, pts, normalized=True)

    S = _seeded_attempts(seed, attempt)
    _check(len(S) == s, f"#S = {s}")
    _check(is_concise(S), "S concise for Y")
    _check(defect(S) == s - 4, f"e(S) = {s - 4}")
    _check(is_equally_dependent(S), "e(S') < e(S) for every proper subset")
    return Y, S


def gen_example_z1(field: FieldSpec, seed: int = 0) -> tuple[MultiprojectiveSpace, PointSet]:
    """Three collinear points ``E`` on a line ``L`` of ``P^2`` plus two points off ``L``.

    The line through the two extra points must meet ``L`` outside ``E``,
    otherwise some ``S \\ {p}`` contains three collinear points.  This needs
    a fourth point on ``L``, so ``GF(2)`` is excluded.
    """
    _require_points_on_line(field, 4, "E plus the trace of the line through G on L")
    Y = MultiprojectiveSpace((2,), field)
    f = field
    base = [
        (1, 0, 0),
        (0, 1, 0),
        (1, 1, 0),
        (0, 0, 1),
        (1, 2, 1),
    ]
    rng = random.Random(seed)
    g = random_invertible(f, 3, rng)
    pts = []
    for b in base:
        v = [f.zero] * 3
        for j in range(3):
            for i in range(3):
                v[j] = f.add(v[j], f.mul(f(b[i]), g[i][j]))
        pts.append((projective_normalize(f, v),))
    S = PointSet(Y, pts, normalized=True)
    E = pts[:3]
    _check(defect(S) == 2, "e(S) = 2")
    _check(all(is_circuit(S.without(p)) for p in E), "S \\ {p} is a circuit for p in E")
    _check(not is_uniformly_dependent(S), "S is not uniformly dependent")
    _check(e_circuit_degree(S) == 2, "S is a 2-circuit")
    return Y, S


# ---------------------------------------------------------------------------
# Family recognition
# ---------------------------------------------------------------------------

ROLES = ("o", "p", "u", "v", "w", "z")


@dataclass(frozen=True)
class FamilyMatch:
    """``family`` is ``"K2"``, ``"K3"`` or ``"none"``.

    ``labels`` maps each role to a point of the original set and ``factors``
    holds the special factor indices (original numbering): ``(a, b)`` for
    K2, ``(a,)`` for K3.
    """

    family: str
    labels: dict | None = None
    factors: tuple = ()

    def to_json(self, field: FieldSpec | None = None) -> dict:
        out: dict = {"family": self.family}
        if self.labels is not None and field is not None:
            out["labels"] = {r: [[field.format(x) for x in c] for c in self.labels[r]] for r in ROLES}
            out["factors"] = list(self.factors)
        return out


def _triple_varies_in(T: Sequence[tuple]) -> int | None:
    """The unique factor where a dependent triple varies (None if several)."""
    k = len(T[0])
    var = [i for i in range(k) if len({t[i] for t in T}) > 1]
    return var[0] if len(var) == 1 else None


def validate_family(S: PointSet, match: FamilyMatch) -> bool:
    """Re-check every structural constraint of a claimed K2/K3 labeling."""
    if match.family not in ("K2", "K3") or match.labels is None:
        return False
    if len(S) != 6 or set(match.labels.values()) != set(S.points):
        return False
    hull = concision_hull(S)
    f = S.field
    keep = [i for i, n in enumerate(hull.hull_dims) if n > 0]
    lab = {r: hull.to_hull_coordinates(match.labels[r]) for r in ROLES}
    o, p, u, v, w, z = (lab[r] for r in ROLES)
    if match.family == "K2":
        if len(match.factors) != 2:
            return False
        a, b = match.factors
        if a == b or a not in keep or b not in keep:
            return False
        if any(o[i] == p[i] for i in keep):
            return False
        if any(u[i] != o[i] or v[i] != o[i] for i in keep if i != a):
            return False
        if any(w[i] != p[i] or z[i] != p[i] for i in keep if i != b):
            return False
        if len({u[a], v[a], o[a], p[a]}) != 4 or len({o[b], p[b], w[b], z[b]}) != 4:
            return False
        if not _collinear(f, [u[a], v[a], o[a]]) or not _collinear(f, [w[b], z[b], p[b]]):
            return False
        if hull.hull_dims[a] > 2 or hull.hull_dims[b] > 2:
            return False
        return all(hull.hull_dims[i] == 1 for i in keep if i not in (a, b))
    if len(match.factors) != 1:
        return False
    (a,) = match.factors
    if a not in keep:
        return False
    n = hull.hull_dims[a]
    if any(o[i] == p[i] for i in keep if i != a):
        return False
    if any(x[i] != o[i] for x in (u, v) for i in keep if i != a):
        return False
    if any(x[i] != p[i] for x in (w, z) for i in keep if i != a):
        return False
    A1, B1 = [o[a], u[a], v[a]], [p[a], w[a], z[a]]
    if len(set(A1)) != 3 or len(set(B1)) != 3:
        return False
    if not _collinear(f, A1) or not _collinear(f, B1):
        return False
    if any(hull.hull_dims[i] != 1 for i in keep if i != a):
        return False
    L = span_basis(f, A1)
    D = span_basis(f, B1)
    meet = subspace_intersection(f, L, D)
    if n == 1:
        return len(set(A1) | set(B1)) == 6
    if n == 2:
        if len(meet) != 1:
            return False
        return projective_normalize(f, meet[0]) not in set(A1) | set(B1)
    if n == 3:
        return not meet
    return False


def match_family(S: PointSet) -> FamilyMatch:
    """Find a K2 or K3 labeling of a 6-point set, K2 first.

    Both families split into two dependent triples ``{o, u, v}`` and
    ``{p, w, z}``, so only such splits are searched; within each split every
    choice of ``o`` and ``p`` and both role orders of the remaining points
    are tried in a fixed order, and the first witness that validates wins.
    """
    if len(S) != 6:
        raise PreconditionError("family matching needs #S = 6")
    pts = S.points
    splits = []
    for A in itertools.combinations(range(6), 3):
        if 0 not in A:
            continue
        B = tuple(i for i in range(6) if i not in A)
        if subset_defect(S, A) == 0 or subset_defect(S, B) == 0:
            continue
        for X, Y_ in ((A, B), (B, A)):
            splits.append((X, Y_))
    for family in ("K2", "K3"):
        for X, Y_ in splits:
            TX = [pts[i] for i in X]
            TY = [pts[i] for i in Y_]
            a = _triple_varies_in(TX)
            b = _triple_varies_in(TY)
            if a is None or b is None:
                continue
            if (family == "K2") != (a != b):
                continue
            factors = (a, b) if family == "K2" else (a,)
            for oi in range(3):
                for pi in range(3):
                    ra = [TX[j] for j in range(3) if j != oi]
                    rb = [TY[j] for j in range(3) if j != pi]
                    labels = {"o": TX[oi], "p": TY[pi], "u": ra[0], "v": ra[1], "w": rb[0], "z": rb[1]}
                    m = FamilyMatch(family, labels, factors)
                    if validate_family(S, m):
                        return m
    return FamilyMatch("none")


# ---------------------------------------------------------------------------
# Random inputs
# ---------------------------------------------------------------------------


def random_concise_set(Y: MultiprojectiveSpace, s: int, seed: int = 0) -> PointSet:
    """``s`` distinct random points, resampled until the set is concise for ``Y``."""
    if s < max(Y.dims) + 1:
        raise PreconditionError(f"{s} points cannot be concise for {Y}: a factor P^n needs n+1 points")
    if Y.field.is_finite and Y.num_points() < s:
        raise PreconditionError(f"{Y} has fewer than {s} points")
    rng = random.Random(seed)
    for _ in range(MAX_TRIES):
        pts: set = set()
        while len(pts) < s:
            pts.add(tuple(_random_point(Y.field, n, rng) for n in Y.dims))
        S = PointSet(Y, pts, normalized=True)
        if is_concise(S):
            return S
    raise ConstructionError(f"no concise {s}-set of {Y} found in {MAX_TRIES} draws")
