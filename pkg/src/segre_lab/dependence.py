"""Dependency invariants of point sets and small tensor-rank computations.

Everything here is computed from the identity ``e(S) = #S - rank(nu(S))``:
the defect, equal and uniform dependence, e-circuits, irredundant spanning,
tensor rank by exhaustive search, and the decomposition sets ``S(Y, q, t)``.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field as dc_field
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .errors import BudgetExceeded, DimensionMismatch, PreconditionError
from .exact_linalg import (
    FieldSpec,
    ScalarMatrix,
    Vector,
    in_span,
    kernel_basis,
    projective_normalize,
    rank_of_vectors,
    span_basis,
    subspace_intersection,
)
from .multiproj import (
    MultiprojectiveSpace,
    PointSet,
    concision_hull,
    segre_embed,
    width,
)

UNIFORM_CAP = 10
PROFILE_CAP = 8
DEFAULT_BUDGET = 5 * 10**8


# ---------------------------------------------------------------------------
# Defect and dependency classes
# ---------------------------------------------------------------------------


def defect(S: PointSet) -> int:
    """``e(S) = #S - rank(nu(S))``."""
    if not len(S):
        raise PreconditionError("defect of the empty set is undefined")
    return len(S) - S.embedded_rank


def _rank_rows(field: FieldSpec, rows: Sequence[Vector], n: int) -> int:
    return rank_of_vectors(field, rows, n) if rows else 0


def subset_defect(S: PointSet, idx: Iterable[int]) -> int:
    idx = list(idx)
    rows = [S.embedded[i] for i in idx]
    return len(idx) - _rank_rows(S.field, rows, S.space.n_coords)


def is_equally_dependent(S: PointSet) -> bool:
    """``e(S) > 0`` and removing any single point lowers the defect.

    Maximal proper subsets suffice because the defect grows by 0 or 1 when
    one point is added.
    """
    if len(S) < 2:
        raise PreconditionError("equal dependence needs at least two points")
    e = defect(S)
    if e == 0:
        return False
    s = len(S)
    return all(subset_defect(S, (j for j in range(s) if j != i)) < e for i in range(s))


def is_circuit(S: PointSet) -> bool:
    return len(S) >= 2 and defect(S) == 1 and is_equally_dependent(S)


def is_uniformly_dependent(S: PointSet, cap: int = UNIFORM_CAP) -> bool:
    """Check ``e(S') = max(0, e(S) - #S + #S')`` for every subset ``S'``."""
    if len(S) < 2:
        raise PreconditionError("uniform dependence needs at least two points")
    if len(S) > cap:
        raise BudgetExceeded(f"uniform dependence is checked exactly only for #S <= {cap}", len(S), cap)
    e = defect(S)
    if e == 0:
        return False
    s = len(S)
    for size in range(1, s):
        target = max(0, e - s + size)
        for c in itertools.combinations(range(s), size):
            if subset_defect(S, c) != target:
                return False
    return True


def e_circuit_degree(S: PointSet) -> int | None:
    """``e(S)`` if ``S`` contains a circuit of cardinality ``#S - e(S) + 1``."""
    if len(S) < 3:
        raise PreconditionError("e-circuits have at least three points")
    e = defect(S)
    if e == 0:
        return None
    size = len(S) - e + 1
    for c in itertools.combinations(S.points, size):
        if is_circuit(S.subset(c)):
            return e
    return None


def minimal_dependent_subset(S: PointSet) -> PointSet | None:
    """Smallest dependent subset (a circuit), first in lexicographic order."""
    if defect(S) == 0:
        return None
    for size in range(3, len(S) + 1):
        for c in itertools.combinations(range(len(S)), size):
            if subset_defect(S, c) > 0:
                return S.subset(S.points[i] for i in c)
    return S


CLASS_ORDER = (
    "independent",
    "circuit",
    "uniformly-dependent",
    "e-circuit",
    "equally-dependent",
    "dependent-other",
)


def classify(S: PointSet) -> tuple[str, int | None, PointSet | None]:
    """Return ``(class label, e-circuit degree, witness)``.

    Labels follow the precedence of ``CLASS_ORDER``; the e-circuit label
    carries its degree as ``"e-circuit(e)"``.  A witness (a minimal
    dependent subset) accompanies ``dependent-other``.
    """
    if len(S) < 2 or defect(S) == 0:
        return "independent", None, None
    e = defect(S)
    ed = is_equally_dependent(S)
    ec = e_circuit_degree(S) if len(S) >= 3 else None
    if ed and e == 1:
        return "circuit", ec, None
    if len(S) <= UNIFORM_CAP and is_uniformly_dependent(S):
        return "uniformly-dependent", ec, None
    if ec is not None:
        return f"e-circuit({ec})", ec, None
    if ed:
        return "equally-dependent", ec, None
    return "dependent-other", ec, minimal_dependent_subset(S)


@dataclass(frozen=True)
class AnalysisReport:
    """All invariants of a point set in one serializable record."""

    size: int
    defect: int
    rank: int
    width: int
    concise: bool
    hull_dims: tuple
    klass: str
    e_circuit: int | None
    equally_dependent: bool
    uniformly_dependent: bool | None
    witness: PointSet | None = None
    profile: dict | None = None
    extras: dict = dc_field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "size": self.size,
            "defect": self.defect,
            "rank": self.rank,
            "width": self.width,
            "concise": self.concise,
            "hull_dims": list(self.hull_dims),
            "class": self.klass,
            "e_circuit": self.e_circuit,
            "equally_dependent": self.equally_dependent,
            "uniformly_dependent": self.uniformly_dependent,
            "witness": self.witness.to_json() if self.witness is not None else None,
        }
        if self.profile is not None:
            out["profile"] = self.profile
        out.update(self.extras)
        return out


def defect_profile(S: PointSet) -> dict:
    """Defect of every subset: a histogram per size plus the per-subset list.

    Subsets are written as sorted index lists into the set's own order.
    """
    s = len(S)
    hist: dict[str, dict[str, int]] = {}
    subsets = []
    for size in range(1, s + 1):
        h: dict[int, int] = {}
        for c in itertools.combinations(range(s), size):
            e = subset_defect(S, c)
            h[e] = h.get(e, 0) + 1
            subsets.append([list(c), e])
        hist[str(size)] = {str(e): h[e] for e in sorted(h)}
    return {"by_size": hist, "subsets": subsets}


def analyze(S: PointSet, *, profile: bool | None = None) -> AnalysisReport:
    if not len(S):
        raise PreconditionError("cannot analyze an empty set")
    hull = concision_hull(S)
    klass, ec, witness = classify(S)
    e = defect(S)
    ed = is_equally_dependent(S) if len(S) >= 2 else False
    ud = None
    if len(S) >= 2 and len(S) <= UNIFORM_CAP:
        ud = is_uniformly_dependent(S)
    if profile is None:
        profile = len(S) <= PROFILE_CAP
    return AnalysisReport(
        size=len(S),
        defect=e,
        rank=S.embedded_rank,
        width=width(S),
        concise=hull.concise,
        hull_dims=hull.hull_dims,
        klass=klass,
        e_circuit=ec,
        equally_dependent=ed,
        uniformly_dependent=ud,
        witness=witness,
        profile=defect_profile(S) if profile else None,
    )


# ---------------------------------------------------------------------------
# Tensor points, irredundant spanning, rank
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TensorPoint:
    """A point ``q = [u]`` of the Segre ambient, canonically normalized."""

    field: FieldSpec
    vector: tuple
    origin: str = ""

    @classmethod
    def make(cls, field: FieldSpec, vector: Sequence, origin: str = "") -> TensorPoint:
        return cls(field, projective_normalize(field, vector), origin)

    @classmethod
    def combination(cls, Y: MultiprojectiveSpace, points: Sequence, coeffs: Sequence, origin: str = "") -> TensorPoint:
        """``[sum c_j nu(p_j)]``."""
        f = Y.field
        acc = [f.zero] * Y.n_coords
        for p, c in zip(points, coeffs):
            c = f(c)
            acc = [f.add(a, f.mul(c, b)) for a, b in zip(acc, segre_embed(p, Y))]
        return cls.make(f, acc, origin)

    def to_json(self) -> dict:
        return {"vector": [self.field.format(x) for x in self.vector], "origin": self.origin}


def _check_ambient(q: TensorPoint, Y: MultiprojectiveSpace) -> None:
    if len(q.vector) != Y.n_coords:
        raise DimensionMismatch(f"tensor of length {len(q.vector)} in an ambient of length {Y.n_coords}")


def irredundantly_spans(S: PointSet, q: TensorPoint) -> bool:
    """``q`` is in ``<nu(S)>`` but in no ``<nu(S')>`` for ``S'`` a proper subset."""
    _check_ambient(q, S.space)
    f = S.field
    vecs = S.embedded
    if not in_span(f, q.vector, vecs)[0]:
        return False
    for i in range(len(vecs)):
        rest = vecs[:i] + vecs[i + 1 :]
        if rest and in_span(f, q.vector, rest)[0]:
            return False
        if not rest and all(x == 0 for x in q.vector):
            return False
    return True


def flattening(q: TensorPoint, Y: MultiprojectiveSpace, i: int) -> ScalarMatrix:
    """The ``(n_i+1) x (prod_{j != i} (n_j+1))`` flattening along factor ``i``."""
    _check_ambient(q, Y)
    dims = [n + 1 for n in Y.dims]
    arr = np.empty(len(q.vector), dtype=object)
    arr[:] = list(q.vector)
    t = arr.reshape(dims)
    t = np.moveaxis(t, i, 0).reshape(dims[i], -1)
    return ScalarMatrix(Y.field, tuple(tuple(r) for r in t.tolist()), t.shape[1])


class _RankOneTable:
    """Lookup ``normalized vector -> point`` for every point of ``Y(F)``."""

    _cache: dict = {}

    @classmethod
    def get(cls, Y: MultiprojectiveSpace):
        t = cls._cache.get(Y)
        if t is None:
            pts = list(Y.points())
            vecs = [segre_embed(p, Y) for p in pts]
            t = (pts, vecs, dict(zip(vecs, pts)))
            cls._cache[Y] = t
        return t


def _rank_at_most(f: FieldSpec, vecs, lookup, q: tuple, t: int, start: int) -> bool:
    if not any(q):
        return True
    if t == 0:
        return False
    if t == 1:
        return projective_normalize(f, q) in lookup
    p = f.p
    for j in range(start, len(vecs)):
        v = vecs[j]
        for lam in range(1, p):
            r = tuple((a - lam * b) % p for a, b in zip(q, v))
            if _rank_at_most(f, vecs, lookup, r, t - 1, j + 1):
                return True
    return False


def tensor_rank(q: TensorPoint, Y: MultiprojectiveSpace, cap: int = 6, method: str = "auto") -> int | None:
    """Minimal ``t <= cap`` such that ``q`` lies in the span of ``t`` points of ``Y``.

    ``method="auto"`` uses the matrix-rank shortcut when ``k <= 2`` and
    exhaustive search otherwise; ``method="exhaustive"`` forces the search
    (finite fields only).
    """
    _check_ambient(q, Y)
    if cap > 6:
        raise PreconditionError("tensor_rank supports cap <= 6")
    if method not in ("auto", "exhaustive"):
        raise PreconditionError(f"unknown method {method!r}")
    if not any(q.vector):
        raise PreconditionError("the zero tensor is not a projective point")
    if method == "auto" and Y.k <= 2:
        r = flattening(q, Y, 0).rank() if Y.k == 2 else 1
        return r if r <= cap else None
    if not Y.field.is_finite:
        raise PreconditionError("exhaustive tensor rank needs a finite field (k >= 3 over QQ is unsupported)")
    _, vecs, lookup = _RankOneTable.get(Y)
    for t in range(1, cap + 1):
        if _rank_at_most(Y.field, vecs, lookup, tuple(q.vector), t, 0):
            return t
    return None


def rank_table(Y: MultiprojectiveSpace, cap: int = 6) -> np.ndarray:
    """Tensor rank of every vector of ``F^{n_coords}`` (index = base-p digits).

    Breadth-first closure under adding multiples of rank-one tensors;
    entry 0 is the zero tensor (rank 0), ``-1`` marks rank above ``cap``.
    """
    f = Y.field
    if not f.is_finite:
        raise PreconditionError("rank tables need a finite field")
    p, N = f.p, Y.n_coords
    size = p**N
    if size > 2 * 10**7:
        raise BudgetExceeded(f"rank table of size {size} is too large", size, 2 * 10**7)
    weights = p ** np.arange(N - 1, -1, -1, dtype=np.int64)
    _, vecs, _ = _RankOneTable.get(Y)
    V = np.array(vecs, dtype=np.int64)
    digits = np.zeros((size, N), dtype=np.int64)
    idx = np.arange(size, dtype=np.int64)
    for j in range(N):
        digits[:, j] = (idx // weights[j]) % p
    rank = np.full(size, -1, dtype=np.int64)
    rank[0] = 0
    frontier = np.array([0], dtype=np.int64)
    steps = np.concatenate([(lam * V) % p for lam in range(1, p)])
    for t in range(1, cap + 1):
        if not len(frontier):
            break
        chunk = max(1, 4_000_000 // (len(steps) * N))
        found = []
        for c0 in range(0, len(frontier), chunk):
            base = digits[frontier[c0 : c0 + chunk]]
            nxt = (base[:, None, :] + steps[None, :, :]) % p
            found.append(np.unique((nxt * weights).sum(axis=-1).ravel()))
        codes = np.unique(np.concatenate(found))
        codes = codes[rank[codes] < 0]
        rank[codes] = t
        frontier = codes
    return rank


# ---------------------------------------------------------------------------
# Decompositions S(Y, q, t)
# ---------------------------------------------------------------------------


def _embedded_array(Y: MultiprojectiveSpace) -> tuple[list, np.ndarray]:
    pts, vecs, _ = _RankOneTable.get(Y)
    return pts, np.array(vecs, dtype=np.int64)


def decompositions(
    Y: MultiprojectiveSpace, q: TensorPoint, t: int, budget: int = DEFAULT_BUDGET
) -> list[PointSet]:
    """All ``t``-subsets of ``Y(F)`` that irredundantly span ``q``.

    Depth-first over increasing point indices.  Every prefix of an
    irredundant decomposition is independent and misses ``q``, which
    prunes the search; the last point is found in one vectorized sweep as
    the points ``y`` with ``nu(y)`` in ``<q, nu(P)>`` but not in ``<nu(P)>``.
    Irredundance of the completed set is then equivalent to all
    coefficients of ``q`` being nonzero.
    """
    _check_ambient(q, Y)
    f = Y.field
    if not f.is_finite:
        raise PreconditionError("decompositions need a finite field")
    if t < 1:
        raise PreconditionError("t must be positive")
    pts, V = _embedded_array(Y)
    cost = comb(len(pts), t - 1)
    if cost > budget:
        raise BudgetExceeded(f"decomposition search would visit {cost} prefixes", cost, budget)
    p = f.p
    qv = tuple(q.vector)
    N = Y.n_coords
    out: list[PointSet] = []

    def annihilator(rows):
        K = kernel_basis(ScalarMatrix(f, tuple(tuple(r) for r in rows), N))
        return np.array(K, dtype=np.int64).reshape(len(K), N)

    def rec(prefix: list[int], basis: list[tuple]):
        if len(prefix) == t - 1:
            H = annihilator(basis + [qv])
            start = prefix[-1] + 1 if prefix else 0
            cand = V[start:]
            # y inside <nu(P)> cannot help: q is not in <nu(P)> by the pruning below
            inside = ~((cand @ H.T) % p).any(axis=1) if len(H) else np.ones(len(cand), bool)
            for j in np.nonzero(inside)[0]:
                y = start + int(j)
                rows = [pts_vec(i) for i in prefix] + [pts_vec(y)]
                ok, coeffs = in_span(f, qv, rows)
                if ok and all(coeffs):
                    out.append(PointSet(Y, [pts[i] for i in prefix] + [pts[y]], normalized=True))
            return
        start = prefix[-1] + 1 if prefix else 0
        for i in range(start, len(pts)):
            nb = basis + [pts_vec(i)]
            if rank_of_vectors(f, nb, N) < len(nb):
                continue
            if in_span(f, qv, nb)[0]:
                continue
            rec(prefix + [i], nb)

    def pts_vec(i):
        return tuple(int(x) for x in V[i])

    rec([], [])
    out.sort(key=lambda s: s.points)
    return out


# ---------------------------------------------------------------------------
# Partition analysis
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PartitionAnalysis:
    defect_S: int
    defect_A: int
    defect_B: int
    dim_A: int  # projective dimensions
    dim_B: int
    dim_intersection: int
    intersection_basis: tuple
    admissible: tuple  # TensorPoints irredundantly spanned by both halves
    ranks: tuple  # tensor rank of each admissible q (None above cap)

    def to_json(self) -> dict:
        return {
            "defect": {"S": self.defect_S, "A": self.defect_A, "B": self.defect_B},
            "dims": {"A": self.dim_A, "B": self.dim_B, "intersection": self.dim_intersection},
            "intersection_basis": [[str(x) for x in v] for v in self.intersection_basis],
            "admissible": [q.to_json() for q in self.admissible],
            "ranks": list(self.ranks),
        }


def _projective_points_of_span(field: FieldSpec, basis: Sequence[Sequence]) -> Iterable[tuple]:
    d = len(basis)
    for coeffs in itertools.product(range(field.p), repeat=d):
        if not any(coeffs) or coeffs[next(i for i, c in enumerate(coeffs) if c)] != 1:
            continue
        v = [0] * len(basis[0])
        for c, b in zip(coeffs, basis):
            if c:
                v = [(x + c * y) % field.p for x, y in zip(v, b)]
        yield tuple(v)


def partition_analysis(
    S: PointSet,
    A: PointSet,
    B: PointSet,
    *,
    any_sizes: bool = False,
    rank_cap: int = 3,
    max_points: int = 10**5,
    seed: int = 0,
) -> PartitionAnalysis:
    """Grassmann analysis of a split ``S = A u B`` (disjoint halves).

    Over a finite field every projective point ``q`` of
    ``<nu(A)> n <nu(B)>`` is listed and kept when both halves span it
    irredundantly.  Over the rationals one generic combination is drawn,
    rejecting draws that fall in the span of a proper subset of a half.
    """
    if set(A.points) & set(B.points):
        raise PreconditionError("the halves of a partition must be disjoint")
    if set(A.points) | set(B.points) != set(S.points):
        raise PreconditionError("the halves must cover the set")
    if not any_sizes and (len(A) != 3 or len(B) != 3):
        raise PreconditionError("the standard partition has #A = #B = 3 (pass any_sizes=True)")
    f = S.field
    Y = S.space
    UA = span_basis(f, A.embedded)
    UB = span_basis(f, B.embedded)
    inter = subspace_intersection(f, UA, UB)
    admissible: list[TensorPoint] = []
    if inter:
        if f.is_finite:
            count = (f.p ** len(inter) - 1) // (f.p - 1)
            if count > max_points:
                raise BudgetExceeded(f"intersection has {count} points", count, max_points)
            for v in _projective_points_of_span(f, inter):
                q = TensorPoint.make(f, v, "partition")
                if irredundantly_spans(A, q) and irredundantly_spans(B, q):
                    admissible.append(q)
        else:
            rng = random.Random(seed)
            for _ in range(200):
                coeffs = [f(rng.randint(-9, 9)) for _ in inter]
                v = [f.zero] * Y.n_coords
                for c, b in zip(coeffs, inter):
                    v = [f.add(x, f.mul(c, y)) for x, y in zip(v, b)]
                if not any(v):
                    continue
                q = TensorPoint.make(f, v, "partition-generic")
                if irredundantly_spans(A, q) and irredundantly_spans(B, q):
                    admissible.append(q)
                    break
    ranks = []
    for q in admissible:
        if f.is_finite or Y.k <= 2:
            ranks.append(tensor_rank(q, Y, cap=rank_cap))
        else:
            ranks.append(None)
    return PartitionAnalysis(
        defect_S=defect(S),
        defect_A=defect(A),
        defect_B=defect(B),
        dim_A=len(UA) - 1,
        dim_B=len(UB) - 1,
        dim_intersection=len(inter) - 1,
        intersection_basis=tuple(tuple(v) for v in inter),
        admissible=tuple(admissible),
        ranks=tuple(ranks),
    )
