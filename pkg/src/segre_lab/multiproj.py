"""Multiprojective spaces, their points, and the Segre embedding.

Factor indices are 0-based throughout the Python API.  A point of
``P^n`` is a tuple of ``n + 1`` canonical scalars whose leftmost nonzero
entry is 1; a point of ``Y = P^{n_1} x ... x P^{n_k}`` is a tuple of such
tuples.  Sets of points are :class:`PointSet` objects, which sort and
deduplicate on construction so that equality and iteration order are
deterministic.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from functools import cached_property, reduce
from math import prod
from typing import Iterable, Iterator, Sequence

from .errors import DimensionMismatch, InvalidPoint, PreconditionError
from .exact_linalg import (
    FieldSpec,
    ScalarMatrix,
    Vector,
    in_span,
    kron,
    projective_normalize,
    rank_of_vectors,
    span_basis,
)

ProjPoint = tuple  # canonical coordinate vector of one factor
MultiPoint = tuple  # one ProjPoint per factor


@dataclass(frozen=True)
class MultiprojectiveSpace:
    """``Y = P^{n_1} x ... x P^{n_k}`` over a fixed field."""

    dims: tuple
    field: FieldSpec

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        object.__setattr__(self, "dims", dims)
        if not dims:
            raise PreconditionError("a multiprojective space needs at least one factor")
        if any(n < 0 for n in dims):
            raise PreconditionError(f"factor dimensions must be >= 0, got {dims}")

    @classmethod
    def parse(cls, text: str, field: FieldSpec) -> MultiprojectiveSpace:
        """``"1,1,2"`` -> ``P^1 x P^1 x P^2``."""
        return cls(tuple(int(t) for t in text.replace("x", ",").split(",") if t.strip()), field)

    @property
    def k(self) -> int:
        return len(self.dims)

    @property
    def n_coords(self) -> int:
        """Length ``prod(n_i + 1)`` of a Segre coordinate vector."""
        return prod(n + 1 for n in self.dims)

    @property
    def r(self) -> int:
        """Dimension of the Segre ambient ``P^r``."""
        return self.n_coords - 1

    @property
    def width(self) -> int:
        """Number of non-trivial factors (``n_i > 0``)."""
        return sum(1 for n in self.dims if n > 0)

    def __str__(self) -> str:
        return " x ".join(f"P^{n}" for n in self.dims) + f" over {self.field}"

    def shape(self) -> tuple:
        """Factor dimensions sorted decreasingly, trivial factors dropped."""
        return tuple(sorted((n for n in self.dims if n > 0), reverse=True))

    def factor_points(self, i: int) -> list[ProjPoint]:
        return projective_points(self.field, self.dims[i])

    def num_points(self) -> int:
        if not self.field.is_finite:
            raise PreconditionError("Y(QQ) is infinite")
        q = self.field.p
        return prod((q ** (n + 1) - 1) // (q - 1) for n in self.dims)

    def points(self) -> Iterator[MultiPoint]:
        """All points of ``Y(F)`` in lexicographic order (factor 1 slowest)."""
        if not self.field.is_finite:
            raise PreconditionError("Y(QQ) is infinite")
        return itertools.product(*(self.factor_points(i) for i in range(self.k)))

    def point(self, components: Sequence[Sequence]) -> MultiPoint:
        """Validate and normalize a point given as per-factor coordinate lists."""
        if len(components) != self.k:
            raise InvalidPoint(f"expected {self.k} components, got {len(components)}")
        out = []
        for n, c in zip(self.dims, components):
            if len(c) != n + 1:
                raise InvalidPoint(f"component {list(c)} does not belong to P^{n}")
            out.append(projective_normalize(self.field, c))
        return tuple(out)

    def forget(self, E: Iterable[int]) -> MultiprojectiveSpace:
        """``Y_E``: the product of the factors not in ``E``."""
        E = set(E)
        if not E <= set(range(self.k)):
            raise PreconditionError(f"factor indices {sorted(E)} out of range")
        if len(E) >= self.k:
            raise PreconditionError("cannot forget every factor")
        return MultiprojectiveSpace(tuple(n for i, n in enumerate(self.dims) if i not in E), self.field)

    def to_json(self) -> list[int]:
        return list(self.dims)


_PROJ_CACHE: dict = {}


def projective_points(field: FieldSpec, n: int) -> list[ProjPoint]:
    """Canonical points of ``P^n(GF(p))`` in lexicographic order."""
    key = (field, n)
    pts = _PROJ_CACHE.get(key)
    if pts is None:
        if not field.is_finite:
            raise PreconditionError("P^n(QQ) is infinite")
        pts = []
        for v in itertools.product(range(field.p), repeat=n + 1):
            for x in v:
                if x:
                    if x == 1:
                        pts.append(v)
                    break
        _PROJ_CACHE[key] = pts
    return pts


def segre_embed(p: MultiPoint, Y: MultiprojectiveSpace) -> Vector:
    """Iterated Kronecker product of the components, factor 1 slowest."""
    if len(p) != Y.k:
        raise InvalidPoint(f"point with {len(p)} components in a space with {Y.k} factors")
    for n, c in zip(Y.dims, p):
        if len(c) != n + 1:
            raise InvalidPoint(f"component {c} does not belong to P^{n}")
    return reduce(lambda a, b: kron(Y.field, a, b), p[1:], tuple(p[0]))


class PointSet:
    """A finite, deduplicated set of points of one multiprojective space."""

    __slots__ = ("space", "points", "__dict__")

    def __init__(self, space: MultiprojectiveSpace, points: Iterable[Sequence], *, normalized: bool = False):
        self.space = space
        if normalized:
            pts = set(points)
        else:
            pts = {space.point(p) for p in points}
        self.points: tuple = tuple(sorted(pts))

    @property
    def field(self) -> FieldSpec:
        return self.space.field

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __contains__(self, p) -> bool:
        return p in self.points

    def __eq__(self, other) -> bool:
        return isinstance(other, PointSet) and self.space == other.space and self.points == other.points

    def __hash__(self) -> int:
        return hash((self.space, self.points))

    def __repr__(self) -> str:
        return f"PointSet({self.space}, {len(self)} points)"

    def subset(self, pts: Iterable[MultiPoint]) -> PointSet:
        return PointSet(self.space, pts, normalized=True)

    def without(self, p: MultiPoint) -> PointSet:
        return PointSet(self.space, (x for x in self.points if x != p), normalized=True)

    def union(self, other: PointSet) -> PointSet:
        if other.space != self.space:
            raise DimensionMismatch("union of point sets from different spaces")
        return PointSet(self.space, self.points + other.points, normalized=True)

    def subsets(self, size: int) -> Iterator[PointSet]:
        for c in itertools.combinations(self.points, size):
            yield PointSet(self.space, c, normalized=True)

    @cached_property
    def embedded(self) -> list[Vector]:
        """``nu(p)`` for every point, in iteration order."""
        return [segre_embed(p, self.space) for p in self.points]

    @cached_property
    def embedded_rank(self) -> int:
        return rank_of_vectors(self.field, self.embedded, self.space.n_coords)

    def to_json(self) -> dict:
        f = self.field
        return {
            "field": f.to_json(),
            "space": self.space.to_json(),
            "points": [[[f.format(x) for x in c] for c in p] for p in self.points],
        }


def pointset_from_json(obj: dict) -> PointSet:
    """Read the interchange format; normalizes and deduplicates the points."""
    try:
        field = FieldSpec.from_json(obj["field"])
        space = MultiprojectiveSpace(tuple(obj["space"]), field)
        raw = obj["points"]
    except (KeyError, TypeError) as exc:
        raise InvalidPoint(f"malformed point-set object: {exc}") from exc
    if not isinstance(raw, list):
        raise InvalidPoint("'points' must be a list")
    return PointSet(space, raw)


def embed_set(S: PointSet) -> ScalarMatrix:
    """``#S x (r+1)`` matrix whose rows are the Segre images, in set order."""
    if not len(S):
        raise PreconditionError("embed_set needs a nonempty set")
    return ScalarMatrix(S.field, tuple(S.embedded), S.space.n_coords)


# ---------------------------------------------------------------------------
# Projections, width, concision
# ---------------------------------------------------------------------------


def project_pi(S: PointSet, i: int) -> tuple:
    """``pi_i(S)`` as a sorted tuple of distinct factor points."""
    if not 0 <= i < S.space.k:
        raise PreconditionError(f"factor index {i} out of range")
    return tuple(sorted({p[i] for p in S.points}))


def project_pi_E(S: PointSet, E: Iterable[int]) -> PointSet:
    """``pi_E(S)``: forget the coordinates in ``E``."""
    E = set(E)
    target = S.space.forget(E)
    keep = [i for i in range(S.space.k) if i not in E]
    return PointSet(target, (tuple(p[i] for i in keep) for p in S.points), normalized=True)


def project_eta(S: PointSet, i: int) -> PointSet:
    """``eta_i(S)``: delete the i-th component."""
    return project_pi_E(S, (i,))


def width(S: PointSet) -> int:
    if not len(S):
        raise PreconditionError("width of the empty set is undefined")
    return sum(1 for i in range(S.space.k) if len(project_pi(S, i)) > 1)


@dataclass(frozen=True)
class ConcisionHull:
    """The minimal multiprojective subspace containing a set, with coordinates.

    ``bases[i]`` spans ``<pi_i(S)>``; ``rewritten`` expresses ``S`` in the
    hull's own coordinates (factor ``i`` becomes ``P^{hull_dims[i]}``).
    """

    space: MultiprojectiveSpace
    bases: tuple
    hull_dims: tuple
    rewritten: PointSet

    @property
    def concise(self) -> bool:
        return self.hull_dims == self.space.dims

    @property
    def width(self) -> int:
        return sum(1 for n in self.hull_dims if n > 0)

    @property
    def shape(self) -> tuple:
        return tuple(sorted((n for n in self.hull_dims if n > 0), reverse=True))

    def to_hull_coordinates(self, p: MultiPoint) -> MultiPoint:
        f = self.space.field
        out = []
        for comp, basis in zip(p, self.bases):
            ok, coeffs = in_span(f, comp, basis)
            if not ok:
                raise InvalidPoint(f"{comp} is outside the hull factor")
            out.append(projective_normalize(f, coeffs))
        return tuple(out)

    def from_hull_coordinates(self, p: MultiPoint) -> MultiPoint:
        f = self.space.field
        out = []
        for coeffs, basis in zip(p, self.bases):
            v = [f.zero] * len(basis[0])
            for c, b in zip(coeffs, basis):
                if c:
                    v = [f.add(x, f.mul(c, y)) for x, y in zip(v, b)]
            out.append(projective_normalize(f, v))
        return tuple(out)

    def reduced(self) -> tuple[PointSet, tuple]:
        """The rewritten set with trivial (dimension 0) factors dropped.

        Returns the set and the original indices of the kept factors.
        """
        keep = tuple(i for i, n in enumerate(self.hull_dims) if n > 0)
        if not keep:
            keep = (0,)
        space = MultiprojectiveSpace(tuple(self.hull_dims[i] for i in keep), self.space.field)
        pts = (tuple(p[i] for i in keep) for p in self.rewritten.points)
        return PointSet(space, pts, normalized=True), keep


def concision_hull(S: PointSet) -> ConcisionHull:
    if not len(S):
        raise PreconditionError("concision hull of the empty set is undefined")
    f = S.field
    bases = []
    for i in range(S.space.k):
        bases.append(tuple(span_basis(f, project_pi(S, i))))
    dims = tuple(len(b) - 1 for b in bases)
    hull_space = MultiprojectiveSpace(dims, f)
    hull = ConcisionHull(S.space, tuple(bases), dims, PointSet(hull_space, (), normalized=True))
    rewritten = PointSet(hull_space, (hull.to_hull_coordinates(p) for p in S.points), normalized=True)
    return ConcisionHull(S.space, tuple(bases), dims, rewritten)


def is_concise(S: PointSet) -> bool:
    f = S.field
    return all(
        rank_of_vectors(f, project_pi(S, i), n + 1) == n + 1 for i, n in enumerate(S.space.dims)
    )


# ---------------------------------------------------------------------------
# Symmetries (used by property tests and the orbit machinery)
# ---------------------------------------------------------------------------


def random_invertible(field: FieldSpec, n: int, rng: random.Random) -> tuple:
    """A uniformly random invertible ``n x n`` matrix (rejection sampling)."""
    while True:
        if field.is_finite:
            rows = [tuple(rng.randrange(field.p) for _ in range(n)) for _ in range(n)]
        else:
            rows = [tuple(field(rng.randint(-5, 5)) for _ in range(n)) for _ in range(n)]
        if rank_of_vectors(field, rows, n) == n:
            return tuple(rows)


def apply_projectivity(S: PointSet, i: int, g: Sequence[Sequence]) -> PointSet:
    """Apply the linear map ``g`` to factor ``i`` of every point."""
    M = ScalarMatrix.from_rows(S.field, g)
    pts = []
    for p in S.points:
        q = list(p)
        q[i] = projective_normalize(S.field, M.apply(p[i]))
        pts.append(tuple(q))
    return PointSet(S.space, pts, normalized=True)


def permute_factors(S: PointSet, perm: Sequence[int]) -> PointSet:
    """Reorder factors: new factor ``j`` is old factor ``perm[j]``."""
    if sorted(perm) != list(range(S.space.k)):
        raise PreconditionError(f"{perm} is not a permutation of the factors")
    space = MultiprojectiveSpace(tuple(S.space.dims[j] for j in perm), S.field)
    return PointSet(space, (tuple(p[j] for j in perm) for p in S.points), normalized=True)
