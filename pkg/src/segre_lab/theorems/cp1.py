"""Rank-2 tensors and their length-3 decompositions in enlarged spaces.

For ``Y = (P^1)^k`` and a rank-2 ``q`` concise for ``Y``, every ``A`` in
``S(Y, q)`` is compared with every ``B`` in ``S(W, q, 3)`` concise for
``W``, where ``W`` is ``Y`` itself, ``Y`` with one factor widened to
``P^2``, or ``Y x P^1``.  Two outcomes are allowed: ``B`` meets ``A`` and is
an elementary increasing of it, or ``B`` misses ``A``, ``W`` is one of
``P^2 x P^1``, ``P^1 x P^1``, ``(P^1)^3``, and ``A u B`` is equally
dependent with defect 1, or defect 2 on ``P^1 x P^1`` with a
``(1,1)``-form through it.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from ..constructions import find_elementary_increasing
from ..dependence import (
    DEFAULT_BUDGET,
    TensorPoint,
    decompositions,
    defect,
    is_equally_dependent,
    tensor_rank,
)
from ..errors import PreconditionError
from ..exact_linalg import FieldSpec
from ..multiproj import MultiprojectiveSpace, PointSet, is_concise, projective_points
from .jobs import VerificationReport
from .verifiers import conic_forms

CASE2_SHAPES = {(2, 1), (1, 1), (1, 1, 1)}


@dataclass(frozen=True)
class Enlargement:
    """``Y`` inside ``W``: ``widen`` is the factor made ``P^2`` (or None),
    ``extra`` adds a trailing ``P^1`` factor at the point ``(1, 0)``."""

    k: int
    widen: int | None = None
    extra: bool = False

    @property
    def dims(self) -> tuple:
        d = [2 if i == self.widen else 1 for i in range(self.k)]
        return tuple(d + [1] if self.extra else d)

    @property
    def label(self) -> str:
        if self.widen is not None:
            return f"P2@{self.widen + 1}"
        return "P1+" if self.extra else "Y"

    def point(self, p: tuple) -> tuple:
        out = [c + (0,) if i == self.widen else c for i, c in enumerate(p)]
        return tuple(out + [(1, 0)] if self.extra else out)

    def case1_shapes(self) -> set:
        k = self.k
        return {(1,) * k, (2,) + (1,) * (k - 1), (1,) * (k + 1)}


def enlargements(k: int) -> list[Enlargement]:
    return [Enlargement(k)] + [Enlargement(k, widen=i) for i in range(k)] + [Enlargement(k, extra=True)]


@dataclass(frozen=True)
class RankTwo:
    """``q = nu(a) + c nu(b)`` with ``a``, ``b`` different in every factor."""

    a: tuple
    b: tuple
    c: int

    def tensor(self, space: MultiprojectiveSpace, emb: Enlargement | None = None) -> TensorPoint:
        a, b = (self.a, self.b) if emb is None else (emb.point(self.a), emb.point(self.b))
        return TensorPoint.combination(space, [a, b], [1, self.c], origin="rank-2")


def rank_two_points(field: FieldSpec, k: int) -> list[RankTwo]:
    """One generator per rank-2 point of ``(P^1)^k`` concise for it."""
    pts = projective_points(field, 1)
    Y = MultiprojectiveSpace((1,) * k, field)
    seen = {}
    for a in itertools.product(pts, repeat=k):
        for b in itertools.product(pts, repeat=k):
            if a >= b or any(x == y for x, y in zip(a, b)):
                continue
            for c in range(1, field.p):
                g = RankTwo(a, b, c)
                key = g.tensor(Y).vector
                seen.setdefault(key, g)
    return [seen[key] for key in sorted(seen)]


def _random_rank_two(field: FieldSpec, k: int, rng: random.Random) -> RankTwo:
    pts = projective_points(field, 1)
    a = tuple(rng.choice(pts) for _ in range(k))
    b = tuple(rng.choice([x for x in pts if x != a[i]]) for i in range(k))
    return RankTwo(min(a, b), max(a, b), rng.randrange(1, field.p))


def check_pair(A: PointSet, B: PointSet, emb: Enlargement) -> tuple[str, bool, str]:
    """Classify one ``(A, B)`` pair (both in ``W``); returns ``(branch, ok, why)``."""
    shape = tuple(sorted(emb.dims, reverse=True))
    common = set(A.points) & set(B.points)
    if common:
        pivot = next(p for p in A.points if p not in common)
        wit = find_elementary_increasing(A, B, pivot=pivot)
        if wit is None:
            loose = find_elementary_increasing(A, B, pivot=pivot, avoid_E=False)
            branch = "case1 increasing-except-E-avoidance" if loose else "case1 not-increasing"
            return branch, False, f"W={shape}: {branch}"
        return "case1", shape in emb.case1_shapes(), f"W={shape}"
    S = A.union(B)
    e = defect(S)
    ed = is_equally_dependent(S)
    if e == 2:
        cp0 = ed and shape == (1, 1) and len(conic_forms(S)) > 0
    else:
        cp0 = ed and e == 1
    ok = shape in CASE2_SHAPES and cp0
    return f"case2 e={e}", ok, f"W={shape} e={e} equally_dependent={ed}"


def check_tensor(
    field: FieldSpec, k: int, g: RankTwo, rep: VerificationReport, budget: int, triage: bool = False
) -> None:
    Y = MultiprojectiveSpace((1,) * k, field)
    q = g.tensor(Y)
    if tensor_rank(q, Y, cap=2) != 2:
        raise PreconditionError(f"{g} does not have rank 2")
    As = decompositions(Y, q, 2, budget)
    if not As or not all(is_concise(A) for A in As):
        raise PreconditionError(f"{g}: decompositions of a concise rank-2 point must be concise")
    for emb in enlargements(k):
        W = MultiprojectiveSpace(emb.dims, field)
        qW = g.tensor(W, emb)
        Bs = [B for B in decompositions(W, qW, 3, budget) if is_concise(B)]
        for A in As:
            AW = PointSet(W, [emb.point(p) for p in A.points], normalized=True)
            for B in Bs:
                branch, ok, why = check_pair(AW, B, emb)
                rep.instances += 1
                rep.hits += 1
                rep.tallies[f"k={k} W={emb.label} {branch}"] += 1
                if not ok:
                    item = {"q": qW.to_json(), "A": AW.to_json(), "B": B.to_json(), "why": why}
                    rep.add_counterexample(item, triage=triage)


def verify_cp1(
    field: FieldSpec,
    k: int,
    mode: str = "exhaustive",
    count: int = 0,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
) -> VerificationReport:
    """Exhaustive over every rank-2 point, or seeded draws of rank-2 points
    until at least ``count`` ``(A, W, B)`` instances were checked (counted
    with the multiplicity of the draws).

    Over GF(2) failures go to the triage list instead of counting as
    counterexamples (``P^1(GF(2))`` has only three points).
    """
    if not field.is_finite:
        raise PreconditionError("decompositions need a finite field")
    if k < 2:
        raise PreconditionError("rank-2 points need k >= 2")
    rep = VerificationReport("cp1")
    rep.job = {"statement": "cp1", "field": field.to_json(), "k": k, "mode": mode, "count": count, "seed": seed}
    triage = field.p == 2
    if mode == "exhaustive":
        gens = rank_two_points(field, k)
        for g in gens:
            check_tensor(field, k, g, rep, budget, triage)
        rep.tallies["rank-2 points"] = len(gens)
        return rep
    # draws repeat over small fields; each distinct q is checked once and replayed
    rng = random.Random(seed)
    Y = MultiprojectiveSpace((1,) * k, field)
    cache: dict = {}
    draws = 0
    while rep.instances < count:
        g = _random_rank_two(field, k, rng)
        key = g.tensor(Y).vector
        if key not in cache:
            sub = VerificationReport("cp1")
            check_tensor(field, k, g, sub, budget, triage)
            cache[key] = sub
        rep = rep.merge(cache[key])
        draws += 1
    rep.tallies["rank-2 draws"] = draws
    rep.tallies["distinct rank-2 points"] = len(cache)
    return rep
