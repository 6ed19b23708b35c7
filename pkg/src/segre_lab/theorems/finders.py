"""Injective coordinate deletions (the pigeonhole lemmas) and their checks."""

from __future__ import annotations

import random
from math import comb

from ..exact_linalg import FieldSpec
from ..multiproj import MultiprojectiveSpace, PointSet, projective_points
from .jobs import VerificationReport


def _drop(p: tuple, E) -> tuple:
    return tuple(c for h, c in enumerate(p) if h not in E)


def eta_injective(S: PointSet, E) -> bool:
    """Whether forgetting the factors in ``E`` is injective on ``S``."""
    E = set(E)
    return len({_drop(p, E) for p in S.points}) == len(S)


def find_injective_eta(S: PointSet, skip=()) -> int | None:
    """Least factor ``i`` (outside ``skip``) whose deletion is injective on ``S``.

    ``skip`` factors count as already deleted.
    """
    skip = set(skip)
    for i in range(S.space.k):
        if i not in skip and eta_injective(S, skip | {i}):
            return i
    return None


def find_injective_eta_set(S: PointSet) -> tuple | None:
    """``E`` with ``#E = #S`` and ``eta_E`` injective, built one factor at a time."""
    E: list[int] = []
    for _ in range(len(S)):
        i = find_injective_eta(S, E)
        if i is None:
            return None
        E.append(i)
    return tuple(sorted(E))


def star_set(field: FieldSpec, s: int, k: int | None = None) -> PointSet:
    """A base point plus ``s - 1`` points, each differing from it in its own factor.

    With ``k = s - 1`` factors of ``P^1`` no single deletion is injective.
    """
    k = s - 1 if k is None else k
    Y = MultiprojectiveSpace((1,) * k, field)
    a, b = (1, 0), (0, 1)
    pts = [tuple(a for _ in range(k))]
    for j in range(s - 1):
        pts.append(tuple(b if h == j else a for h in range(k)))
    return PointSet(Y, pts, normalized=True)


def _random_set(field: FieldSpec, s: int, k: int, rng: random.Random) -> PointSet:
    dims = tuple(rng.choice((1, 2)) for _ in range(k))
    tables = [projective_points(field, n) for n in dims]
    style = rng.randrange(3)
    if style == 2 and s >= 2:
        # a star on the first s-1 factors, the rest palette-drawn and constant
        base = [rng.choice(t) for t in tables]
        pts = {tuple(base)}
        for j in range(min(s - 1, k)):
            p = list(base)
            p[j] = rng.choice([x for x in tables[j] if x != base[j]])
            pts.add(tuple(p))
    else:
        pts = set()
    palettes = [rng.sample(t, 2) for t in tables]
    tries = 0
    while len(pts) < s and tries < 1000:
        tries += 1
        if style == 0:
            pts.add(tuple(rng.choice(t) for t in tables))
        else:
            pts.add(tuple(rng.choice(pal) for pal in palettes))
    return PointSet(MultiprojectiveSpace(dims, field), pts, normalized=True)


def verify_injective_deletions(
    statement: str, field: FieldSpec, count: int, seed: int = 0, max_s: int = 6
) -> VerificationReport:
    """Random sets above the lemma's bound must admit the promised deletion.

    ``statement`` is ``"a1"`` (one factor, ``k > C(s,2)``) or ``"a2"``
    (``s`` factors, ``k > C(s,2) + s``).  Each witness is re-validated by
    recomputing the projected set; stars below the bound are tallied as
    probes of how far the bound is from sharp.
    """
    if statement not in ("a1", "a2"):
        raise ValueError(statement)
    rng = random.Random(seed)
    rep = VerificationReport(statement)
    rep.job = {"statement": statement, "field": field.to_json(), "count": count, "seed": seed, "max_s": max_s}
    for _ in range(count):
        s = rng.randint(1, max_s)
        bound = comb(s, 2) + (s if statement == "a2" else 0)
        k = bound + rng.randint(1, 3)
        S = _random_set(field, s, k, rng)
        rep.instances += 1
        rep.hits += 1
        if statement == "a1":
            i = find_injective_eta(S)
            ok = i is not None and eta_injective(S, {i})
            witness = i
        else:
            E = find_injective_eta_set(S)
            ok = E is not None and len(E) == len(S) and eta_injective(S, E)
            witness = E
        rep.tallies[f"s={len(S)} found"] += ok
        if not ok:
            rep.add_counterexample({"set": S.to_json(), "why": f"witness {witness}"})
    for s in range(2, max_s + 1):
        S = star_set(field, s)
        if statement == "a1":
            absent = find_injective_eta(S) is None
        else:
            absent = find_injective_eta_set(S) is None
        rep.tallies[f"probe star s={s} k={S.space.k} no witness"] += absent
    return rep
