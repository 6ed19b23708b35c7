"""Statements checked by the harness, each with a batched and an exact path.

A statement turns a batch plus its invariants into an :class:`Outcome`
(numpy masks) and re-decides single sets with the scalar routines of
``dependence``/``multiproj``/``constructions``.  The harness compares the
two paths on a deterministic sample and on every violation, so the fast
kernels never vouch for themselves.
"""

from __future__ import annotations

import itertools
from math import comb

import numpy as np

from ..constructions import match_family
from ..dependence import defect, e_circuit_degree, is_equally_dependent
from ..multiproj import PointSet, concision_hull, embed_set, width
from .domain import Batch, Invariants, batch_invariants
from .jobs import Outcome


def _sorted_hull(inv: Invariants) -> np.ndarray:
    return -np.sort(-inv.hull_dims, axis=1)


def _shape_label(row) -> str:
    dims = [int(n) for n in row if n > 0]
    return "(" + ",".join(map(str, dims)) + ")" if dims else "()"


def _has_shape(hs: np.ndarray, shape: tuple) -> np.ndarray:
    target = np.zeros(hs.shape[1], dtype=np.int64)
    if len(shape) > hs.shape[1]:
        return np.zeros(len(hs), dtype=bool)
    target[: len(shape)] = shape
    return (hs == target).all(axis=1)


def _keys_by(prefix: str, rows: np.ndarray, mask: np.ndarray) -> list:
    """One ``(label, mask)`` pair per distinct row of ``rows`` under ``mask``."""
    if not mask.any():
        return []
    out = []
    for u in np.unique(rows[mask], axis=0):
        out.append((prefix + _shape_label(u), mask & (rows == u).all(axis=1)))
    return out


class Statement:
    id = ""
    sizes: tuple = ()
    concise_only = True
    needs_deletions = True
    triage_small_fields = False

    def evaluate(self, batch: Batch, inv: Invariants) -> Outcome:
        raise NotImplementedError

    def check(self, S: PointSet) -> tuple[bool, bool, str]:
        """``(hypothesis holds, conclusion holds, explanation)`` for one set."""
        raise NotImplementedError


class DefectBound(Statement):
    """Concise ``Z`` with ``#Z >= 3``: ``e(Z) <= #Z - 2``, equality iff the hull is ``P^1``."""

    id = "o4.1"
    sizes = (3, 4, 5)
    needs_deletions = False

    def evaluate(self, batch, inv):
        s = batch.s
        applies = inv.concise & (s >= 3)
        hs = _sorted_hull(inv)
        line = _has_shape(hs, (1,))
        e = inv.defect
        bad = applies & ((e > s - 2) | ((e == s - 2) != line))
        keys = [(f"s={s} e={d}", applies & (e == d)) for d in range(s + 1)]
        keys += [(f"s={s} equality", applies & (e == s - 2))]
        obs = {f"max_defect[s={s}]": int(e[applies].max())} if applies.any() else {}
        return Outcome(applies, bad, keys, obs, hits=applies & (e == s - 2))

    def check(self, S):
        hull = concision_hull(S)
        if not hull.concise or len(S) < 3:
            return False, True, ""
        e, s = defect(S), len(S)
        ok = e <= s - 2 and ((e == s - 2) == (hull.shape == (1,)))
        return True, ok, f"e={e} s={s} hull={hull.shape}"


class DependentTriples(Statement):
    """Every dependent 3-set varies in exactly one factor, along a line."""

    id = "z3"
    sizes = (3,)
    concise_only = False
    needs_deletions = False

    def evaluate(self, batch, inv):
        applies = inv.defect > 0
        hs = _sorted_hull(inv)
        ok = (inv.width == 1) & _has_shape(hs, (1,))
        return Outcome(applies, applies & ~ok, _keys_by("hull=", hs, applies))

    def check(self, S):
        if len(S) != 3 or defect(S) == 0:
            return False, True, ""
        hull = concision_hull(S)
        varying = [i for i in range(S.space.k) if len({p[i] for p in S}) > 1]
        ok = (
            len(varying) == 1
            and len({p[varying[0]] for p in S}) == 3
            and hull.hull_dims[varying[0]] == 1
        )
        return True, ok, f"varying factors {varying}, hull {hull.hull_dims}"


class FourPoints(Statement):
    """Concise equally dependent 4-sets with ``e >= 2``: ``e = 2`` and hull ``P^1``."""

    id = "f1"
    sizes = (4,)

    def evaluate(self, batch, inv):
        applies = inv.concise & inv.equally_dependent & (inv.defect >= 2)
        hs = _sorted_hull(inv)
        ok = (inv.defect == 2) & _has_shape(hs, (1,))
        keys = _keys_by("e>=2 hull=", hs, applies)
        keys += _keys_by("circuit hull=", hs, inv.concise & inv.equally_dependent & (inv.defect == 1))
        return Outcome(applies, applies & ~ok, keys)

    def check(self, S):
        hull = concision_hull(S)
        if len(S) != 4 or not hull.concise or not is_equally_dependent(S):
            return False, True, ""
        e = defect(S)
        if e < 2:
            return False, True, ""
        return True, e == 2 and hull.shape == (1,), f"e={e} hull={hull.shape}"


def conic_forms(S: PointSet) -> list:
    """Bidegree-(1,1) forms vanishing on ``S`` (kernel of the evaluation matrix),
    each re-checked to vanish at every point."""
    M = embed_set(S)
    K = M.kernel_basis()
    zero = tuple(S.field.zero for _ in range(M.nrows))
    assert all(M.apply(v) == zero for v in K)
    return K


class FivePoints(Statement):
    """Concise equally dependent 5-sets: ``e <= 3``; ``e = 3`` forces ``P^1``;
    ``e = 2`` forces ``P^2`` or ``P^1 x P^1``, the latter with a nonzero
    ``(1,1)``-form through the five points."""

    id = "f2"
    sizes = (5,)

    def evaluate(self, batch, inv):
        applies = inv.concise & inv.equally_dependent
        hs = _sorted_hull(inv)
        e = inv.defect
        quadric = _has_shape(hs, (1, 1))
        # on P^1 x P^1 the (1,1)-forms vanishing on S have dimension 4 - rank
        forms = quadric & (4 - inv.rank > 0)
        ok = (
            (e <= 1)
            | ((e == 3) & _has_shape(hs, (1,)))
            | ((e == 2) & (_has_shape(hs, (2,)) | forms))
        )
        keys = []
        for d in range(1, 5):
            keys += _keys_by(f"e={d} hull=", hs, applies & (e == d))
        return Outcome(applies, applies & ~ok, keys)

    def check(self, S):
        hull = concision_hull(S)
        if len(S) != 5 or not hull.concise or not is_equally_dependent(S):
            return False, True, ""
        e = defect(S)
        sh = hull.shape
        if e <= 1:
            ok = True
        elif e == 3:
            ok = sh == (1,)
        elif e == 2:
            ok = sh == (2,) or (sh == (1, 1) and len(conic_forms(S)) > 0)
        else:
            ok = False
        return True, ok, f"e={e} hull={sh}"


class CircuitWidth(Statement):
    """Circuits of size ``s`` have width at most ``C(s,2) + s``."""

    id = "x1"
    sizes = (3, 4, 5)
    concise_only = False
    triage_small_fields = True

    def evaluate(self, batch, inv):
        s = batch.s
        applies = inv.equally_dependent & (inv.defect == 1)
        bad = applies & (inv.width > comb(s, 2) + s)
        hs = _sorted_hull(inv)
        obs = {f"max_width[s={s}]": int(inv.width[applies].max())} if applies.any() else {}
        return Outcome(applies, bad, _keys_by(f"s={s} hull=", hs, applies), obs)

    def check(self, S):
        s = len(S)
        if s < 2 or defect(S) != 1 or not is_equally_dependent(S):
            return False, True, ""
        w = width(S)
        return True, w <= comb(s, 2) + s, f"s={s} width={w}"


def _contains_circuit(batch: Batch, rows: np.ndarray, z: int) -> np.ndarray:
    """For the selected rows, whether some ``z``-subset is a circuit."""
    sub = batch.select(rows)
    found = np.zeros(sub.size, dtype=bool)
    for c in itertools.combinations(range(batch.s), z):
        part = Batch(sub.space, [x[:, list(c)] for x in sub.coords])
        inv = batch_invariants(part)
        found |= inv.equally_dependent & (inv.defect == 1)
    return found


class ECircuitWidth(Statement):
    """An ``e``-circuit ``S`` has width at most ``C(z,2) + z``, ``z = #S - e + 1``."""

    id = "x1.1"
    sizes = (3, 4, 5)
    concise_only = False
    triage_small_fields = True

    def evaluate(self, batch, inv):
        s = batch.s
        e = inv.defect
        ecirc = inv.equally_dependent & (e == 1)
        for d in range(2, s - 1):
            rows = e == d
            if rows.any():
                ecirc[rows] = _contains_circuit(batch, rows, s - d + 1)
        z = s - e + 1
        bound = z * (z - 1) // 2 + z
        bad = ecirc & (inv.width > bound)
        keys = [(f"s={s} e={d}", ecirc & (e == d)) for d in range(1, s)]
        obs = {}
        for d in range(1, s):
            m = ecirc & (e == d)
            if m.any():
                obs[f"max_width[s={s},e={d}]"] = int(inv.width[m].max())
        return Outcome(ecirc, bad, keys, obs)

    def check(self, S):
        if len(S) < 3:
            return False, True, ""
        d = e_circuit_degree(S)
        if d is None:
            return False, True, ""
        z = len(S) - d + 1
        w = width(S)
        return True, w <= comb(z, 2) + z, f"e={d} z={z} width={w}"


class SixPoints(Statement):
    """Concise equally dependent 6-sets: either ``e >= 2`` and the set is one of
    the two written families, or the width is at most 4 with ``(P^1)^4`` the
    only width-4 hull.  On a single factor ``P^n`` the defect is ``5 - n``."""

    id = "is1"
    sizes = (6,)
    triage_small_fields = True

    def evaluate(self, batch, inv):
        applies = inv.concise & inv.equally_dependent
        dims = tuple(sorted(batch.space.dims, reverse=True))
        k = len(dims)
        e = inv.defect
        bad = np.zeros(batch.size, dtype=bool)
        keys = []
        if k == 1:
            bad = applies & (e != 5 - dims[0])
            keys.append((f"o8 n={dims[0]} e={5 - dims[0]}", applies & ~bad))
        else:
            width_ok = k <= 3 or dims == (1, 1, 1, 1)
            fam = np.array(["-"] * batch.size, dtype=object)
            for b in np.nonzero(applies & (e >= 2))[0]:
                fam[b] = match_family(batch.point_set(int(b))).family
            named = np.isin(fam, ["K2", "K3"])
            if not width_ok:
                bad = applies & ~named
            for label in ("K2", "K3", "none", "-"):
                m = applies & (fam == label)
                branch = "width-bound" if width_ok else "family"
                keys += [(f"w={k} e={d} {branch} family={label}", m & (e == d)) for d in range(1, 6)]
        return Outcome(applies, bad, keys)

    def check(self, S):
        hull = concision_hull(S)
        if len(S) != 6 or not hull.concise or not is_equally_dependent(S):
            return False, True, ""
        e = defect(S)
        sh = hull.shape
        if len(sh) == 1:
            return True, e == 5 - sh[0], f"single factor P^{sh[0]}: e={e}"
        if len(sh) <= 3 or sh == (1, 1, 1, 1):
            return True, True, ""
        fam = match_family(S).family if e >= 2 else "none"
        return True, fam in ("K2", "K3"), f"hull={sh} e={e} family={fam}"


class SingleFactorSix(Statement):
    """Six points spanning ``P^n`` have ``e = 5 - n``."""

    id = "o8"
    sizes = (6,)
    needs_deletions = False

    def evaluate(self, batch, inv):
        dims = batch.space.dims
        if len(dims) != 1:
            z = np.zeros(batch.size, dtype=bool)
            return Outcome(z, z)
        applies = inv.concise
        bad = applies & (inv.defect != 5 - dims[0])
        return Outcome(applies, bad, [(f"n={dims[0]}", applies)])

    def check(self, S):
        hull = concision_hull(S)
        if len(S) != 6 or len(hull.shape) != 1 or not hull.concise:
            return False, True, ""
        e = defect(S)
        return True, e == 5 - hull.shape[0], f"n={hull.shape[0]} e={e}"


STATEMENTS = {st.id: st for st in (
    DefectBound(), DependentTriples(), FourPoints(), FivePoints(),
    CircuitWidth(), ECircuitWidth(), SixPoints(), SingleFactorSix(),
)}
