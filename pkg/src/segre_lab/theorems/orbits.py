"""Enumeration of concise point sets up to projective equivalence.

An ordered ``s``-tuple of points of ``P^{n_1} x ... x P^{n_k}`` is the same
data as ``k`` *columns*: column ``i`` is the ordered tuple of the i-th
components.  ``PGL(n_i + 1)`` acts on column ``i`` alone, so each column
is replaced by a canonical representative:

* the greedy basis (first ``n+1`` independent points, in order) is sent to
  the standard basis ``e_0, ..., e_n``;
* every other point is written in that basis, which leaves a diagonal
  torus acting on rows and columns of the coordinate matrix;
* the torus is fixed by scaling the edges of a spanning forest of the
  support graph (Kruskal in (row, column) order) to 1.

The forest depends only on the support, and once its edges are 1 the only
remaining freedom is one scalar per connected component, which does not
change any entry; so the representative is unique.

A set is then a multiset of canonical column indices (sorting quotients out
permutations of equal-dimensional factors), and ``S_s`` reorders the points.
Its action on column indices is tabulated once; the canonical form of a
set is the lexicographically least sorted image over ``S_s``.  Orderly
depth-first generation keeps only canonical prefixes, which is sound
because every prefix of a canonical multiset is canonical.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb, factorial, prod
from typing import Iterator, Sequence

import numpy as np

from ..errors import PreconditionError
from ..exact_linalg import FieldSpec, in_span
from ..multiproj import MultiprojectiveSpace, PointSet, concision_hull, projective_points


# ---------------------------------------------------------------------------
# Columns
# ---------------------------------------------------------------------------


def _forest_normalize(rows: list[list[int]], p: int) -> list[tuple]:
    """Scale rows and coordinates so that a canonical spanning forest has unit edges."""
    parent: dict = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    adj: dict = {}
    for j, r in enumerate(rows):
        for c, a in enumerate(r):
            if a:
                x, y = find(("r", j)), find(("c", c))
                if x != y:
                    parent[x] = y
                    adj.setdefault(("r", j), []).append(("c", c))
                    adj.setdefault(("c", c), []).append(("r", j))
    scale: dict = {}
    for node in sorted(adj):
        if node in scale:
            continue
        scale[node] = 1
        stack = [node]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y in scale:
                    continue
                a = rows[x[1]][y[1]] if x[0] == "r" else rows[y[1]][x[1]]
                scale[y] = pow(a * scale[x], p - 2, p)
                stack.append(y)
    out = []
    for j, r in enumerate(rows):
        lam = scale.get(("r", j), 1)
        out.append(tuple((lam * a * scale.get(("c", c), 1)) % p for c, a in enumerate(r)))
    return out


def canonical_column(points: Sequence[Sequence[int]], n: int, p: int) -> tuple:
    """Canonical representative of an ordered spanning tuple of points of ``P^n(GF(p))``."""
    f = FieldSpec.gf(p)
    basis: list[tuple] = []
    kinds: list = []
    rows: list[list[int]] = []
    for x in points:
        x = tuple(int(a) % p for a in x)
        ok, coeffs = in_span(f, x, basis) if basis else (False, None)
        if ok:
            kinds.append(("x", len(rows)))
            rows.append(list(coeffs) + [0] * (n + 1 - len(coeffs)))
        elif len(basis) > n:
            raise PreconditionError("column is not in P^n")
        else:
            kinds.append(("b", len(basis)))
            basis.append(x)
    if len(basis) != n + 1:
        raise PreconditionError("column does not span P^n")
    normed = iter(_forest_normalize(rows, p))
    out = []
    for kind, r in kinds:
        if kind == "b":
            out.append(tuple(1 if i == r else 0 for i in range(n + 1)))
        else:
            out.append(next(normed))
    return tuple(out)


@lru_cache(maxsize=None)
def canonical_columns(n: int, s: int, p: int) -> tuple:
    """All canonical spanning ``s``-columns of ``P^n(GF(p))``, sorted."""
    if s < n + 1:
        return ()
    res = set()

    def rec(seq, r):
        if len(seq) == s:
            if r == n + 1:
                rows = [list(v) for kind, v in seq if kind == "x"]
                cr = iter(_forest_normalize(rows, p))
                res.add(tuple(v if kind == "b" else next(cr) for kind, v in seq))
            return
        if r <= n and s - len(seq) >= n + 1 - r:
            e = tuple(1 if i == r else 0 for i in range(n + 1))
            rec(seq + [("b", e)], r + 1)
        if s - len(seq) > n + 1 - r and r > 0:
            for v in projective_points(FieldSpec.gf(p), r - 1):
                rec(seq + [("x", tuple(v) + (0,) * (n + 1 - r))], r)

    rec([], 0)
    return tuple(sorted(res))


# ---------------------------------------------------------------------------
# Column system: global indices and the S_s action
# ---------------------------------------------------------------------------


def _compose(a: tuple, b: tuple) -> tuple:
    """``(a o b)(j) = a[b[j]]``."""
    return tuple(a[j] for j in b)


class ColumnSystem:
    """Canonical columns for several dimensions with the ``S_s`` action table.

    Dimension groups get consecutive index ranges, largest dimension first,
    so a sorted index tuple lists factors by decreasing dimension.
    """

    def __init__(self, p: int, s: int, dims: Sequence[int]):
        self.p = p
        self.s = s
        self.dims = tuple(sorted(set(int(n) for n in dims), reverse=True))
        self.start: dict[int, int] = {}
        self.count: dict[int, int] = {}
        coords = []
        lookup: dict = {}
        pos = 0
        for n in self.dims:
            cols = canonical_columns(n, s, p)
            if not cols:
                raise PreconditionError(f"no concise {s}-columns in P^{n}")
            self.start[n] = pos
            self.count[n] = len(cols)
            for c in cols:
                lookup[(n, c)] = pos
                coords.append((n, c))
                pos += 1
        self.R = pos
        self.coords = coords
        self._lookup = lookup
        self.perms, self.T = self._action_table()

    def index(self, n: int, column: tuple) -> int:
        return self._lookup[(n, canonical_column(column, n, self.p))]

    def column(self, idx: int) -> tuple:
        return self.coords[idx][1]

    def dim_of(self, idx: int) -> int:
        return self.coords[idx][0]

    def _action_table(self):
        s = self.s
        ident = tuple(range(s))
        gens = []
        if s >= 2:
            gens.append((1, 0) + tuple(range(2, s)))
            gens.append(tuple(range(1, s)) + (0,))
        gen_cols = []
        for g in gens:
            col = np.empty(self.R, dtype=np.int64)
            for idx, (n, c) in enumerate(self.coords):
                col[idx] = self._lookup[(n, canonical_column([c[j] for j in g], n, self.p))]
            gen_cols.append(col)
        perms = [ident]
        table = [np.arange(self.R, dtype=np.int64)]
        seen = {ident: 0}
        head = 0
        while head < len(perms):
            sigma = perms[head]
            for g, gcol in zip(gens, gen_cols):
                tau = _compose(sigma, g)
                if tau in seen:
                    continue
                seen[tau] = len(perms)
                perms.append(tau)
                table.append(gcol[table[head]])
            head += 1
        if len(perms) != factorial(s):
            raise AssertionError("generators failed to produce the symmetric group")
        T = np.stack(table, axis=1)
        return perms, T

    # -- multisets -----------------------------------------------------------

    def encode(self, sorted_idx: np.ndarray) -> np.ndarray:
        """Base-R code of sorted index tuples along the last axis."""
        k = sorted_idx.shape[-1]
        w = self.R ** np.arange(k - 1, -1, -1, dtype=np.int64)
        return (sorted_idx * w).sum(axis=-1)

    def canonical_code(self, multiset: Sequence[int]) -> int:
        M = np.asarray(sorted(multiset), dtype=np.int64)
        images = np.sort(self.T[M], axis=0)  # (k, s!)
        return int(self.encode(images.T).min())

    def canonical_multiset(self, multiset: Sequence[int]) -> tuple:
        M = np.asarray(sorted(multiset), dtype=np.int64)
        images = np.sort(self.T[M], axis=0).T
        codes = self.encode(images)
        return tuple(int(x) for x in images[int(codes.argmin())])

    def is_canonical(self, multiset: Sequence[int]) -> bool:
        M = tuple(sorted(multiset))
        return self.canonical_multiset(M) == M

    def orbit_size_bound(self, shape: Sequence[int]) -> int:
        """Number of sorted index tuples for ``shape`` (before the S_s quotient)."""
        total = 1
        for n, m in _groups(shape):
            total *= comb(self.count[n] + m - 1, m)
        return total

    def canonical_multisets(self, shape: Sequence[int]) -> Iterator[tuple]:
        """Orderly generation of canonical multisets for a shape (dims decreasing)."""
        shape = tuple(sorted(shape, reverse=True))
        k = len(shape)
        T = self.T
        R = self.R

        def rec(prefix: tuple):
            j = len(prefix)
            if j == k:
                yield prefix
                return
            n = shape[j]
            lo = self.start[n]
            hi = lo + self.count[n]
            if j and self.dim_of(prefix[-1]) == n:
                lo = prefix[-1]
            cand = np.arange(lo, hi, dtype=np.int64)
            if not len(cand):
                return
            # images of prefix + (c,) under every permutation
            P = T[list(prefix)] if prefix else np.zeros((0, T.shape[1]), dtype=np.int64)
            imgs = np.concatenate(
                [np.broadcast_to(P[None, :, :], (len(cand),) + P.shape), T[cand][:, None, :]], axis=1
            )  # (C, j+1, s!)
            imgs = np.sort(imgs, axis=1)
            w = R ** np.arange(j, -1, -1, dtype=np.int64)
            codes = (imgs * w[None, :, None]).sum(axis=1).min(axis=1)
            own = np.array(prefix + (0,), dtype=np.int64)
            own_codes = (own[:-1] * w[:-1]).sum() + cand * w[-1]
            for c in cand[codes == own_codes]:
                yield from rec(prefix + (int(c),))

        yield from rec(())


def _groups(shape: Sequence[int]):
    shape = sorted(shape, reverse=True)
    for n, grp in itertools.groupby(shape):
        yield n, len(list(grp))


@lru_cache(maxsize=64)
def column_system(p: int, s: int, dims: tuple) -> ColumnSystem:
    return ColumnSystem(p, s, dims)


# ---------------------------------------------------------------------------
# Sets <-> multisets
# ---------------------------------------------------------------------------


def multiset_points(cs: ColumnSystem, multiset: Sequence[int]) -> list[tuple]:
    """The ordered points encoded by a multiset (factors in multiset order)."""
    cols = [cs.column(i) for i in multiset]
    return [tuple(col[j] for col in cols) for j in range(cs.s)]


def orbit_representatives(field: FieldSpec, shape: Sequence[int], s: int) -> Iterator[PointSet]:
    """One concise ``s``-set of the shape per projective equivalence class."""
    if not field.is_finite:
        raise PreconditionError("orbit enumeration needs a finite field")
    shape = tuple(sorted(shape, reverse=True))
    cs = column_system(field.p, s, tuple(sorted(set(shape), reverse=True)))
    Y = MultiprojectiveSpace(shape, field)
    for M in cs.canonical_multisets(shape):
        pts = multiset_points(cs, M)
        if len(set(pts)) == s:
            yield PointSet(Y, pts, normalized=True)


@dataclass(frozen=True)
class CanonicalForm:
    """Projective-equivalence invariant of a finite set over GF(p).

    Two sets (in any ambient spaces) have equal forms iff their concision
    hulls are isomorphic by a product of projectivities and a factor
    permutation carrying one set onto the other.
    """

    p: int
    s: int
    shape: tuple
    multiset: tuple

    def to_json(self) -> list:
        return [self.p, self.s, list(self.shape), list(self.multiset)]


def canonical_form(S: PointSet) -> CanonicalForm:
    f = S.field
    if not f.is_finite:
        raise PreconditionError("canonical forms are defined over finite fields")
    hull = concision_hull(S)
    R, _ = hull.reduced()
    s = len(R)
    shape = R.space.dims
    if shape == (0,):
        return CanonicalForm(f.p, s, (), ())
    cs = column_system(f.p, s, tuple(sorted(set(shape), reverse=True)))
    idx = [cs.index(n, [pt[i] for pt in R.points]) for i, n in enumerate(shape)]
    return CanonicalForm(f.p, s, tuple(sorted(shape, reverse=True)), cs.canonical_multiset(idx))


# ---------------------------------------------------------------------------
# Shapes
# ---------------------------------------------------------------------------


def shapes_up_to(max_prod: int, s: int | None = None) -> list[tuple]:
    """Decreasing tuples of positive dims with ``prod(n_i + 1) <= max_prod``.

    With ``s`` given, only shapes that admit a concise ``s``-set (every
    ``n_i <= s - 1``) are returned.
    """
    out = []

    def rec(prefix, maxn, budget):
        if prefix:
            out.append(tuple(prefix))
        for n in range(min(maxn, budget - 1), 0, -1):
            rec(prefix + [n], n, budget // (n + 1))

    rec([], max_prod, max_prod)
    res = sorted({sh for sh in out if prod(n + 1 for n in sh) <= max_prod})
    if s is not None:
        res = [sh for sh in res if max(sh) <= s - 1]
    return sorted(res, key=lambda sh: (len(sh), tuple(-n for n in sh)))
