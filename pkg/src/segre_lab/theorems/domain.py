"""Enumeration and sampling of point-set domains, in numpy batches.

A :class:`Batch` holds ``B`` sets of ``s`` points of one space as one
coordinate array per factor.  Batches come from three exhaustive
generators (``none``: every ``s``-subset of ``Y(F)`` in lexicographic
order; ``factors``: the lexicographically least subset in each orbit of
the equal-dimension factor permutations; ``full``: one concise set per
projective equivalence class) or from seeded samplers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb, factorial, prod
from typing import Iterator, Sequence

import numpy as np

from ..errors import PreconditionError
from ..exact_linalg import FieldSpec, batch_rank
from ..multiproj import MultiprojectiveSpace, PointSet, projective_points
from .orbits import column_system, shapes_up_to

CHUNK = 4096


@dataclass
class Batch:
    """``coords[i]`` has shape ``(B, s, n_i + 1)`` (canonical coordinates)."""

    space: MultiprojectiveSpace
    coords: list

    @property
    def size(self) -> int:
        return self.coords[0].shape[0]

    @property
    def s(self) -> int:
        return self.coords[0].shape[1]

    def select(self, mask: np.ndarray) -> Batch:
        return Batch(self.space, [c[mask] for c in self.coords])

    def segre_rows(self) -> np.ndarray:
        p = self.space.field.p
        rows = self.coords[0]
        for c in self.coords[1:]:
            rows = (rows[..., :, None] * c[..., None, :]).reshape(rows.shape[:-1] + (-1,)) % p
        return rows

    def point_set(self, b: int) -> PointSet:
        pts = [tuple(tuple(int(x) for x in c[b, j]) for c in self.coords) for j in range(self.s)]
        return PointSet(self.space, pts, normalized=True)

    def distinct_mask(self) -> np.ndarray:
        """Sets whose ``s`` points are pairwise distinct."""
        p = self.space.field.p
        code = np.zeros(self.coords[0].shape[:2], dtype=np.int64)
        for c in self.coords:
            w = p ** np.arange(c.shape[-1] - 1, -1, -1, dtype=np.int64)
            code = code * (p ** c.shape[-1]) + (c * w).sum(axis=-1)
        code = np.sort(code, axis=1)
        return (np.diff(code, axis=1) != 0).all(axis=1)


@dataclass
class Invariants:
    rank: np.ndarray
    defect: np.ndarray
    equally_dependent: np.ndarray
    hull_dims: np.ndarray  # (B, k)
    width: np.ndarray
    concise: np.ndarray

    def hull_shape(self, b: int) -> tuple:
        return tuple(sorted((int(n) for n in self.hull_dims[b] if n > 0), reverse=True))


def batch_invariants(batch: Batch, deletions: bool = True) -> Invariants:
    p = batch.space.field.p
    s = batch.s
    rows = batch.segre_rows()
    rank = batch_rank(rows, p)
    e = s - rank
    if deletions and s >= 2:
        keep = np.array([[j for j in range(s) if j != i] for i in range(s)])
        dele = rows[:, keep, :].reshape(-1, s - 1, rows.shape[-1])
        rdel = batch_rank(dele, p).reshape(-1, s)
        ed = (e > 0) & (rdel == rank[:, None]).all(axis=1)
    else:
        ed = np.zeros(batch.size, dtype=bool)
    hull = np.stack([batch_rank(c, p) - 1 for c in batch.coords], axis=1)
    width = np.stack([(c != c[:, :1]).any(axis=(1, 2)) for c in batch.coords], axis=1).sum(axis=1)
    dims = np.array(batch.space.dims)
    concise = (hull == dims[None, :]).all(axis=1)
    return Invariants(rank, e, ed, hull, width, concise)


# ---------------------------------------------------------------------------
# Domains
# ---------------------------------------------------------------------------


def subshapes(shape: Sequence[int]) -> list[tuple]:
    """Shapes whose concise sets fit in ``shape`` (factor-wise dims not larger)."""
    shape = sorted(shape, reverse=True)
    out = set()
    for r in range(1, len(shape) + 1):
        for pos in itertools.combinations(range(len(shape)), r):
            ranges = [range(1, shape[i] + 1) for i in pos]
            for dims in itertools.product(*ranges):
                out.add(tuple(sorted(dims, reverse=True)))
    return sorted(out, key=lambda sh: (len(sh), tuple(-n for n in sh)))


def resolve_shapes(spaces: Sequence[Sequence[int]] | None, max_prod: int | None, s: int, concise_only: bool) -> list[tuple]:
    """Shapes to enumerate in ``full`` mode for a domain."""
    if max_prod is not None:
        return shapes_up_to(max_prod, s)
    if not spaces:
        raise PreconditionError("a domain needs --space or --max-prod")
    out = set()
    for sp in spaces:
        sh = tuple(sorted((n for n in sp if n > 0), reverse=True))
        if not sh:
            continue
        cands = [sh] if concise_only else subshapes(sh)
        out.update(c for c in cands if max(c) <= s - 1)
    return sorted(out, key=lambda sh: (len(sh), tuple(-n for n in sh)))


def resolve_spaces(spaces: Sequence[Sequence[int]] | None, max_prod: int | None) -> list[tuple]:
    """Spaces to enumerate in ``none``/``factors`` mode."""
    if max_prod is not None:
        return shapes_up_to(max_prod)
    if not spaces:
        raise PreconditionError("a domain needs --space or --max-prod")
    return [tuple(sp) for sp in spaces]


def full_mode_cost(field: FieldSpec, shapes: Sequence[tuple], s: int) -> int:
    """Estimated orbit count (sorted column tuples divided by ``s!``), times ``s + 1`` ranks."""
    total = 0
    for sh in shapes:
        cs = column_system(field.p, s, tuple(sorted(set(sh), reverse=True)))
        total += -(-cs.orbit_size_bound(sh) // factorial(s))
    return total * (s + 1)


def naive_cost(field: FieldSpec, spaces: Sequence[tuple], s: int) -> int:
    return sum(comb(MultiprojectiveSpace(sp, field).num_points(), s) for sp in spaces) * (s + 1)


def _point_tables(Y: MultiprojectiveSpace):
    tables = [np.array(projective_points(Y.field, n), dtype=np.int64) for n in Y.dims]
    sizes = [len(t) for t in tables]
    # point index -> per-factor index, lexicographic (factor 1 slowest)
    grid = np.array(list(itertools.product(*[range(m) for m in sizes])), dtype=np.int64)
    return tables, grid


def _batch_from_point_indices(Y: MultiprojectiveSpace, tables, grid, combos: np.ndarray) -> Batch:
    per = grid[combos]  # (B, s, k)
    return Batch(Y, [tables[i][per[..., i]] for i in range(Y.k)])


def _combination_chunks(n: int, s: int, chunk: int = CHUNK) -> Iterator[np.ndarray]:
    it = itertools.combinations(range(n), s)
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            return
        yield np.array(block, dtype=np.int64)


def _factor_perm_maps(Y: MultiprojectiveSpace, grid: np.ndarray) -> list[np.ndarray]:
    """Point-index permutations induced by permuting equal-dimension factors."""
    k = Y.k
    perms = [
        pi for pi in itertools.permutations(range(k)) if all(Y.dims[pi[j]] == Y.dims[j] for j in range(k))
    ]
    sizes = grid.max(axis=0) + 1
    w = np.ones(k, dtype=np.int64)
    for i in range(k - 2, -1, -1):
        w[i] = w[i + 1] * sizes[i + 1]
    maps = []
    for pi in perms:
        if pi == tuple(range(k)):
            continue
        maps.append((grid[:, list(pi)] * w).sum(axis=1))
    return maps


def enumerate_naive(Y: MultiprojectiveSpace, s: int, reduction: str = "none") -> Iterator[Batch]:
    """All ``s``-subsets of ``Y(F)`` in lexicographic order, optionally pruned
    to the lexicographically least member of each factor-permutation orbit."""
    tables, grid = _point_tables(Y)
    n = len(grid)
    maps = _factor_perm_maps(Y, grid) if reduction == "factors" else []
    w = n ** np.arange(s - 1, -1, -1, dtype=np.int64)
    for combos in _combination_chunks(n, s):
        if maps:
            own = (combos * w).sum(axis=1)
            keep = np.ones(len(combos), dtype=bool)
            for m in maps:
                img = np.sort(m[combos], axis=1)
                keep &= (img * w).sum(axis=1) >= own
            combos = combos[keep]
            if not len(combos):
                continue
        yield _batch_from_point_indices(Y, tables, grid, combos)


def enumerate_full(field: FieldSpec, shape: Sequence[int], s: int, chunk: int = CHUNK) -> Iterator[Batch]:
    """One concise ``s``-set per projective class of the given shape."""
    shape = tuple(sorted(shape, reverse=True))
    cs = column_system(field.p, s, tuple(sorted(set(shape), reverse=True)))
    Y = MultiprojectiveSpace(shape, field)
    colarr = {n: np.array([cs.column(i) for i in range(cs.start[n], cs.start[n] + cs.count[n])], dtype=np.int64)
              for n in set(shape)}
    buf: list = []

    def flush():
        M = np.array(buf, dtype=np.int64)
        coords = [colarr[n][M[:, i] - cs.start[n]] for i, n in enumerate(shape)]
        b = Batch(Y, coords)
        return b.select(b.distinct_mask())

    for M in cs.canonical_multisets(shape):
        buf.append(M)
        if len(buf) >= chunk:
            out = flush()
            buf = []
            if out.size:
                yield out
    if buf:
        out = flush()
        if out.size:
            yield out


# ---------------------------------------------------------------------------
# Samplers
# ---------------------------------------------------------------------------


def sample_batch(Y: MultiprojectiveSpace, s: int, count: int, rng: np.random.Generator) -> Batch:
    """A mixture of three seeded samplers, rows with repeated points removed.

    * uniform: every point uniform on ``Y(F)``;
    * palette: each factor draws from a random palette of 2 or 3 points,
      which makes coincidences and hence dependencies common;
    * lines: points are grouped in triples varying along a line of one
      factor (the building block of every dependent triple), the rest of
      the set palette-drawn.
    """
    f = Y.field
    p = f.p
    tables = [np.array(projective_points(f, n), dtype=np.int64) for n in Y.dims]
    k = Y.k
    kind = rng.integers(0, 3, size=count)
    idx = np.empty((count, s, k), dtype=np.int64)
    for i, t in enumerate(tables):
        m = len(t)
        uni = rng.integers(0, m, size=(count, s))
        psize = rng.integers(2, 4, size=count)
        pal = rng.integers(0, m, size=(count, 3))
        pick = rng.integers(0, 3, size=(count, s)) % psize[:, None]
        palv = np.take_along_axis(pal, pick, axis=1)
        idx[:, :, i] = np.where((kind == 0)[:, None], uni, palv)
    coords = [tables[i][idx[..., i]] for i in range(k)]
    # line triples: overwrite leading triples of the 'lines' rows
    lines = np.nonzero(kind == 2)[0]
    if len(lines):
        ntrip = rng.integers(1, s // 3 + 1, size=len(lines))
        for tnum in range(s // 3):
            rows = lines[ntrip > tnum]
            if not len(rows):
                continue
            fac = rng.integers(0, k, size=len(rows))
            base = [c[rows, 3 * tnum] for c in coords]
            for i, t in enumerate(tables):
                sel = fac == i
                if not sel.any():
                    continue
                r = rows[sel]
                a = t[rng.integers(0, len(t), size=len(r))]
                b = t[rng.integers(0, len(t), size=len(r))]
                lam = rng.integers(0, p, size=(len(r), 2))
                c3 = (a + lam[:, :1] * b) % p
                c2 = (b + lam[:, 1:] * a) % p
                for j, v in enumerate((a, c2, c3)):
                    coords[i][r, 3 * tnum + j] = _normalize_rows(v, p)
                for h in range(k):
                    if h != i:
                        for j in range(3):
                            coords[h][r, 3 * tnum + j] = base[h][sel]
    batch = Batch(Y, coords)
    ok = batch.distinct_mask() & _nonzero_mask(batch)
    return batch.select(ok)


PLANT_MAX_POINTS = 5000


def plant_circuits(Y: MultiprojectiveSpace, s: int, count: int, rng: np.random.Generator) -> Batch:
    """Circuits of size ``s`` grown from ``count`` random ``(s-1)``-sets.

    Each base set is drawn uniformly or from palettes: a random set of at
    least three active factors gets 2 to 4 points each, the other factors
    one point (so low widths are common).  An independent base ``B`` is
    completed by every point ``y`` of ``Y(F)`` whose image has all
    coefficients nonzero in the basis ``nu(B)``; ``B + y`` is then a
    circuit.  A circuit has exactly ``s`` subsets of size ``s-1``, so with
    uniform bases every circuit is reached with the same probability.
    """
    from ..exact_linalg import rref

    f = Y.field
    p = f.p
    if s < 3:
        raise PreconditionError("circuits have at least 3 points")
    tables, grid = _point_tables(Y)
    M = len(grid)
    if M > PLANT_MAX_POINTS:
        raise PreconditionError(f"{Y} has {M} points; planting needs at most {PLANT_MAX_POINTS}")
    V = Batch(Y, [tables[i][grid[None, :, i]] for i in range(Y.k)]).segre_rows()[0]
    N = V.shape[1]
    Vf = V.astype(np.float64)
    sizes = [len(t) for t in tables]
    w = np.ones(Y.k, dtype=np.int64)
    for i in range(Y.k - 2, -1, -1):
        w[i] = w[i + 1] * sizes[i + 1]
    k = Y.k
    m = np.array(sizes)
    # all base draws at once: per-factor palettes, then uniform rows overwrite
    lo = min(3, k)
    n_active = rng.integers(lo, k + 1, size=count)
    active = np.argsort(rng.random((count, k)), axis=1).argsort(axis=1) < n_active[:, None]
    psize = np.where(active, np.minimum(m, rng.integers(2, 5, size=(count, k))), 1)
    pal = rng.integers(0, m[None, None, :], size=(count, 4, k))
    pick = rng.integers(0, 4, size=(count, s - 1, k)) % psize[:, None, :]
    bases = (np.take_along_axis(pal, pick, axis=1) * w).sum(axis=2)
    uni = rng.integers(0, 4, size=count) == 0
    bases[uni] = rng.integers(0, M, size=(int(uni.sum()), s - 1))
    srt = np.sort(bases, axis=1)
    bases = bases[(np.diff(srt, axis=1) != 0).all(axis=1)]
    out = []
    eye = np.eye(s - 1, dtype=np.int64)
    for base in bases:
        aug = np.concatenate([V[base], eye], axis=1)
        red, pivots = rref(f, aug.tolist(), N + s - 1)
        if len(pivots) < s - 1 or pivots[-1] >= N:
            continue  # dependent base
        # float products are exact here (entries < p, s - 1 terms) and use BLAS
        red = np.array(red, dtype=np.float64)
        # a completion agrees with the base on every factor where the base is constant
        g = grid[base]
        const = np.nonzero((g == g[0]).all(axis=0))[0]
        cand = np.nonzero((grid[:, const] == g[0, const]).all(axis=1))[0]
        c = Vf[cand][:, pivots]
        inside = ~np.mod(Vf[cand] - c @ red[:, :N], p).any(axis=1)
        coeffs = np.mod(c @ red[:, N:], p)
        for y in cand[inside & coeffs.all(axis=1)]:
            out.append(np.append(base, y))
    if not out:
        return Batch(Y, [np.zeros((0, s, n + 1), dtype=np.int64) for n in Y.dims])
    combos = np.sort(np.array(out, dtype=np.int64), axis=1)
    return _batch_from_point_indices(Y, tables, grid, combos)


def _normalize_rows(v: np.ndarray, p: int) -> np.ndarray:
    """Scale each row so its first nonzero entry is 1 (zero rows stay zero)."""
    nz = v != 0
    first = np.where(nz.any(axis=1), nz.argmax(axis=1), 0)
    lead = v[np.arange(len(v)), first]
    inv = np.array([0] + [pow(x, -1, p) for x in range(1, p)], dtype=np.int64)
    return (v * inv[lead][:, None]) % p


def _nonzero_mask(batch: Batch) -> np.ndarray:
    ok = np.ones(batch.size, dtype=bool)
    for c in batch.coords:
        ok &= c.any(axis=-1).all(axis=1)
    return ok
