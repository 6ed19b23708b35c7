"""Exact linear algebra over prime fields GF(p) and the rationals.

Scalars are plain Python objects: residues ``0 <= x < p`` (``int``) for
GF(p) and :class:`fractions.Fraction` for the rationals.  Nothing in this
module ever touches floating point.

Two execution paths exist:

* per-matrix functions (:func:`rank`, :func:`kernel_basis`, :func:`in_span`,
  :func:`subspace_intersection`) used by the analysis code, and
* batched numpy kernels (:func:`batch_rank`) used by the enumeration harness,
  where millions of tiny GF(p) ranks are computed at once.

GF(2) rows are bit-packed into integers in both paths.  Rational rank uses
Bareiss fraction-free elimination on integer rows.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import DimensionMismatch, InvalidPoint

Scalar = Union[int, Fraction]
Vector = tuple  # tuple[Scalar, ...]

_FIELD_RE = re.compile(r"^\s*(?:gf|f|gf\(|f_)?\s*(\d+)\s*\)?\s*$", re.IGNORECASE)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class FieldSpec:
    """The coefficient field: ``GF(p)`` for a prime ``p`` or the rationals ``QQ``."""

    kind: str
    p: int | None = None

    def __post_init__(self):
        if self.kind == "GF":
            if self.p is None or not is_prime(int(self.p)):
                raise ValueError(f"GF(p) needs a prime modulus, got {self.p!r}")
        elif self.kind == "QQ":
            if self.p is not None:
                raise ValueError("the rationals carry no modulus")
        else:
            raise ValueError(f"unknown field kind {self.kind!r}")

    @classmethod
    def gf(cls, p: int) -> FieldSpec:
        return cls("GF", int(p))

    @classmethod
    def rationals(cls) -> FieldSpec:
        return cls("QQ")

    @classmethod
    def parse(cls, text: str) -> FieldSpec:
        """Parse CLI spellings: ``gf3``, ``GF(5)``, ``3``, ``qq``, ``rationals``."""
        t = text.strip().lower()
        if t in ("qq", "q", "rationals", "rational", "rat"):
            return cls.rationals()
        m = _FIELD_RE.match(t)
        if not m:
            raise ValueError(f"cannot parse field {text!r}")
        return cls.gf(int(m.group(1)))

    @property
    def is_finite(self) -> bool:
        return self.kind == "GF"

    @property
    def label(self) -> str:
        return f"gf{self.p}" if self.is_finite else "qq"

    def __str__(self) -> str:
        return f"GF({self.p})" if self.is_finite else "QQ"

    # -- scalars -----------------------------------------------------------

    def __call__(self, x) -> Scalar:
        """Canonical field element for an int, Fraction or decimal/fraction string."""
        if isinstance(x, str):
            x = Fraction(x.strip())
        if self.kind == "GF":
            if isinstance(x, Fraction):
                if x.denominator % self.p == 0:
                    raise InvalidPoint(f"{x} has no image in GF({self.p})")
                return x.numerator * pow(x.denominator, -1, self.p) % self.p
            if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
                return int(x) % self.p
            raise InvalidPoint(f"cannot coerce {x!r} into GF({self.p})")
        if isinstance(x, bool) or not isinstance(x, (int, Fraction, np.integer)):
            raise InvalidPoint(f"cannot coerce {x!r} into QQ")
        return Fraction(int(x)) if not isinstance(x, Fraction) else x

    def format(self, x: Scalar) -> str:
        return str(x)

    @property
    def zero(self) -> Scalar:
        return 0 if self.is_finite else Fraction(0)

    @property
    def one(self) -> Scalar:
        return 1 if self.is_finite else Fraction(1)

    def inv(self, x: Scalar) -> Scalar:
        if not x:
            raise ZeroDivisionError("inverse of zero")
        if self.is_finite:
            return pow(x, -1, self.p)
        return 1 / x

    def add(self, a, b):
        return (a + b) % self.p if self.is_finite else a + b

    def sub(self, a, b):
        return (a - b) % self.p if self.is_finite else a - b

    def mul(self, a, b):
        return a * b % self.p if self.is_finite else a * b

    def elements(self) -> range:
        if not self.is_finite:
            raise ValueError("the rationals are not enumerable")
        return range(self.p)

    def to_json(self) -> dict:
        return {"kind": "GF", "p": self.p} if self.is_finite else {"kind": "QQ"}

    @classmethod
    def from_json(cls, obj: dict) -> FieldSpec:
        kind = str(obj.get("kind", "")).upper()
        if kind in ("GF", "FP"):
            return cls.gf(int(obj["p"]))
        if kind in ("QQ", "Q", "RATIONALS"):
            return cls.rationals()
        raise ValueError(f"unknown field object {obj!r}")


def coerce_vector(field: FieldSpec, v: Iterable) -> Vector:
    return tuple(field(x) for x in v)


def projective_normalize(field: FieldSpec, v: Iterable) -> Vector:
    """Scale ``v`` so that its leftmost nonzero coordinate is 1."""
    v = coerce_vector(field, v)
    for x in v:
        if x:
            if x == 1:
                return v
            c = field.inv(x)
            return tuple(field.mul(c, y) for y in v)
    raise InvalidPoint("the zero vector is not a projective point")


def kron(field: FieldSpec, a: Sequence, b: Sequence) -> Vector:
    """Kronecker product with ``a`` as the slow index."""
    if field.is_finite:
        p = field.p
        return tuple(x * y % p for x in a for y in b)
    return tuple(x * y for x in a for y in b)


# ---------------------------------------------------------------------------
# Matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalarMatrix:
    """Immutable dense matrix with canonical entries in a single field."""

    field: FieldSpec
    rows: tuple
    ncols: int

    @classmethod
    def from_rows(cls, field: FieldSpec, rows: Iterable[Iterable], ncols: int | None = None) -> ScalarMatrix:
        rows = tuple(coerce_vector(field, r) for r in rows)
        if ncols is None:
            if not rows:
                raise DimensionMismatch("cannot infer the column count of an empty matrix")
            ncols = len(rows[0])
        for r in rows:
            if len(r) != ncols:
                raise DimensionMismatch(f"row of length {len(r)} in a matrix with {ncols} columns")
        return cls(field, rows, ncols)

    @classmethod
    def zeros(cls, field: FieldSpec, nrows: int, ncols: int) -> ScalarMatrix:
        return cls(field, tuple((field.zero,) * ncols for _ in range(nrows)), ncols)

    @classmethod
    def identity(cls, field: FieldSpec, n: int) -> ScalarMatrix:
        return cls(field, tuple(tuple(field.one if i == j else field.zero for j in range(n)) for i in range(n)), n)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def transpose(self) -> ScalarMatrix:
        if not self.rows:
            return ScalarMatrix(self.field, tuple(() for _ in range(self.ncols)), 0)
        return ScalarMatrix(self.field, tuple(zip(*self.rows)), self.nrows)

    def apply(self, v: Sequence) -> Vector:
        """Matrix-vector product ``M v``."""
        if len(v) != self.ncols:
            raise DimensionMismatch(f"vector of length {len(v)} for {self.ncols} columns")
        f = self.field
        if f.is_finite:
            return tuple(sum(a * b for a, b in zip(r, v)) % f.p for r in self.rows)
        return tuple(sum((a * b for a, b in zip(r, v)), Fraction(0)) for r in self.rows)

    def rank(self) -> int:
        return rank(self)

    def kernel_basis(self) -> list[Vector]:
        return kernel_basis(self)


# ---------------------------------------------------------------------------
# Elimination kernels
# ---------------------------------------------------------------------------


def _pack_gf2(rows: Iterable[Sequence[int]]) -> list[int]:
    packed = []
    for r in rows:
        x = 0
        for bit in r:
            x = (x << 1) | (bit & 1)
        packed.append(x)
    return packed


def rank_gf2_packed(words: Iterable[int]) -> int:
    """Rank over GF(2) of rows given as Python-int bit masks."""
    basis: dict[int, int] = {}  # leading bit -> row
    r = 0
    for w in words:
        while w:
            lead = w.bit_length() - 1
            b = basis.get(lead)
            if b is None:
                basis[lead] = w
                r += 1
                break
            w ^= b
    return r


def _rank_mod_p(rows: Sequence[Sequence[int]], p: int, ncols: int) -> int:
    m = [list(r) for r in rows]
    rk = 0
    nrows = len(m)
    for c in range(ncols):
        piv = None
        for i in range(rk, nrows):
            if m[i][c]:
                piv = i
                break
        if piv is None:
            continue
        m[rk], m[piv] = m[piv], m[rk]
        pr = m[rk]
        inv = pow(pr[c], -1, p)
        for i in range(rk + 1, nrows):
            f = m[i][c]
            if f:
                f = f * inv % p
                row = m[i]
                for j in range(c, ncols):
                    if pr[j]:
                        row[j] = (row[j] - f * pr[j]) % p
        rk += 1
        if rk == nrows:
            break
    return rk


def _integer_rows(rows: Sequence[Sequence[Fraction]]) -> list[list[int]]:
    """Scale each rational row by the lcm of its denominators (rank preserving)."""
    out = []
    for r in rows:
        d = reduce(lcm, (x.denominator for x in r), 1)
        out.append([int(x * d) for x in r])
    return out


def _bareiss_forward(mat: list[list[int]], ncols: int) -> tuple[list[list[int]], list[int]]:
    """Fraction-free forward elimination (single-step Bareiss).

    Every division is exact, so entries stay bounded by the size of the
    leading minors instead of growing exponentially.  Returns the echelon
    rows (first ``len(pivots)`` rows are nonzero) and the pivot columns.
    """
    m = [list(r) for r in mat]
    nrows = len(m)
    prev = 1
    rk = 0
    pivots: list[int] = []
    for c in range(ncols):
        piv = None
        for i in range(rk, nrows):
            if m[i][c]:
                piv = i
                break
        if piv is None:
            continue
        m[rk], m[piv] = m[piv], m[rk]
        a = m[rk][c]
        for i in range(rk + 1, nrows):
            b = m[i][c]
            row = m[i]
            pr = m[rk]
            for j in range(c + 1, ncols):
                row[j] = (a * row[j] - b * pr[j]) // prev
            row[c] = 0
        prev = a
        pivots.append(c)
        rk += 1
        if rk == nrows:
            break
    return m, pivots


def _rank_rational(rows: Sequence[Sequence[Fraction]], ncols: int) -> int:
    if not rows or ncols == 0:
        return 0
    _, pivots = _bareiss_forward(_integer_rows(rows), ncols)
    return len(pivots)


def rank(M: ScalarMatrix) -> int:
    """Exact rank.  The empty matrix has rank 0."""
    if M.nrows == 0 or M.ncols == 0:
        return 0
    f = M.field
    if f.is_finite:
        if f.p == 2:
            return rank_gf2_packed(_pack_gf2(M.rows))
        return _rank_mod_p(M.rows, f.p, M.ncols)
    return _rank_rational(M.rows, M.ncols)


def rank_of_vectors(field: FieldSpec, vectors: Sequence[Sequence], ncols: int | None = None) -> int:
    if not vectors:
        return 0
    n = len(vectors[0]) if ncols is None else ncols
    if field.is_finite:
        if field.p == 2:
            return rank_gf2_packed(_pack_gf2(vectors))
        return _rank_mod_p(vectors, field.p, n)
    return _rank_rational(vectors, n)


def rref(field: FieldSpec, rows: Sequence[Sequence], ncols: int) -> tuple[list[list], list[int]]:
    """Reduced row echelon form: nonzero rows with pivot entries 1, and pivot columns.

    Over the rationals the forward sweep is fraction-free; only the final
    back-substitution divides, so the output is canonical and deterministic.
    """
    if field.is_finite:
        p = field.p
        m = [list(r) for r in rows]
        nrows = len(m)
        pivots: list[int] = []
        rk = 0
        for c in range(ncols):
            piv = None
            for i in range(rk, nrows):
                if m[i][c]:
                    piv = i
                    break
            if piv is None:
                continue
            m[rk], m[piv] = m[piv], m[rk]
            inv = pow(m[rk][c], -1, p)
            pr = [x * inv % p for x in m[rk]]
            m[rk] = pr
            for i in range(nrows):
                if i != rk and m[i][c]:
                    f = m[i][c]
                    m[i] = [(x - f * y) % p for x, y in zip(m[i], pr)]
            pivots.append(c)
            rk += 1
            if rk == nrows:
                break
        return m[:rk], pivots
    if not rows:
        return [], []
    ech, pivots = _bareiss_forward(_integer_rows(rows), ncols)
    rk = len(pivots)
    out = [[Fraction(x) for x in ech[i]] for i in range(rk)]
    for i in range(rk - 1, -1, -1):
        c = pivots[i]
        piv = out[i][c]
        out[i] = [x / piv for x in out[i]]
        for j in range(i):
            f = out[j][c]
            if f:
                out[j] = [x - f * y for x, y in zip(out[j], out[i])]
    return out, pivots


def kernel_basis(M: ScalarMatrix) -> list[Vector]:
    """Basis of the right kernel ``{v : M v = 0}``; one vector per free column."""
    f = M.field
    n = M.ncols
    red, pivots = rref(f, M.rows, n)
    pivset = set(pivots)
    basis = []
    for free in range(n):
        if free in pivset:
            continue
        v = [f.zero] * n
        v[free] = f.one
        for row, c in zip(red, pivots):
            if row[free]:
                v[c] = f.sub(f.zero, row[free])
        basis.append(tuple(v))
    return basis


def _check_lengths(vectors: Sequence[Sequence], n: int | None = None) -> int:
    lengths = {len(v) for v in vectors}
    if n is not None:
        lengths.add(n)
    if len(lengths) > 1:
        raise DimensionMismatch(f"incompatible vector lengths {sorted(lengths)}")
    return lengths.pop() if lengths else 0


def in_span(field: FieldSpec, v: Sequence, basis: Sequence[Sequence]) -> tuple[bool, Vector | None]:
    """Is ``v`` in the span of ``basis``?  Returns ``(True, coefficients)`` or ``(False, None)``.

    ``basis`` need not be independent; the returned coefficients are then one
    particular solution (free coefficients set to zero).
    """
    n = _check_lengths(list(basis), len(v))
    v = coerce_vector(field, v)
    if not basis:
        return (not any(v), () if not any(v) else None)
    # columns = basis vectors, augmented by v
    t = len(basis)
    aug = [[field(basis[j][i]) for j in range(t)] + [v[i]] for i in range(n)]
    red, pivots = rref(field, aug, t + 1)
    if t in pivots:
        return False, None
    coeffs = [field.zero] * t
    for row, c in zip(red, pivots):
        coeffs[c] = row[t]
    return True, tuple(coeffs)


def span_basis(field: FieldSpec, vectors: Sequence[Sequence]) -> list[Vector]:
    """A canonical (RREF) basis of the span of ``vectors``."""
    if not vectors:
        return []
    n = _check_lengths(vectors)
    red, _ = rref(field, [coerce_vector(field, v) for v in vectors], n)
    return [tuple(r) for r in red]


def subspace_intersection(field: FieldSpec, U: Sequence[Sequence], V: Sequence[Sequence]) -> list[Vector]:
    """Basis of ``span(U) ∩ span(V)`` (as linear subspaces).

    Solves ``sum a_i u_i = sum b_j v_j`` and maps the kernel into span(U);
    the result is returned in canonical RREF form.
    """
    U = [coerce_vector(field, u) for u in U]
    V = [coerce_vector(field, v) for v in V]
    n = _check_lengths(U + V)
    if not U or not V:
        return []
    cols = U + [tuple(field.sub(field.zero, x) for x in v) for v in V]
    system = ScalarMatrix.from_rows(field, [[c[i] for c in cols] for i in range(n)], len(cols))
    images = []
    for k in kernel_basis(system):
        a = k[: len(U)]
        w = [field.zero] * n
        for coef, u in zip(a, U):
            if coef:
                w = [field.add(x, field.mul(coef, y)) for x, y in zip(w, u)]
        if any(w):
            images.append(tuple(w))
    return span_basis(field, images)


# ---------------------------------------------------------------------------
# Batched numpy kernels (harness fast path)
# ---------------------------------------------------------------------------


def _pack_rows_gf2(arr: np.ndarray) -> np.ndarray:
    """(B, m, n) 0/1 array with n <= 64  ->  (B, m) uint64 bit masks."""
    n = arr.shape[-1]
    weights = (np.uint64(1) << np.arange(n - 1, -1, -1, dtype=np.uint64))
    return (arr.astype(np.uint64) * weights).sum(axis=-1, dtype=np.uint64)


def batch_rank_gf2(words: np.ndarray, nbits: int) -> np.ndarray:
    """Ranks of a batch of GF(2) matrices given as (B, m) uint64 row masks."""
    w = words.copy()
    B, m = w.shape
    rk = np.zeros(B, dtype=np.int64)
    rows_idx = np.arange(m)
    one = np.uint64(1)
    for bit in range(nbits - 1, -1, -1):
        active = rk < m
        if not active.any():
            break
        col = ((w >> np.uint64(bit)) & one).astype(bool)
        col &= rows_idx[None, :] >= rk[:, None]
        has = col.any(axis=1) & active
        if not has.any():
            continue
        idx = np.nonzero(has)[0]
        piv = col[idx].argmax(axis=1)
        r = rk[idx]
        a = w[idx, r].copy()
        b = w[idx, piv].copy()
        w[idx, r] = b
        w[idx, piv] = a
        sub = w[idx]
        hits = ((sub >> np.uint64(bit)) & one).astype(bool)
        hits &= rows_idx[None, :] > r[:, None]
        sub ^= np.where(hits, b[:, None], np.uint64(0))
        w[idx] = sub
        rk[idx] += 1
    return rk


def batch_rank_mod_p(arr: np.ndarray, p: int) -> np.ndarray:
    """Ranks of a batch of matrices over GF(p); ``arr`` has shape (B, m, n)."""
    A = np.array(arr, dtype=np.int64) % p
    B, m, n = A.shape
    rk = np.zeros(B, dtype=np.int64)
    rows_idx = np.arange(m)
    inv_table = np.array([0] + [pow(x, -1, p) for x in range(1, p)], dtype=np.int64)
    for c in range(n):
        active = rk < m
        if not active.any():
            break
        col = (A[:, :, c] != 0) & (rows_idx[None, :] >= rk[:, None])
        has = col.any(axis=1) & active
        if not has.any():
            continue
        idx = np.nonzero(has)[0]
        piv = col[idx].argmax(axis=1)
        r = rk[idx]
        a = A[idx, r].copy()
        b = A[idx, piv].copy()
        A[idx, piv] = a
        b = b * inv_table[b[:, c]][:, None] % p
        A[idx, r] = b
        sub = A[idx]
        f = sub[:, :, c].copy()
        f[rows_idx[None, :] <= r[:, None]] = 0
        sub = (sub - f[:, :, None] * b[:, None, :]) % p
        A[idx] = sub
        rk[idx] += 1
    return rk


def batch_rank(arr: np.ndarray, p: int) -> np.ndarray:
    """Ranks over GF(p) of a (B, m, n) integer batch; bit-packed when p == 2."""
    arr = np.asarray(arr)
    if arr.ndim != 3:
        raise DimensionMismatch("batch_rank expects a (B, m, n) array")
    if arr.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    if arr.shape[1] == 0 or arr.shape[2] == 0:
        return np.zeros(arr.shape[0], dtype=np.int64)
    if p == 2 and arr.shape[2] <= 64:
        return batch_rank_gf2(_pack_rows_gf2(arr % 2), arr.shape[2])
    return batch_rank_mod_p(arr, p)


def scalars_to_json(field: FieldSpec, v: Sequence) -> list[str]:
    return [field.format(x) for x in v]


def primitive_integer_vector(v: Sequence[Fraction]) -> tuple[int, ...]:
    """Clear denominators and common factors (sign fixed by the first nonzero entry)."""
    d = reduce(lcm, (Fraction(x).denominator for x in v), 1)
    ints = [int(Fraction(x) * d) for x in v]
    g = reduce(gcd, ints, 0) or 1
    ints = [x // g for x in ints]
    for x in ints:
        if x:
            if x < 0:
                ints = [-y for y in ints]
            break
    return tuple(ints)
