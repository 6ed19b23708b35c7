"""Independent reference implementations used only by the tests.

Nothing here imports segre_lab's linear algebra: ranks come from sympy's
DomainMatrix, spans from brute-force enumeration of all combinations.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from sympy import GF, QQ
from sympy.polys.matrices import DomainMatrix


def sympy_rank(p: int | None, rows, ncols: int) -> int:
    """Rank over GF(p), or over QQ when ``p`` is None."""
    if not rows:
        return 0
    K = QQ if p is None else GF(p)
    conv = (lambda x: QQ(Fraction(x).numerator, Fraction(x).denominator)) if p is None else (lambda x: K(int(x)))
    M = DomainMatrix([[conv(x) for x in r] for r in rows], (len(rows), ncols), K)
    return M.rank()


def span_points(p: int, vectors) -> set:
    """Every vector of the GF(p)-span, by enumerating all coefficient tuples."""
    if not vectors:
        return set()
    n = len(vectors[0])
    out = set()
    for coeffs in itertools.product(range(p), repeat=len(vectors)):
        v = [0] * n
        for c, w in zip(coeffs, vectors):
            v = [(x + c * y) % p for x, y in zip(v, w)]
        out.add(tuple(v))
    return out


def brute_rank(p: int, vectors) -> int:
    """log_p of the span size."""
    size = len(span_points(p, vectors)) if vectors else 1
    r = 0
    while p**r < size:
        r += 1
    return r


def kron(a, b, p: int | None = None):
    out = [x * y for x in a for y in b]
    return [x % p for x in out] if p else out


def segre(point, p: int | None = None):
    v = list(point[0])
    for c in point[1:]:
        v = kron(v, c, p)
    return v
