"""Polynomial matrices, fraction-free determinants and exact rank."""

from __future__ import annotations

from itertools import combinations
from typing import Sequence

from gmpy2 import mpq

from .poly import Poly, PolyRing

__all__ = ["PolyMatrix", "determinant", "rank_q", "minors"]


class PolyMatrix:
    """Row-major matrix of Polys over one ring."""

    __slots__ = ("ring", "rows", "cols", "entries")

    def __init__(self, ring: PolyRing, rows: int, cols: int, entries: Sequence[Poly]):
        entries = list(entries)
        if len(entries) != rows * cols:
            raise ValueError(f"expected {rows * cols} entries, got {len(entries)}")
        for e in entries:
            if e.ring != ring:
                raise ValueError("matrix entry from a different ring")
        self.ring = ring
        self.rows = rows
        self.cols = cols
        self.entries = entries

    @classmethod
    def from_rows(cls, ring: PolyRing, rows: Sequence[Sequence]) -> PolyMatrix:
        rows = [[ring(x) if not isinstance(x, Poly) else x for x in r] for r in rows]
        ncols = len(rows[0]) if rows else 0
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged rows")
        return cls(ring, len(rows), ncols, [x for r in rows for x in r])

    @classmethod
    def from_columns(cls, ring: PolyRing, cols: Sequence[Sequence[Poly]], nrows: int) -> PolyMatrix:
        cols = [list(c) for c in cols]
        for c in cols:
            if len(c) != nrows:
                raise ValueError("column of wrong length")
        return cls(ring, nrows, len(cols), [cols[j][i] for i in range(nrows) for j in range(len(cols))])

    def __getitem__(self, ij: tuple[int, int]) -> Poly:
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> list[Poly]:
        return self.entries[i * self.cols : (i + 1) * self.cols]

    def column(self, j: int) -> list[Poly]:
        return [self.entries[i * self.cols + j] for i in range(self.rows)]

    def columns(self) -> list[list[Poly]]:
        return [self.column(j) for j in range(self.cols)]

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> PolyMatrix:
        return PolyMatrix(self.ring, len(rows), len(cols), [self[i, j] for i in rows for j in cols])

    def with_column(self, j: int, col: Sequence[Poly]) -> PolyMatrix:
        e = list(self.entries)
        for i in range(self.rows):
            e[i * self.cols + j] = col[i]
        return PolyMatrix(self.ring, self.rows, self.cols, e)

    def evaluate(self, point) -> list[list[mpq]]:
        return [[self[i, j].evaluate(point) for j in range(self.cols)] for i in range(self.rows)]

    def mul_vector(self, v: Sequence[Poly]) -> list[Poly]:
        out = []
        for i in range(self.rows):
            acc = self.ring.zero
            for j in range(self.cols):
                acc = acc + self[i, j] * v[j]
            out.append(acc)
        return out

    def __eq__(self, other):
        return (
            isinstance(other, PolyMatrix)
            and (self.rows, self.cols) == (other.rows, other.cols)
            and self.entries == other.entries
        )

    def __repr__(self):
        body = "; ".join(", ".join(str(x) for x in self.row(i)) for i in range(self.rows))
        return f"PolyMatrix[{body}]"


def determinant(m: PolyMatrix) -> Poly:
    """Bareiss fraction-free elimination; every division is exact."""
    if m.rows != m.cols:
        raise ValueError(f"determinant of a non-square {m.rows}x{m.cols} matrix")
    n = m.rows
    if n == 0:
        return m.ring.one
    a = [list(m.row(i)) for i in range(n)]
    sign = 1
    prev = m.ring.one
    for k in range(n - 1):
        if not a[k][k]:
            swap = next((i for i in range(k + 1, n) if a[i][k]), None)
            if swap is None:
                return m.ring.zero
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        piv = a[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = piv * a[i][j] - a[i][k] * a[k][j]
                a[i][j] = num if prev == 1 else num.exact_div(prev)
            a[i][k] = m.ring.zero
        prev = piv
    d = a[n - 1][n - 1]
    return d if sign == 1 else -d


def minors(m: PolyMatrix, k: int, must_include_col: int | None = None) -> list[tuple[tuple, tuple, Poly]]:
    """All k x k minors as (row indices, column indices, determinant)."""
    out = []
    for rs in combinations(range(m.rows), k):
        for cs in combinations(range(m.cols), k):
            if must_include_col is not None and must_include_col not in cs:
                continue
            out.append((rs, cs, determinant(m.submatrix(rs, cs))))
    return out


def rank_q(rows: Sequence[Sequence]) -> int:
    """Rank of a rational matrix by exact Gaussian elimination."""
    a = [[mpq(x) for x in r] for r in rows]
    if not a:
        return 0
    ncols = len(a[0])
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(a)) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        pv = a[r][c]
        for i in range(r + 1, len(a)):
            if a[i][c]:
                f = a[i][c] / pv
                ai = a[i]
                ar = a[r]
                for j in range(c, ncols):
                    ai[j] -= f * ar[j]
        r += 1
        if r == len(a):
            break
    return r
