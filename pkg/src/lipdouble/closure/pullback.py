"""Membership of h o arc in the span of the pulled-back generators over Q[[s]].

Elimination uses a global minimal-valuation pivot with row and column
operations.  Row operations are recorded, so a negative answer carries a
row functional ``ell`` (polynomials in s) and a threshold ``v`` with
val(ell . g_j o arc) >= v for every generator and val(ell . h o arc) < v.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from gmpy2 import mpq

from ..exactalg.poly import Poly
from ..exactalg.series import TruncSeries
from .arcs import ARC_VAR, CurveArc

__all__ = ["PullbackResult", "arc_pullback_membership", "pullback_gap"]


@dataclass
class PullbackResult:
    status: str  # member | nonmember | inconclusive
    cofactors: list = field(default_factory=list)  # series, when member
    functional: list = field(default_factory=list)  # series row, when nonmember
    threshold: int | None = None
    h_valuation: int | None = None
    reason: str = ""


def _zero(N):
    return TruncSeries([], N, ARC_VAR)


def _one(N):
    return TruncSeries([1], N, ARC_VAR)


def pullback_gap(ell: Sequence[TruncSeries], vecs: Sequence[Sequence[TruncSeries]]) -> list:
    """Valuations of ell . v for each vector (None means zero to precision)."""
    out = []
    for v in vecs:
        acc = None
        for a, b in zip(ell, v):
            term = a * b
            acc = term if acc is None else acc + term
        out.append(acc.valuation() if acc is not None else None)
    return out


def arc_pullback_membership(
    h: Sequence[Poly] | Poly, gens: Sequence, arc: CurveArc, want_cofactors: bool = False
) -> PullbackResult:
    """Decide h o arc in span(g_j o arc) over the truncated series ring.

    ``member`` only means that no valuation gap exists within the
    truncation; it is never used as a proof of closure membership.
    """
    hv = [h] if isinstance(h, Poly) else list(h)
    gv = [[g] if isinstance(g, Poly) else list(g) for g in gens]
    p = len(hv)
    N = arc.N
    A = [[arc.compose(g[i]) for g in gv] for i in range(p)]
    b = [arc.compose(x) for x in hv]
    r = len(gv)
    P = [[_one(N) if i == j else _zero(N) for j in range(p)] for i in range(p)]
    Q = [[_one(N) if i == j else _zero(N) for j in range(r)] for i in range(r)] if want_cofactors else None
    rows_left = list(range(p))
    cols_left = list(range(r))
    pivots: list[tuple[int, int, int]] = []
    while rows_left and cols_left:
        best = None
        for i in rows_left:
            for j in cols_left:
                v = A[i][j].valuation()
                if v is not None and (best is None or v < best[0]):
                    best = (v, i, j)
        if best is None:
            break
        v, i, j = best
        piv = A[i][j]
        for k in cols_left:
            if k == j or A[i][k].is_zero():
                continue
            f = A[i][k].divide(piv)
            for rr in range(p):
                A[rr][k] = A[rr][k] - f * A[rr][j]
            if Q is not None:
                for rr in range(r):
                    Q[rr][k] = Q[rr][k] - f * Q[rr][j]
        for rr in rows_left:
            if rr == i or A[rr][j].is_zero():
                continue
            f = A[rr][j].divide(piv)
            for k in range(r):
                A[rr][k] = A[rr][k] - f * A[i][k]
            b[rr] = b[rr] - f * b[i]
            P[rr] = [x - f * y for x, y in zip(P[rr], P[i])]
        pivots.append((i, j, v))
        rows_left.remove(i)
        cols_left.remove(j)

    undecided = False
    for i, j, v in pivots:
        vb = b[i].valuation()
        if vb is not None and vb < v:
            return PullbackResult("nonmember", functional=P[i], threshold=v, h_valuation=vb)
        if vb is None and b[i].prec + 1 < v:
            undecided = True
    for i in rows_left:
        vb = b[i].valuation()
        if vb is None:
            continue
        row_prec = min([A[i][k].prec for k in range(r)] + [N])
        if vb <= row_prec and vb + 1 <= N:
            return PullbackResult("nonmember", functional=P[i], threshold=vb + 1, h_valuation=vb)
        undecided = True
    if undecided:
        return PullbackResult("inconclusive", reason="decision depends on terms beyond the truncation")
    if not pivots and any(not x.is_zero() for x in hv):
        return PullbackResult("inconclusive", reason="generators and element vanish to the truncation order")
    cof = []
    if Q is not None:
        c = [_zero(N) for _ in range(r)]
        for i, j, v in pivots:
            if not b[i].is_zero():
                c[j] = b[i].divide(A[i][j])
        cof = []
        for rr in range(r):
            acc = _zero(N)
            for k in range(r):
                if not c[k].is_zero():
                    acc = acc + Q[rr][k] * c[k]
            cof.append(acc)
    return PullbackResult("member", cofactors=cof)


def functional_to_polys(ell: Sequence[TruncSeries], N: int) -> list[list]:
    """Polynomial truncation of a series row: [[coeff, exponent], ...] per entry."""
    return [[[str(c), k] for k, c in enumerate(x.coeffs[: N + 1]) if c] for x in ell]


def functional_from_polys(data, N: int) -> list[TruncSeries]:
    out = []
    for entry in data:
        cs = [mpq(0)] * (N + 1)
        for c, k in entry:
            if int(k) <= N:
                cs[int(k)] += mpq(c)
        out.append(TruncSeries(cs, N, ARC_VAR))
    return out
