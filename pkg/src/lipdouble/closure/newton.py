"""Integral closure of monomial ideals through the Newton polyhedron.

Membership of a lattice point ``a`` in conv(E) + R^n_{>=0} is an exact
linear feasibility problem solved by enumerating basic solutions, which
yields rational weights lambda and hence an explicit dependence equation.
Non-members get a separating weight vector, i.e. a monomial arc.
"""

from __future__ import annotations

from itertools import combinations, product
from math import lcm
from typing import Sequence

from gmpy2 import mpq

from ..exactalg.poly import Poly

__all__ = [
    "NotMonomial",
    "newton_weights",
    "separating_weight",
    "monomial_closure",
    "in_newton_polyhedron",
    "exponents_of",
]


class NotMonomial(ValueError):
    pass


def exponents_of(gens: Sequence[Poly]) -> list[tuple]:
    out = []
    for g in gens:
        if g.is_zero():
            continue
        if not g.is_term():
            raise NotMonomial(f"generator {g} is not a monomial")
        e = next(iter(g.terms))
        if e not in out:
            out.append(e)
    return out


def _solve_square(M: list[list[mpq]], rhs: list[mpq]):
    n = len(M)
    a = [row[:] + [b] for row, b in zip(M, rhs)]
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i][c]), None)
        if piv is None:
            return None
        a[c], a[piv] = a[piv], a[c]
        pv = a[c][c]
        a[c] = [x / pv for x in a[c]]
        for i in range(n):
            if i != c and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return [a[i][n] for i in range(n)]


def newton_weights(a: tuple, E: Sequence[tuple]) -> dict | None:
    """Rational lambda >= 0 with sum 1 and sum lambda_g g <= a, or None.

    Basic solutions of {sum lambda = 1, sum lambda_g g_i + sigma_i = a_i}
    are enumerated exactly (at most n + 1 basic variables).
    """
    n = len(a)
    E = list(E)
    if not E:
        return None
    for g in E:
        if all(x <= y for x, y in zip(g, a)):
            return {g: mpq(1)}
    nv = len(E) + n
    # columns: lambda_g then slack_i
    cols = [[mpq(1)] + [mpq(g[i]) for i in range(n)] for g in E]
    cols += [[mpq(0)] + [mpq(1 if k == i else 0) for k in range(n)] for i in range(n)]
    rhs = [mpq(1)] + [mpq(x) for x in a]
    for basis in combinations(range(nv), n + 1):
        if not any(j < len(E) for j in basis):
            continue
        M = [[cols[j][r] for j in basis] for r in range(n + 1)]
        sol = _solve_square(M, rhs)
        if sol is None or any(x < 0 for x in sol):
            continue
        return {E[j]: x for j, x in zip(basis, sol) if j < len(E) and x}
    return None


def in_newton_polyhedron(a: tuple, E: Sequence[tuple]) -> bool:
    return newton_weights(a, E) is not None


def separating_weight(a: tuple, E: Sequence[tuple]) -> tuple | None:
    """Positive integer weight w with w.a < min_g w.g (None if a is in the polyhedron)."""
    n = len(a)
    E = list(E)
    if not E:
        return None
    cands = []
    rays = [tuple(1 if k == i else 0 for k in range(n)) for i in range(n)]
    for g0 in E:
        vecs = [tuple(x - y for x, y in zip(g, g0)) for g in E if g != g0] + rays
        for sub in combinations(vecs, n - 1):
            w = _normal(sub, n)
            if w is None:
                continue
            if all(x <= 0 for x in w):
                w = tuple(-x for x in w)
            if any(x < 0 for x in w):
                continue
            if w not in cands:
                cands.append(w)
    if n == 1:
        cands = [(1,)]
    best = None
    for w in cands:
        lo = min(sum(x * y for x, y in zip(w, g)) for g in E)
        if sum(x * y for x, y in zip(w, a)) < lo:
            best = w
            break
    if best is None:
        return None
    # make every entry positive while keeping the strict gap
    if any(x == 0 for x in best):
        K = sum(a) + 1
        best = tuple(K * x if x else 1 for x in best)
    return best


def _normal(vecs, n):
    """Integer vector orthogonal to n-1 given vectors (None if dependent)."""
    from ..exactalg.matrix import rank_q

    if n == 1:
        return (1,)
    if rank_q([list(v) for v in vecs]) < n - 1:
        return None
    # cofactor expansion: w_i = (-1)^i det(matrix without column i)
    w = []
    for i in range(n):
        sub = [[v[k] for k in range(n) if k != i] for v in vecs]
        w.append((-1) ** i * _det(sub))
    from math import gcd

    g = 0
    for x in w:
        g = gcd(g, int(x))
    if g == 0:
        return None
    return tuple(int(x) // g for x in w)


def _det(m):
    if not m:
        return 1
    if len(m) == 1:
        return m[0][0]
    return sum((-1) ** j * m[0][j] * _det([row[:j] + row[j + 1 :] for row in m[1:]]) for j in range(len(m)))


def monomial_closure(gens: Sequence[Poly]) -> list[Poly]:
    """Minimal monomial generators of the integral closure."""
    gens = [g for g in gens if not g.is_zero()]
    if not gens:
        return []
    ring = gens[0].ring
    E = exponents_of(gens)
    if any(not any(e) for e in E):
        return [ring.one]
    n = ring.nvars
    # minimal generators have each coordinate bounded by the largest generator coordinate
    box = [max(e[i] for e in E) for i in range(n)]
    inside = set()
    for a in product(*(range(b + 1) for b in box)):
        if in_newton_polyhedron(a, E):
            inside.add(a)
    minimal = []
    for a in inside:
        if not any(a[i] and tuple(a[k] - (k == i) for k in range(n)) in inside for i in range(n)):
            minimal.append(a)
    minimal.sort(key=lambda e: (sum(e), tuple(-x for x in e)))
    return [ring.monomial(a) for a in minimal]


def dependence_from_weights(a: tuple, lam: dict) -> tuple[int, dict]:
    """(m, c) with c_g = m*lambda_g integral and m = sum c_g."""
    m = 1
    for x in lam.values():
        m = lcm(m, int(x.denominator))
    c = {g: int(x * m) for g, x in lam.items()}
    return m, c
