"""Bounded search for integral dependence equations.

Looks for U*f^m + a_1 f^(m-1) + ... + a_m = 0 modulo I(X) with
a_i = sum over products G of i generators of c_G * G, deg c_G <= max_deg,
by one exact linear solve per (m, degree bound).  U = 1 unless a unit
degree is requested, in which case U is normalized by U(point) = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Mapping, Sequence

from gmpy2 import mpq

from ..exactalg.linsolve import solve_sparse
from ..exactalg.poly import Poly, PolyRing
from ..groebner import groebner_basis

__all__ = ["DependenceCertificate", "dependence_search", "default_max_deg", "detect_grading"]

MAX_UNKNOWNS = 6000


@dataclass
class DependenceCertificate:
    """U f^m + sum_i a_i f^(m-i) = sum_k q_k rel_k with a_i = sum c_G * prod(G)."""

    f: Poly
    gens: list
    m: int
    unit: Poly
    coefficients: list  # index i-1 -> list of (tuple of generator indices, Poly)
    relations: list = field(default_factory=list)
    relation_cofactors: list = field(default_factory=list)
    point: dict = field(default_factory=dict)

    def a(self, i: int) -> Poly:
        acc = self.f.ring.zero
        for idx, c in self.coefficients[i - 1]:
            prod = self.f.ring.one
            for j in idx:
                prod = prod * self.gens[j]
            acc = acc + c * prod
        return acc

    def identity_lhs(self) -> Poly:
        acc = self.unit * self.f**self.m
        for i in range(1, self.m + 1):
            acc = acc + self.a(i) * self.f ** (self.m - i)
        return acc

    def verify(self) -> bool:
        rhs = self.f.ring.zero
        for q, r in zip(self.relation_cofactors, self.relations):
            rhs = rhs + q * r
        if self.identity_lhs() != rhs:
            return False
        return not self.point or self.unit.evaluate(self.point) != 0


def default_max_deg(f: Poly, gens: Sequence[Poly]) -> int:
    return max(2 * max([f.total_degree()] + [g.total_degree() for g in gens]), 1)


def detect_grading(polys: Sequence[Poly]) -> tuple | None:
    """Positive integer weights making every poly homogeneous, or None."""
    from ..exactalg.matrix import rank_q

    polys = [p for p in polys if p.terms]
    if not polys:
        return None
    n = polys[0].ring.nvars
    rows = []
    for p in polys:
        es = list(p.terms)
        for e in es[1:]:
            rows.append([a - b for a, b in zip(e, es[0])])
    if not rows or rank_q(rows) == 0:
        return tuple([1] * n)
    if all(sum(r) == 0 for r in rows):
        return tuple([1] * n)
    # one-dimensional kernel with a sign-definite generator
    if rank_q(rows) != n - 1:
        return None
    for i in range(n):
        # kernel vector by solving with coordinate i fixed to 1
        sub = [[r[k] for k in range(n) if k != i] for r in rows]
        rhs = [-r[i] for r in rows]
        sol = solve_sparse([{k: mpq(x) for k, x in enumerate(row) if x} for row in sub], rhs, prefilter=False)
        if sol is None:
            continue
        w = []
        it = iter(range(n - 1))
        for k in range(n):
            w.append(mpq(1) if k == i else sol.get(next(it), mpq(0)))
        if all(x > 0 for x in w):
            from math import lcm

            d = 1
            for x in w:
                d = lcm(d, int(x.denominator))
            return tuple(int(x * d) for x in w)
        if all(x < 0 for x in w):
            return None
    return None


def _wdeg(e: tuple, w: tuple) -> int:
    return sum(a * b for a, b in zip(e, w))


def _monomials(n: int, D: int):
    def rec(i, left):
        if i == n - 1:
            for k in range(left + 1):
                yield (k,)
            return
        for k in range(left + 1):
            for rest in rec(i + 1, left - k):
                yield (k,) + rest

    if n == 0:
        yield ()
        return
    yield from rec(0, D)


def _degree_steps(max_deg: int) -> list[int]:
    steps = [0]
    d = 1
    while d < max_deg:
        steps.append(d)
        d *= 2
    if max_deg not in steps:
        steps.append(max_deg)
    return steps


def dependence_search(
    f: Poly,
    gens: Sequence[Poly],
    relations: Sequence[Poly] = (),
    max_m: int = 4,
    max_deg: int | None = None,
    *,
    point: Mapping | None = None,
    unit_degree: int = 0,
) -> DependenceCertificate | None:
    """Certificate of integral dependence of f on (gens) mod relations, or None if exhausted."""
    if max_m < 1:
        raise ValueError("max_m must be >= 1")
    ring = f.ring
    gens = [g for g in gens if g]
    uniq: list[Poly] = []
    for g in gens:
        if not any(g.primitive() == u.primitive() for u in uniq):
            uniq.append(g)
    gens = uniq
    relations = [r for r in relations if r]
    if max_deg is None:
        max_deg = default_max_deg(f, gens)
    if max_deg < 0:
        raise ValueError("max_deg must be >= 0")
    rel_gb = groebner_basis(relations, ring=ring, track=True) if relations else None
    pt = {v: mpq(point.get(v, 0)) for v in ring.names} if point else {}

    def nf(p: Poly) -> Poly:
        return rel_gb.reduce(p) if rel_gb is not None else p

    if f.is_zero() or nf(f).is_zero():
        return _finish(f, gens, 1, ring.one, [[]], relations, rel_gb, pt)
    if not gens:
        return None
    lts = [lt for _, lt in rel_gb.leading_terms()] if rel_gb is not None else []

    def standard(mu):
        return not any(all(a <= b for a, b in zip(lt, mu)) for lt in lts)

    grading = detect_grading([f] + gens + relations) if unit_degree == 0 else None
    fpow = [ring.one]
    for _ in range(max_m):
        fpow.append(fpow[-1] * f)
    products: dict[int, list] = {}
    for m in range(1, max_m + 1):
        products[m] = []
        for idx in combinations_with_replacement(range(len(gens)), m):
            prod = ring.one
            for j in idx:
                prod = prod * gens[j]
            products[m].append((idx, prod))
    for m in range(1, max_m + 1):
        for D in _degree_steps(max_deg):
            cert = _solve(ring, f, gens, m, D, fpow, products, nf, standard, grading, unit_degree, pt, relations, rel_gb)
            if cert == "too-large":
                break
            if cert is not None:
                return cert
    return None


def _solve(ring, f, gens, m, D, fpow, products, nf, standard, grading, unit_degree, pt, relations, rel_gb):
    n = ring.nvars
    cols: list[dict] = []
    labels: list = []
    seen: dict = {}

    def add_col(poly: Poly, label):
        if not poly.terms:
            return
        key = poly.primitive()
        scale = poly.leading_term()[1] / key.leading_term()[1]
        if key in seen:
            return
        seen[key] = True
        cols.append({e: c / scale for e, c in poly.terms.items()})
        labels.append((label, scale))

    fdeg = _wdeg(next(iter(f.terms)), grading) if grading else None
    for i in range(1, m + 1):
        for idx, G in products[i]:
            if grading:
                gdeg = _wdeg(next(iter(G.terms)), grading)
                target = i * fdeg - gdeg
                if target < 0:
                    continue
            for mu in _monomials(n, D):
                if grading and _wdeg(mu, grading) != target:
                    continue
                if not standard(mu):
                    continue
                add_col(nf(G.mul_term(mu, 1) * fpow[m - i]), ("a", i, idx, mu))
                if len(cols) > MAX_UNKNOWNS:
                    return "too-large"
    rows: dict = {}
    ncols_a = len(cols)
    rhs_poly = None
    unit_cols = []
    if unit_degree == 0:
        rhs_poly = -nf(fpow[m])
    else:
        for nu in _monomials(n, unit_degree):
            if not standard(nu):
                continue
            col = nf(fpow[m].mul_term(nu, 1))
            unit_cols.append((nu, len(cols) + len(unit_cols)))
            cols.append({e: c for e, c in col.terms.items()})
            labels.append((("u", nu), mpq(1)))
    for j, col in enumerate(cols):
        for e, c in col.items():
            rows.setdefault(e, {})[j] = c
    keys = list(rows)
    A = [rows[k] for k in keys]
    b = [rhs_poly.terms.get(k, mpq(0)) if rhs_poly is not None else mpq(0) for k in keys]
    if rhs_poly is not None:
        for e, c in rhs_poly.terms.items():
            if e not in rows:
                A.append({})
                b.append(c)
    if unit_degree:
        A.append({j: mpq(ring.monomial(nu).evaluate(pt)) for nu, j in unit_cols if ring.monomial(nu).evaluate(pt)})
        b.append(mpq(1))
    sol = solve_sparse(A, b)
    if sol is None:
        return None
    coeffs: list[dict] = [dict() for _ in range(m)]
    unit = ring.one if unit_degree == 0 else ring.zero
    for j, x in sol.items():
        label, scale = labels[j]
        if label[0] == "a":
            _, i, idx, mu = label
            d = coeffs[i - 1].setdefault(idx, {})
            d[mu] = d.get(mu, 0) + x / scale
        else:
            unit = unit + ring.monomial(label[1], x)
    coefficients = [
        [(idx, Poly(ring, {e: c for e, c in d.items() if c})) for idx, d in sorted(ci.items()) if any(d.values())]
        for ci in coeffs
    ]
    return _finish(f, gens, m, unit, coefficients, relations, rel_gb, pt)


def _finish(f, gens, m, unit, coefficients, relations, rel_gb, pt):
    cert = DependenceCertificate(f, list(gens), m, unit, coefficients, list(relations), [], dict(pt))
    lhs = cert.identity_lhs()
    if relations:
        rem, cof = rel_gb.reduce(lhs, track=True)
        if not rem.is_zero():
            raise AssertionError("dependence identity does not reduce to zero modulo the relations")
        cert.relation_cofactors = cof
    elif lhs:
        raise AssertionError("dependence identity is not exact")
    if not cert.verify():
        raise AssertionError("dependence certificate failed self-verification")
    return cert
