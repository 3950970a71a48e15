"""Doubles of elements and modules over X x X and X x_Y X.

Product-ring naming: a base variable ``v`` becomes ``v_1`` under the first
projection and ``v_2`` under the second.  In relative mode parameter
variables (and auxiliary variables whose relations involve no fiber
variable) are shared between the two factors and keep their names.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from gmpy2 import mpq

from .exactalg.matrix import PolyMatrix, rank_q
from .exactalg.poly import Poly, to_q
from .modulealg import Ideal, ModulePresentation, RingContext, check_point

__all__ = [
    "ProductRingContext",
    "DoublePresentation",
    "double_element",
    "double_module",
    "diagonal_ideal",
    "offdiagonal_block_rank",
    "divided_differences",
    "double_local_certificate",
    "DoubledCertificate",
]

MODES = ("absolute", "relative")
BASES = ("B", "B'", "B''")


def _shared_aux(ctx: RingContext) -> set:
    """Auxiliary variables tied only to parameters (shared in relative mode)."""
    shared = set(ctx.aux)
    zs = set(ctx.z)
    changed = True
    while changed:
        changed = False
        for r in ctx.relations:
            vs = set(r.variables())
            if vs & shared and (vs & zs or vs - shared - set(ctx.y)):
                bad = vs & shared
                shared -= bad
                changed = True
    return shared


class ProductRingContext:
    """Coordinate ring of X x X (absolute) or X x_Y X (relative)."""

    def __init__(self, base: RingContext, mode: str = "absolute"):
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        self.base = base
        self.mode = mode
        shared = set()
        if mode == "relative":
            shared = set(base.y) | _shared_aux(base)
        self.shared = shared
        self.map1: dict[str, str] = {}
        self.map2: dict[str, str] = {}
        for v in base.ring.names:
            if v in shared:
                self.map1[v] = self.map2[v] = v
            else:
                self.map1[v] = f"{v}_1"
                self.map2[v] = f"{v}_2"
        doubled = lambda vs: tuple(x for v in vs for x in (self.map1[v], self.map2[v]) if v not in shared)
        z = tuple(self.map1[v] for v in base.z) + tuple(self.map2[v] for v in base.z)
        y = tuple(v for v in base.y if v in shared) + tuple(
            x for v in base.y if v not in shared for x in (self.map1[v], self.map2[v])
        )
        aux = tuple(v for v in base.aux if v in shared) + doubled(base.aux)
        names = z + y + aux
        if len(set(names)) != len(names):
            raise ValueError("product variable names clash with base names")
        tmp = RingContext(z, y, aux)
        rels: list[Poly] = []
        self.rel1: list[int] = []
        self.rel2: list[int] = []
        for r in base.relations:
            a = self.pi1(r, tmp.ring)
            b = self.pi2(r, tmp.ring)
            if a not in rels:
                rels.append(a)
            self.rel1.append(rels.index(a))
            if b not in rels:
                rels.append(b)
            self.rel2.append(rels.index(b))
        self.context = RingContext(z, y, aux, tuple(rels), base.irreducible)
        self.ring = self.context.ring
        # coordinates whose differences generate the diagonal ideal
        self.diff_vars = [v for v in base.ring.names if v not in shared and (mode == "absolute" or v not in base.y)]

    def pi1(self, h: Poly, ring=None) -> Poly:
        ring = ring or self.ring
        return _rename(h, self.map1, ring)

    def pi2(self, h: Poly, ring=None) -> Poly:
        ring = ring or self.ring
        return _rename(h, self.map2, ring)

    def difference(self, v: str) -> Poly:
        return self.ring.var(self.map1[v]) - self.ring.var(self.map2[v])

    def pair_point(self, pt1: Mapping, pt2: Mapping) -> dict:
        """Product-ring point over (pt1, pt2); shared coordinates must agree."""
        out = {}
        for v in self.base.ring.names:
            a = to_q(pt1.get(v, 0))
            b = to_q(pt2.get(v, 0))
            if v in self.shared:
                if a != b:
                    raise ValueError(f"shared coordinate {v} differs between the two points")
                out[v] = a
            else:
                out[self.map1[v]] = a
                out[self.map2[v]] = b
        return out

    def __repr__(self):
        return f"ProductRingContext({self.mode}, {self.ring.names})"


def _rename(h: Poly, mapping: dict, ring) -> Poly:
    src = h.ring.names
    idx = [ring.index[mapping[n]] for n in src]
    terms = {}
    for e, c in h.terms.items():
        ne = [0] * ring.nvars
        for i, k in enumerate(e):
            if k:
                ne[idx[i]] += k
        ne = tuple(ne)
        terms[ne] = terms.get(ne, 0) + c
    return Poly(ring, {e: c for e, c in terms.items() if c})


def double_element(h: Sequence[Poly] | Poly, prod: ProductRingContext) -> list[Poly]:
    """(h o pi1, h o pi2) as a 2p-vector."""
    vec = [h] if isinstance(h, Poly) else list(h)
    return [prod.pi1(x) for x in vec] + [prod.pi2(x) for x in vec]


@dataclass
class DoublePresentation:
    """Generators of M_D over the product ring, tagged with the basis used."""

    product: ProductRingContext
    basis: str
    module: ModulePresentation
    labels: list = field(default_factory=list)
    base_count: int = 0

    @property
    def rank(self) -> int:
        return self.module.p

    def columns(self) -> list[list[Poly]]:
        return self.module.columns()


def double_module(M: ModulePresentation, mode: str = "relative", basis: str = "B", prod: ProductRingContext | None = None) -> DoublePresentation:
    if basis not in BASES:
        raise ValueError(f"basis must be one of {BASES}")
    prod = prod or ProductRingContext(M.context, mode)
    p = M.p
    zero = prod.ring.zero
    cols: list[list[Poly]] = []
    labels: list[str] = []
    gens = M.columns()
    for j, h in enumerate(gens):
        cols.append(double_element(h, prod))
        labels.append(f"(h{j + 1})_D")
    for v in prod.diff_vars:
        d = prod.difference(v)
        for j, h in enumerate(gens):
            if basis == "B":
                cols.append([zero] * p + [d * prod.pi2(x) for x in h])
                labels.append(f"(0,({v}_1-{v}_2)*h{j + 1}_2)")
            elif basis == "B'":
                cols.append([d * prod.pi1(x) for x in h] + [zero] * p)
                labels.append(f"(({v}_1-{v}_2)*h{j + 1}_1,0)")
            else:
                vv = M.context.ring.var(v)
                cols.append(double_element([vv * x for x in h], prod))
                labels.append(f"({v}*h{j + 1})_D")
    mod = ModulePresentation(prod.context, PolyMatrix.from_columns(prod.ring, cols, 2 * p))
    return DoublePresentation(prod, basis, mod, labels, len(gens))


def diagonal_ideal(prod: ProductRingContext) -> Ideal:
    return Ideal(prod.context, [prod.difference(v) for v in prod.diff_vars])


def offdiagonal_block_rank(
    M: ModulePresentation,
    pt1: Mapping,
    pt2: Mapping,
    mode: str = "absolute",
    allow_diagonal: bool = False,
) -> tuple[int, int, int]:
    """(rank M(pt1), rank M(pt2), rank M_D(pt1, pt2)) using basis B."""
    f1 = check_point(M.context, pt1)
    f2 = check_point(M.context, pt2)
    if f1 == f2 and not allow_diagonal:
        raise ValueError("points coincide; pass allow_diagonal=True for the diagonal mode")
    prod = ProductRingContext(M.context, mode)
    D = double_module(M, mode, "B", prod)
    pp = prod.pair_point(f1, f2)
    r1 = rank_q(M.matrix.evaluate(f1)) if M.r else 0
    r2 = rank_q(M.matrix.evaluate(f2)) if M.r else 0
    rd = rank_q(D.module.matrix.evaluate(pp)) if D.module.r else 0
    return r1, r2, rd


def divided_differences(b: Poly, prod: ProductRingContext) -> dict[str, Poly]:
    """Polys D_v with b o pi1 - b o pi2 = sum_v (v_1 - v_2) * D_v over the difference variables."""
    R = prod.ring
    base = b.ring
    names = base.names
    dvars = set(prod.diff_vars)
    out = {v: R.zero for v in prod.diff_vars}
    idx1 = [R.index[prod.map1[n]] for n in names]
    idx2 = [R.index[prod.map2[n]] for n in names]
    for e, c in b.terms.items():
        for i, n in enumerate(names):
            a = e[i]
            if not a or n not in dvars:
                continue
            # prefix in second copy, suffix in first copy, middle telescoped
            fixed = [0] * R.nvars
            for k in range(i):
                if e[k]:
                    fixed[idx2[k]] += e[k]
            for k in range(i + 1, len(names)):
                if e[k]:
                    fixed[idx1[k]] += e[k]
            terms = {}
            for j in range(a):
                ex = list(fixed)
                ex[idx1[i]] += j
                ex[idx2[i]] += a - 1 - j
                terms[tuple(ex)] = c
            out[n] = out[n] + Poly(R, terms)
    return out


@dataclass
class DoubledCertificate:
    """unit * h_D = sum coeffs[k] * gens[k] + sum relation cofactors (product ring)."""

    unit: Poly
    coefficients: list
    relation_terms: list  # (product relation index, component, cofactor)


def double_local_certificate(
    prod: ProductRingContext,
    D: DoublePresentation,
    unit: Poly,
    cofactors: Sequence[Poly],
    relation_terms: Sequence[tuple[int, int, Poly]],
) -> DoubledCertificate:
    """Lift U h = sum b_j g_j + rho (base ring) to a basis-B certificate for h_D.

    Coefficient of (g_j)_D is U_2 b_j_1, of (0, (v_1 - v_2) g_j_2) it is
    D_v(U) b_j_2 - U_2 D_v(b_j); the relation part is U_2 rho_1 on top and
    U_1 rho_2 below.
    """
    if D.basis != "B":
        raise ValueError("certificate lifting is defined for basis B")
    r = D.base_count
    p = D.rank // 2
    U1 = prod.pi1(unit)
    U2 = prod.pi2(unit)
    dU = divided_differences(unit, prod)
    coeffs = [U2 * prod.pi1(b) for b in cofactors]
    dbs = [divided_differences(b, prod) for b in cofactors]
    for v in prod.diff_vars:
        for j in range(r):
            coeffs.append(dU[v] * prod.pi2(cofactors[j]) - U2 * dbs[j][v])
    rel = []
    for k, c, cof in relation_terms:
        rel.append((prod.rel1[k], c, U2 * prod.pi1(cof)))
        rel.append((prod.rel2[k], p + c, U1 * prod.pi2(cof)))
    return DoubledCertificate(U1 * U2, coeffs, rel)
