"""Buchberger's algorithm for ideals and for submodules of free modules.

Module elements are lists of ``Poly`` of a fixed length ``rank``; ideals are
handled as rank-1 modules but accept and return plain ``Poly`` values.
Modules use position-over-term with component 0 the most significant.

Every basis element can carry its cofactors with respect to the input
generators, so membership answers come with explicit certificates.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from itertools import count
from typing import Sequence

from gmpy2 import mpq

from .exactalg.poly import Poly, PolyRing, RingMismatch, to_q

__all__ = [
    "MonomialOrder",
    "GroebnerBasis",
    "Membership",
    "LocalMembership",
    "groebner_basis",
    "normal_form",
    "submodule_membership",
    "ideal_membership",
    "local_membership",
    "eliminate",
    "radical_membership",
    "is_groebner",
]


@dataclass(frozen=True)
class MonomialOrder:
    """``degrevlex``, ``lex`` or ``elim`` (block order, ``front`` variables eliminated)."""

    kind: str = "degrevlex"
    front: tuple = ()

    def __post_init__(self):
        if self.kind not in ("degrevlex", "lex", "elim"):
            raise ValueError(f"unknown monomial order {self.kind!r}")
        if self.kind == "elim" and not self.front:
            raise ValueError("elimination order needs front variables")

    def key_function(self, ring: PolyRing):
        """Integer-tuple key: larger tuple means larger monomial."""
        if self.kind == "degrevlex":
            return lambda e: (sum(e),) + tuple(-x for x in reversed(e))
        if self.kind == "lex":
            return tuple
        for v in self.front:
            if v not in ring.index:
                raise KeyError(f"unknown variable {v!r}")
        fi = [ring.index[v] for v in ring.names if v in self.front]
        ri = [i for i in range(ring.nvars) if i not in fi]

        def key(e):
            a = [e[i] for i in fi]
            b = [e[i] for i in ri]
            return (sum(a),) + tuple(-x for x in reversed(a)) + (sum(b),) + tuple(-x for x in reversed(b))

        return key


DEGREVLEX = MonomialOrder()


def _divides(a: tuple, b: tuple) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _lcm(a: tuple, b: tuple) -> tuple:
    return tuple(max(x, y) for x, y in zip(a, b))


def _sub(a: tuple, b: tuple) -> tuple:
    return tuple(x - y for x, y in zip(a, b))


def _add(a: tuple, b: tuple) -> tuple:
    return tuple(x + y for x, y in zip(a, b))


def _coprime(a: tuple, b: tuple) -> bool:
    return all(not (x and y) for x, y in zip(a, b))


# sparse polynomial dicts {exp: coeff} used for cofactors
def _pd_addmul(dst: dict, src: dict, c, m: tuple, p: int):
    for e, v in src.items():
        ne = _add(e, m)
        w = dst.get(ne, 0) + c * v
        if p:
            w %= p
        if w:
            dst[ne] = w
        else:
            dst.pop(ne, None)


class _Elem:
    __slots__ = ("terms", "lt", "lc", "tail", "cof")

    def __init__(self, terms: dict, key, cof):
        self.terms = terms
        self.lt = max(terms, key=key)
        self.lc = terms[self.lt]
        self.tail = [(c, e, v) for (c, e), v in terms.items() if (c, e) != self.lt]
        self.cof = cof


class _Engine:
    def __init__(self, ring: PolyRing, rank: int, order: MonomialOrder, modulus: int, track: bool, ninputs: int):
        self.ring = ring
        self.rank = rank
        self.order = order
        self.p = modulus
        self.track = track
        self.ninputs = ninputs
        tk = order.key_function(ring)
        self.tkey = tk
        self.key = lambda ce: (-ce[0],) + tk(ce[1])
        self.nkey = lambda ce: tuple(-x for x in ((-ce[0],) + tk(ce[1])))

    def norm(self, x):
        return x % self.p if self.p else x

    def inv(self, x):
        return pow(int(x), -1, self.p) if self.p else 1 / x

    def make(self, terms: dict, cof) -> _Elem | None:
        if not terms:
            return None
        el = _Elem(terms, self.key, cof)
        if el.lc != 1:
            ic = self.inv(el.lc)
            el.terms = {k: self.norm(v * ic) for k, v in terms.items()}
            el.lc = 1
            el.tail = [(c, e, v) for (c, e), v in el.terms.items() if (c, e) != el.lt]
            if cof is not None:
                el.cof = {j: {e: self.norm(v * ic) for e, v in d.items()} for j, d in cof.items()}
        return el

    def reduce(self, terms: dict, basis: list[_Elem], full: bool = True):
        """Return (remainder terms, quotients {basis index: polydict})."""
        work = dict(terms)
        heap = [(self.nkey(k), k) for k in work]
        heapq.heapify(heap)
        rem: dict = {}
        quo: dict = {}
        bycomp: dict = {}
        for idx, g in enumerate(basis):
            bycomp.setdefault(g.lt[0], []).append(idx)
        p = self.p
        while heap:
            _, k = heapq.heappop(heap)
            c = work.pop(k, None)
            if c is None:
                continue
            comp, e = k
            red = None
            for idx in bycomp.get(comp, ()):
                if _divides(basis[idx].lt[1], e):
                    red = idx
                    break
            if red is None:
                rem[k] = c
                if not full:
                    rem.update(work)
                    return rem, quo
                continue
            g = basis[red]
            m = _sub(e, g.lt[1])
            if self.track:
                q = quo.setdefault(red, {})
                w = q.get(m, 0) + c
                if p:
                    w %= p
                if w:
                    q[m] = w
                else:
                    q.pop(m, None)
            for gc, ge, gv in g.tail:
                nk = (gc, _add(ge, m))
                old = work.get(nk)
                if old is None:
                    w = -c * gv
                    if p:
                        w %= p
                    if w:
                        work[nk] = w
                        heapq.heappush(heap, (self.nkey(nk), nk))
                else:
                    w = old - c * gv
                    if p:
                        w %= p
                    if w:
                        work[nk] = w
                    else:
                        del work[nk]
        return rem, quo

    def combine_cof(self, base: dict | None, quo: dict, basis: list[_Elem], sign=-1) -> dict:
        out = {j: dict(d) for j, d in (base or {}).items()}
        for idx, q in quo.items():
            for m, c in q.items():
                for j, d in basis[idx].cof.items():
                    _pd_addmul(out.setdefault(j, {}), d, sign * c, m, self.p)
        return {j: d for j, d in out.items() if d}

    def spoly(self, a: _Elem, b: _Elem):
        L = _lcm(a.lt[1], b.lt[1])
        ma = _sub(L, a.lt[1])
        mb = _sub(L, b.lt[1])
        terms: dict = {}
        p = self.p
        for (c, e), v in a.terms.items():
            terms[(c, _add(e, ma))] = v
        for (c, e), v in b.terms.items():
            k = (c, _add(e, mb))
            w = terms.get(k, 0) - v
            if p:
                w %= p
            if w:
                terms[k] = w
            else:
                terms.pop(k, None)
        cof = None
        if self.track:
            cof = {}
            for j, d in a.cof.items():
                _pd_addmul(cof.setdefault(j, {}), d, 1, ma, p)
            for j, d in b.cof.items():
                _pd_addmul(cof.setdefault(j, {}), d, -1, mb, p)
        return terms, cof

    def buchberger(self, elems: list[_Elem]) -> list[_Elem]:
        ideal = self.rank == 1
        allel: list[_Elem] = []
        G: list[int] = []
        B: list = []  # heap of (key, tiebreak, i, j)
        pairset: set = set()
        tie = count()

        def lcm_of(i, j):
            return (allel[i].lt[0], _lcm(allel[i].lt[1], allel[j].lt[1]))

        def update(h: int):
            nonlocal G, B
            lh = allel[h].lt
            C = [g for g in G if allel[g].lt[0] == lh[0]]
            D: list[int] = []
            while C:
                g1 = C.pop()
                l1 = _lcm(lh[1], allel[g1].lt[1])
                if ideal and _coprime(lh[1], allel[g1].lt[1]):
                    D.append(g1)
                    continue
                if not any(_divides(_lcm(lh[1], allel[g2].lt[1]), l1) for g2 in C + D):
                    D.append(g1)
            E = [g for g in D if not (ideal and _coprime(lh[1], allel[g].lt[1]))]
            # Gebauer-Moeller chain criterion on old pairs
            newB = []
            for item in B:
                _, _, i, j = item
                if (i, j) not in pairset:
                    continue
                li = allel[i].lt
                if li[0] == lh[0]:
                    L = _lcm(li[1], allel[j].lt[1])
                    if (
                        _divides(lh[1], L)
                        and _lcm(li[1], lh[1]) != L
                        and _lcm(lh[1], allel[j].lt[1]) != L
                    ):
                        pairset.discard((i, j))
                        continue
                newB.append(item)
            for g in E:
                pair = (g, h)
                pairset.add(pair)
                c, L = lcm_of(g, h)
                newB.append((self.nkey((c, L)), next(tie), g, h))
            heapq.heapify(newB)
            B = newB
            G = [g for g in G if not (allel[g].lt[0] == lh[0] and _divides(lh[1], allel[g].lt[1]))] + [h]

        for el in elems:
            allel.append(el)
            update(len(allel) - 1)
        while B:
            _, _, i, j = heapq.heappop(B)
            if (i, j) not in pairset:
                continue
            pairset.discard((i, j))
            terms, cof = self.spoly(allel[i], allel[j])
            basis = [allel[g] for g in G]
            rem, quo = self.reduce(terms, basis)
            if not rem:
                continue
            if self.track:
                cof = self.combine_cof(cof, quo, basis)
            el = self.make(rem, cof)
            allel.append(el)
            update(len(allel) - 1)
        return [allel[g] for g in G]

    def interreduce(self, basis: list[_Elem]) -> list[_Elem]:
        # drop elements whose leading term is divisible by another's
        basis = sorted(basis, key=lambda g: self.key(g.lt))
        keep: list[_Elem] = []
        for g in basis:
            if not any(h.lt[0] == g.lt[0] and _divides(h.lt[1], g.lt[1]) for h in keep):
                keep.append(g)
        out = []
        for i, g in enumerate(keep):
            others = keep[:i] + keep[i + 1 :]
            rem, quo = self.reduce({k: v for k, v in g.terms.items() if k != g.lt}, others)
            terms = dict(rem)
            terms[g.lt] = g.lc
            cof = None
            if self.track:
                cof = self.combine_cof(g.cof, quo, others)
            out.append(self.make(terms, cof))
        # reductions used pre-reduction cofactors of others, which are still valid
        out.sort(key=lambda g: self.key(g.lt), reverse=True)
        return out


class GroebnerBasis:
    """Reduced Groebner basis of a submodule of ``ring^rank``.

    ``inputs`` are the generators it was computed from; when ``tracked``,
    ``cofactors[i][j]`` is the Poly multiplying input ``j`` in basis
    element ``i``.
    """

    def __init__(self, engine: _Engine, elems: list[_Elem], inputs: list, is_ideal: bool):
        self._engine = engine
        self._elems = elems
        self.ring = engine.ring
        self.rank = engine.rank
        self.order = engine.order
        self.modulus = engine.p
        self.tracked = engine.track
        self.inputs = inputs
        self.is_ideal = is_ideal
        self.generators = [self._out(_to_vec(engine, g.terms)) for g in elems]
        if engine.track:
            self.cofactors = [
                [_pd_to_poly(self.ring, g.cof.get(j, {})) for j in range(len(inputs))] for g in elems
            ]
        else:
            self.cofactors = None

    def _out(self, vec):
        return vec[0] if self.is_ideal else vec

    def __len__(self):
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)

    def leading_terms(self) -> list[tuple[int, tuple]]:
        return [g.lt for g in self._elems]

    def is_unit(self) -> bool:
        return self.is_ideal and any(not any(g.lt[1]) for g in self._elems)

    def reduce(self, f, track: bool = False):
        """Remainder of ``f``; with ``track`` also cofactors over ``inputs``."""
        eng = self._engine
        if track and not self.tracked:
            raise ValueError("basis was computed without cofactor tracking")
        terms = _to_terms(eng, f, self.is_ideal)
        old = eng.track
        eng.track = track
        try:
            rem, quo = eng.reduce(terms, self._elems)
        finally:
            eng.track = old
        r = self._out(_to_vec(eng, rem))
        if not track:
            return r
        cof = eng.combine_cof({}, quo, self._elems, sign=1)
        return r, [_pd_to_poly(self.ring, cof.get(j, {})) for j in range(len(self.inputs))]

    def contains(self, f) -> bool:
        r = self.reduce(f)
        return all(x.is_zero() for x in r) if isinstance(r, list) else r.is_zero()


def _pd_to_poly(ring: PolyRing, d: dict) -> Poly:
    return Poly(ring, {e: mpq(v) for e, v in d.items() if v})


def _to_terms(eng: _Engine, f, is_ideal: bool) -> dict:
    vec = [f] if is_ideal else list(f)
    if len(vec) != eng.rank:
        raise RingMismatch(f"vector of length {len(vec)} in a rank-{eng.rank} module")
    terms = {}
    for c, x in enumerate(vec):
        if not isinstance(x, Poly):
            x = eng.ring.const(x)
        if x.ring != eng.ring:
            raise RingMismatch(f"{x.ring!r} vs {eng.ring!r}")
        for e, v in x.terms.items():
            if eng.p:
                v = int(v.numerator) * pow(int(v.denominator), -1, eng.p) % eng.p
                if not v:
                    continue
            terms[(c, e)] = v
    return terms


def _to_vec(eng: _Engine, terms: dict) -> list[Poly]:
    comps: list[dict] = [{} for _ in range(eng.rank)]
    for (c, e), v in terms.items():
        comps[c][e] = mpq(v)
    return [Poly(eng.ring, d) for d in comps]


def _infer(gens, ring, rank):
    is_ideal = True
    for g in gens:
        if isinstance(g, Poly):
            ring = ring or g.ring
        else:
            is_ideal = False
            rank = rank if rank is not None else len(g)
            for x in g:
                if isinstance(x, Poly):
                    ring = ring or x.ring
    if ring is None:
        raise ValueError("cannot infer the ring from an empty generator list; pass ring=")
    if is_ideal and rank not in (None, 1):
        is_ideal = False
    return ring, (1 if rank is None else rank), is_ideal


def groebner_basis(
    gens: Sequence,
    order: MonomialOrder = DEGREVLEX,
    *,
    ring: PolyRing | None = None,
    rank: int | None = None,
    track: bool = False,
    modulus: int = 0,
) -> GroebnerBasis:
    """Reduced basis of the ideal (Poly generators) or submodule (vector generators)."""
    gens = list(gens)
    ring, rank, is_ideal = _infer(gens, ring, rank)
    if is_ideal and gens and not all(isinstance(g, Poly) for g in gens):
        raise RingMismatch("mixed ideal and module generators")
    eng = _Engine(ring, rank, order, modulus, track, len(gens))
    elems = []
    for j, g in enumerate(gens):
        terms = _to_terms(eng, g, is_ideal)
        if terms:
            cof = {j: {ring.zero_exp: 1}} if track else None
            elems.append(eng.make(terms, cof))
    elems.sort(key=lambda g: eng.key(g.lt))
    basis = eng.interreduce(eng.buchberger(elems)) if elems else []
    return GroebnerBasis(eng, basis, gens, is_ideal)


def normal_form(f, gb: GroebnerBasis):
    return gb.reduce(f)


def is_groebner(gb: GroebnerBasis) -> bool:
    """Check directly that every S-pair reduces to zero."""
    eng = gb._engine
    el = gb._elems
    old = eng.track
    eng.track = False
    try:
        for i in range(len(el)):
            for j in range(i + 1, len(el)):
                if el[i].lt[0] != el[j].lt[0]:
                    continue
                terms, _ = eng.spoly(el[i], el[j])
                rem, _ = eng.reduce(terms, el)
                if rem:
                    return False
    finally:
        eng.track = old
    return True


@dataclass
class Membership:
    """Outcome of a membership query; ``v == sum cofactors[j]*gens[j] + sum relation_cofactors``."""

    member: bool
    cofactors: list = field(default_factory=list)
    relation_terms: list = field(default_factory=list)  # (relation index, component, cofactor Poly)

    def __bool__(self):
        return self.member


def _relation_inputs(relations, rank, ring, is_ideal):
    inputs = []
    tags = []
    for ri, r in enumerate(relations):
        r = ring.convert(r)
        for c in range(rank):
            if is_ideal:
                inputs.append(r)
            else:
                v = [ring.zero] * rank
                v[c] = r
                inputs.append(v)
            tags.append((ri, c))
    return inputs, tags


def submodule_membership(v, gens: Sequence, relations: Sequence[Poly] = (), *, ring=None, rank=None) -> Membership:
    """Plain membership of ``v`` in the span of ``gens`` modulo ``relations`` (times every basis vector)."""
    gens = list(gens)
    ring, rank, is_ideal = _infer(gens + [v], ring, rank)
    rel_in, tags = _relation_inputs(relations, rank, ring, is_ideal)
    gb = groebner_basis(gens + rel_in, ring=ring, rank=rank, track=True)
    rem, cof = gb.reduce(v, track=True)
    zero = rem.is_zero() if is_ideal else all(x.is_zero() for x in rem)
    if not zero:
        return Membership(False)
    ng = len(gens)
    rel_terms = [(tags[k][0], tags[k][1], cof[ng + k]) for k in range(len(rel_in)) if cof[ng + k]]
    return Membership(True, cof[:ng], rel_terms)


def ideal_membership(f: Poly, gens: Sequence[Poly], relations: Sequence[Poly] = ()) -> Membership:
    return submodule_membership(f, list(gens), relations, ring=f.ring, rank=1)


@dataclass
class LocalMembership:
    """``unit * v == sum cofactors[j]*gens[j] + relation terms`` with ``unit(point) != 0``."""

    member: bool
    unit: Poly | None = None
    cofactors: list = field(default_factory=list)
    relation_terms: list = field(default_factory=list)
    colon: list = field(default_factory=list)

    def __bool__(self):
        return self.member


def local_membership(
    v, gens: Sequence, relations: Sequence[Poly], point: dict, *, ring=None, rank=None
) -> LocalMembership:
    """Membership of ``v`` in the localization of span(gens) + relations at ``point``.

    Computes the colon (span + relations : v) from a position-over-term basis
    with an extra lowest-priority component, and looks for a colon element
    not vanishing at ``point``.
    """
    gens = list(gens)
    ring, rank, is_ideal = _infer(gens + [v], ring, rank)

    def vec(x):
        return [x] if is_ideal else list(x)

    rel_in, tags = _relation_inputs(relations, rank, ring, False)
    ext = [vec(g) + [ring.zero] for g in gens] + [r + [ring.zero] for r in rel_in]
    ext.append(vec(v) + [ring.one])
    gb = groebner_basis(ext, ring=ring, rank=rank + 1, track=True)
    colon = []
    best = None
    for g, cof in zip(gb.generators, gb.cofactors):
        if all(x.is_zero() for x in g[:rank]):
            u = g[rank]
            colon.append(u)
            if best is None and u.evaluate(point) != 0:
                best = (u, cof)
    if best is None:
        return LocalMembership(False, colon=colon)
    u, cof = best
    # g = sum cof_j * ext_j, first rank comps zero, last comp u = cof[-1]
    ng = len(gens)
    # u*v = -sum cof_j gens_j - relation terms
    rel_terms = [
        (tags[k][0], tags[k][1], -cof[ng + k]) for k in range(len(rel_in)) if cof[ng + k]
    ]
    return LocalMembership(True, u, [-c for c in cof[:ng]], rel_terms, colon)


def eliminate(gens: Sequence[Poly], vars: Sequence[str]) -> list[Poly]:
    """Generators of the elimination ideal, expressed in the remaining variables."""
    gens = [g for g in gens]
    if not gens:
        return []
    ring = gens[0].ring
    vars = tuple(vars)
    for v in vars:
        if v not in ring.index:
            raise KeyError(f"unknown variable {v!r}")
    gb = groebner_basis(gens, MonomialOrder("elim", vars), ring=ring)
    sub = PolyRing([n for n in ring.names if n not in vars])
    out = []
    for g in gb.generators:
        if not any(n in vars for n in g.variables()):
            out.append(sub.convert(g))
    return out


def _fresh(ring: PolyRing, base: str) -> str:
    name = base
    k = 0
    while name in ring.index:
        k += 1
        name = f"{base}{k}"
    return name


def radical_membership(f: Poly, ideal: Sequence[Poly]) -> bool:
    """True iff ``f`` vanishes on V(ideal) over an algebraically closed field."""
    ring = f.ring
    w = _fresh(ring, "w_rad")
    big = ring.extend(w)
    gens = [big.convert(g) for g in ideal] + [big.one - big.var(w) * big.convert(f)]
    return groebner_basis(gens, ring=big).is_unit()
