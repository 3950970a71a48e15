"""Truncated arcs on varieties and deterministic arc sampling."""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from gmpy2 import mpq

from ..exactalg.matrix import rank_q
from ..exactalg.poly import Poly, PolyRing, substitute, to_q
from ..exactalg.series import TruncSeries
from ..modulealg import RingContext

__all__ = [
    "CurveArc",
    "UncertifiedArc",
    "NoArcStrategy",
    "Parametrization",
    "sample_arcs",
    "sample_pair_arcs",
    "arc_from_polys",
]

ARC_VAR = "s"


class UncertifiedArc(ValueError):
    """A relation does not vanish along the arc to the truncation order."""


class NoArcStrategy(ValueError):
    pass


def _series(coeffs, N: int) -> TruncSeries:
    return TruncSeries(coeffs, N, ARC_VAR)


@dataclass
class CurveArc:
    """Map s -> X given by one truncated series per ring variable."""

    context: RingContext
    series: dict
    N: int
    provenance: dict = field(default_factory=lambda: {"kind": "user"})
    allow_constant: bool = False

    def __post_init__(self):
        names = self.context.ring.names
        missing = [v for v in names if v not in self.series]
        if missing:
            raise UncertifiedArc(f"arc does not assign {missing}")
        self.series = {v: self.series[v].truncate(self.N) for v in names}
        for r in self.context.relations:
            res = self.compose(r)
            if not res.is_zero():
                raise UncertifiedArc(f"relation {r} has residual of valuation {res.valuation()} <= {self.N}")
        if not self.allow_constant and all(not any(s.coeffs[1:]) for s in self.series.values()):
            raise UncertifiedArc("constant arc")

    @property
    def center(self) -> dict:
        return {v: s.coeffs[0] for v, s in self.series.items()}

    def compose(self, p: Poly) -> TruncSeries:
        vals = {v: self.series[v] for v in p.ring.names if v in self.series}
        if not p.terms:
            return _series([], self.N)
        return substitute(p, vals)

    def compose_vector(self, vec: Sequence[Poly]) -> list[TruncSeries]:
        return [self.compose(x) for x in vec]

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "coordinates": {v: [[str(c), i] for i, c in enumerate(s.coeffs) if c] for v, s in self.series.items()},
            "provenance": self.provenance,
        }

    @classmethod
    def from_json(cls, ctx: RingContext, data: Mapping, allow_constant: bool = True) -> CurveArc:
        N = int(data["N"])
        ser = {}
        for v in ctx.ring.names:
            cs = [mpq(0)] * (N + 1)
            for c, i in data["coordinates"].get(v, []):
                if int(i) <= N:
                    cs[int(i)] += to_q(c)
            ser[v] = _series(cs, N)
        return cls(ctx, ser, N, dict(data.get("provenance", {"kind": "user"})), allow_constant)


def arc_from_polys(ctx: RingContext, coords: Mapping[str, str | Poly], N: int, kind: str = "user") -> CurveArc:
    """Arc whose coordinates are polynomials in ``s`` given as text or Polys."""
    S = PolyRing([ARC_VAR])
    ser = {}
    for v in ctx.ring.names:
        p = coords.get(v, "0")
        p = S.parse(p) if isinstance(p, str) else S.convert(p)
        cs = [mpq(0)] * (N + 1)
        for (k,), c in p.terms.items():
            if k <= N:
                cs[k] = c
        ser[v] = _series(cs, N)
    return CurveArc(ctx, ser, N, {"kind": kind})


@dataclass
class Parametrization:
    """Polynomial map from parameter space onto X, mapping each y to itself."""

    source: PolyRing
    images: dict  # target variable -> Poly over source
    center: dict  # parameter point mapping to the distinguished point

    @classmethod
    def parse(cls, ctx: RingContext, params: Sequence[str], images: Mapping[str, str], center: Mapping | None = None) -> Parametrization:
        src = PolyRing(params)
        imgs = {}
        for v in ctx.ring.names:
            if v in images:
                imgs[v] = src.parse(images[v]) if isinstance(images[v], str) else src.convert(images[v])
            elif v in src.index:
                imgs[v] = src.var(v)
            else:
                raise ValueError(f"parametrization misses coordinate {v!r}")
        ctr = {w: to_q((center or {}).get(w, 0)) for w in params}
        par = cls(src, imgs, ctr)
        par.validate(ctx)
        return par

    def validate(self, ctx: RingContext):
        for r in ctx.relations:
            if not substitute(r, self.images, self.source).is_zero():
                raise ValueError(f"parametrization does not satisfy relation {r}")

    def image_point(self) -> dict:
        return {v: p.evaluate(self.center) for v, p in self.images.items()}


def _random_series(rng: random.Random, c0, budget: int, N: int, zero_ok: bool = True) -> TruncSeries:
    cs = [mpq(0)] * (N + 1)
    cs[0] = to_q(c0)
    if zero_ok and rng.random() < 0.2:
        return _series(cs, N)
    val = rng.randint(1, 3)
    top = max(val, min(budget, N))
    for k in range(val, top + 1):
        c = rng.randint(-3, 3)
        if k == val and c == 0:
            c = rng.choice((-2, -1, 1, 2))
        cs[k] = mpq(c)
    return _series(cs, N)


_WEIGHT_CAP = {1: 8, 2: 6, 3: 5, 4: 3}
_TRIAL_VALUES = (1, -1, 2, -2, 3)


def _rational_roots(coeffs: dict) -> list:
    """Nonzero rational roots of sum coeffs[j] x^j."""
    lo, hi = min(coeffs), max(coeffs)
    if lo == hi:
        return []
    den = 1
    for q in coeffs.values():
        den = den * int(q.denominator) // math.gcd(den, int(q.denominator))
    a_lo, a_hi = abs(int(coeffs[lo] * den)), abs(int(coeffs[hi] * den))
    if max(a_lo, a_hi) > 10**6:
        return []

    def divisors(n):
        return [i for i in range(1, n + 1) if n % i == 0]

    out = []
    for p in divisors(a_lo):
        for q in divisors(a_hi):
            for x in (mpq(p, q), mpq(-p, q)):
                if x not in out and sum(c * x**j for j, c in coeffs.items()) == 0:
                    out.append(x)
    return out


def _initial_root(g: Poly, names: list):
    """A root of g with every coordinate nonzero, plus a coordinate with nonzero partial there."""
    R = g.ring
    for k in names:
        if g.degree(k) == 0:
            continue
        i = R.index[k]
        others = [v for v in names if v != k]
        dk = g.diff(k)
        for vals in itertools.product(_TRIAL_VALUES, repeat=len(others)):
            pt = dict(zip(others, map(mpq, vals)))
            coeffs: dict = {}
            for e, c in substitute(g, pt, R).terms.items():
                coeffs[e[i]] = coeffs.get(e[i], mpq(0)) + c
            coeffs = {j: c for j, c in coeffs.items() if c}
            if not coeffs:
                continue
            for x in _rational_roots(coeffs):
                full = {v: mpq(0) for v in R.names}
                full.update(pt)
                full[k] = x
                if dk.evaluate(full) != 0:
                    return {v: full[v] for v in names}, k
    return None


class _Sampler:
    def __init__(self, ctx: RingContext, center: dict, budget: int, N: int, param: Parametrization | None):
        self.ctx = ctx
        self.center = {v: to_q(center.get(v, 0)) for v in ctx.ring.names}
        self.budget = budget
        self.N = N
        self.param = param
        rels = list(ctx.relations)
        self.rels = rels
        self.linear_plan = self._linear_plan()
        self.hensel_plan = self._hensel_plan()
        self.weighted_plan = self._weighted_plan()

    # -- plans ------------------------------------------------------------
    def _assignments(self, ok):
        """Distinct variables v_k per relation, each appearing only in its relation."""
        rels = self.rels
        plans = []

        def rec(k, used, acc):
            if len(plans) >= 8:
                return
            if k == len(rels):
                plans.append(list(acc))
                return
            for v in rels[k].variables():
                if v in used:
                    continue
                if any(v in rels[j].variables() for j in range(len(rels)) if j != k):
                    continue
                if ok(rels[k], v):
                    rec(k + 1, used | {v}, acc + [v])

        rec(0, set(), [])
        return plans

    def _linear_plan(self):
        if not self.rels:
            return []
        return self._assignments(lambda r, v: r.degree(v) == 1)

    def _hensel_plan(self):
        if not self.rels:
            return []
        out = []
        for plan in self._assignments(lambda r, v: r.diff(v).evaluate(self.center) != 0):
            J = [[r.diff(v).evaluate(self.center) for v in plan] for r in self.rels]
            if rank_q(J) == len(plan):
                out.append(plan)
        return out

    def _weighted_plan(self):
        """Weights w and roots c of the w-initial form of a single relation.

        An arc z = center + s^w (c + u(s)) is then lifted by Hensel's lemma
        in one coordinate where the initial form has a nonzero partial at c.
        This reaches singular points such as the cusp vertex.
        """
        if len(self.rels) != 1:
            return []
        R = self.ctx.ring
        f = substitute(self.rels[0], {v: R.var(v) + self.center[v] for v in R.names}, R)
        if f.is_zero() or f.constant_coeff() != 0:
            return []
        names = f.variables()
        cap = _WEIGHT_CAP.get(len(names))
        if cap is None:
            return []
        idx = [R.index[v] for v in names]
        seen = set()
        plans = []
        for w in itertools.product(range(1, cap + 1), repeat=len(names)):
            if math.gcd(*w) != 1:
                continue
            deg = {e: sum(wi * e[i] for wi, i in zip(w, idx)) for e in f.terms}
            d = min(deg.values())
            init = frozenset(e for e in f.terms if deg[e] == d)
            if len(init) < 2 or init in seen:
                continue
            seen.add(init)
            g = Poly(R, {e: f.terms[e] for e in init})
            root = _initial_root(g, names)
            if root is not None:
                plans.append((dict(zip(names, w)), root[0], root[1], d))
            if len(plans) >= 8:
                break
        return plans

    def strategies(self, fixed: set) -> list[str]:
        s = []
        if self.param is not None and all(
            v in self.param.source.index and self.param.images[v] == self.param.source.var(v) for v in fixed
        ):
            s.append("parametrization")
        if not self.rels:
            s.append("ambient")
        if any(not (set(p) & fixed) for p in self.linear_plan):
            s.append("quotient")
        if any(not (set(p) & fixed) for p in self.hensel_plan):
            s.append("hensel")
        if self.weighted_plan and not (set(self.weighted_plan[0][0]) & fixed):
            s.append("weighted")
        return s

    # -- constructions -----------------------------------------------------
    def build(self, kind: str, rng: random.Random, fixed: dict) -> CurveArc | None:
        N = self.N
        names = self.ctx.ring.names
        if kind == "ambient":
            ser = {v: fixed[v] if v in fixed else _random_series(rng, self.center[v], self.budget, N) for v in names}
            return self._make(ser, {"kind": "polynomial"})
        if kind == "parametrization":
            par = self.param
            inner = {}
            for w in par.source.names:
                if w in fixed:
                    inner[w] = fixed[w]
                else:
                    inner[w] = _random_series(rng, par.center[w], self.budget, N)
            ser = {v: substitute(par.images[v], inner) if par.images[v].terms else _series([], N) for v in names}
            return self._make(ser, {"kind": "parametrization"})
        if kind == "quotient":
            plans = [p for p in self.linear_plan if not (set(p) & set(fixed))]
            plan = plans[rng.randrange(len(plans))]
            Nw = N + 12  # headroom for the precision lost in the division
            ser = {v: fixed[v] if v in fixed else _random_series(rng, self.center[v], self.budget, Nw) for v in names if v not in plan}
            for r, v in zip(self.rels, plan):
                i = r.ring.index[v]
                a = Poly(r.ring, {e[:i] + (0,) + e[i + 1 :]: c for e, c in r.terms.items() if e[i] == 1})
                b = Poly(r.ring, {e: c for e, c in r.terms.items() if e[i] == 0})
                A = substitute(a, ser) if a.terms else _series([], N)
                B = substitute(b, ser) if b.terms else _series([], N)
                va = A.valuation()
                if va is None:
                    return None
                vb = B.valuation()
                if vb is not None and vb < va:
                    return None
                q = -B.divide(A) if vb is not None else _series([], A.prec - va)
                if q.coeffs[0] != self.center[v]:
                    return None
                if q.prec < N:
                    return None
                ser[v] = q
            return self._make(ser, {"kind": "quotient", "solved": list(plan)})
        if kind == "hensel":
            plans = [p for p in self.hensel_plan if not (set(p) & set(fixed))]
            plan = plans[rng.randrange(len(plans))]
            ser = {v: fixed[v] if v in fixed else _random_series(rng, self.center[v], self.budget, N) for v in names if v not in plan}
            for v in plan:
                ser[v] = _series([self.center[v]], N)
            return self._hensel(ser, plan)
        if kind == "weighted":
            return self._weighted(rng, fixed)
        raise ValueError(kind)

    def _weighted(self, rng: random.Random, fixed: dict) -> CurveArc | None:
        N = self.N
        w, c, k, d = self.weighted_plan[rng.randrange(len(self.weighted_plan))]
        lam = mpq(rng.choice((1, -1, 2, -2, 3))) / rng.choice((1, 1, 2))
        c = {v: c[v] * lam ** w[v] for v in w}
        ser = {}
        for v in self.ctx.ring.names:
            if v in fixed:
                ser[v] = fixed[v]
            elif v not in w:
                ser[v] = _random_series(rng, self.center[v], self.budget, N)
            else:
                u = _random_series(rng, 0, self.budget, N).coeffs if v != k else [mpq(0)] * (N + 1)
                cs = [mpq(0)] * (N + 1)
                for j in range(N + 1 - w[v]):
                    cs[w[v] + j] = u[j]
                cs[w[v]] += c[v]
                cs[0] += self.center[v]
                ser[v] = _series(cs, N)
        rel = self.rels[0]
        R = self.ctx.ring
        f = substitute(rel, {v: R.var(v) + self.center[v] for v in R.names}, R)
        init = Poly(R, {e: q for e, q in f.terms.items() if sum(w[n] * e[R.index[n]] for n in w) == d})
        J0 = init.diff(k).evaluate({v: c.get(v, 0) for v in R.names})
        prov = {"kind": "weighted", "weights": dict(w), "solved": k}
        for _ in range(N + 2):
            res = substitute(rel, ser)
            m = res.valuation()
            if m is None:
                return self._make(ser, prov)
            pos = w[k] + m - d
            if m <= d or pos > N:
                return None
            cs = list(ser[k].coeffs)
            cs[pos] -= res.coeffs[m] / J0
            ser[k] = _series(cs, N)
        return None

    def _hensel(self, ser: dict, plan: list) -> CurveArc | None:
        from ..exactalg.linsolve import solve_sparse

        N = self.N
        rels = self.rels
        J0 = [[r.diff(v).evaluate(self.center) for v in plan] for r in rels]
        for _ in range(N + 2):
            res = [substitute(r, ser) for r in rels]
            if all(x.is_zero() for x in res):
                return self._make(ser, {"kind": "hensel", "solved": list(plan)})
            # x <- x - J0^+ R(x), coefficientwise
            for k in range(N + 1):
                rhs = [x.coeffs[k] for x in res]
                if not any(rhs):
                    continue
                sol = solve_sparse([{j: J0[i][j] for j in range(len(plan)) if J0[i][j]} for i in range(len(rels))], rhs, prefilter=False)
                if sol is None:
                    return None
                for j, v in enumerate(plan):
                    if sol.get(j):
                        cs = list(ser[v].coeffs)
                        cs[k] -= sol[j]
                        ser[v] = _series(cs, N)
                break
        return None

    def _make(self, ser: dict, prov: dict) -> CurveArc | None:
        try:
            return CurveArc(self.ctx, ser, self.N, prov)
        except UncertifiedArc:
            return None

    def sample(self, count: int, seed: int, fixed_fn=None) -> list[CurveArc]:
        rng = random.Random(seed)
        arcs: list[CurveArc] = []
        attempts = 0
        while len(arcs) < count and attempts < 8 * count + 16:
            attempts += 1
            fixed = fixed_fn(rng) if fixed_fn else {}
            strats = self.strategies(set(fixed))
            if not strats:
                break
            kind = strats[attempts % len(strats)]
            arc = self.build(kind, rng, fixed)
            if arc is not None:
                arcs.append(arc)
        return arcs


def sample_arcs(
    ctx: RingContext,
    count: int = 32,
    budget: int = 6,
    N: int = 50,
    *,
    seed: int = 0,
    center: Mapping | None = None,
    param: Parametrization | None = None,
    user_arcs: Sequence[CurveArc] = (),
) -> list[CurveArc]:
    """Certified arcs through ``center`` (default: origin), deterministic in ``seed``."""
    center = dict(center or {})
    arcs = list(user_arcs)
    smp = _Sampler(ctx, center, budget, N, param)
    if not smp.strategies(set()) and not arcs:
        raise NoArcStrategy("no arc strategy applies and no arcs were supplied")
    arcs.extend(smp.sample(max(0, count - len(arcs)), seed))
    return arcs[: max(count, len(user_arcs))]


def sample_pair_arcs(
    prod,
    count: int = 32,
    budget: int = 6,
    N: int = 50,
    *,
    seed: int = 0,
    center1: Mapping | None = None,
    center2: Mapping | None = None,
    param: Parametrization | None = None,
    user_arcs: Sequence[CurveArc] = (),
) -> list[CurveArc]:
    """Arcs on a product context built from pairs of base arcs.

    Shapes: independent pairs sharing the shared coordinates, the same arc
    on both sides, and an arc paired with the zero section over the same
    parameter values (when the zero section lies on X).
    """
    base = prod.base
    c1 = {v: to_q((center1 or {}).get(v, 0)) for v in base.ring.names}
    c2 = {v: to_q((center2 or {}).get(v, 0)) for v in base.ring.names}
    s1 = _Sampler(base, c1, budget, N, param)
    s2 = _Sampler(base, c2, budget, N, param)
    rng = random.Random(seed)
    shared = sorted(prod.shared)
    zero_section = c1 == c2 and all(c1[v] == 0 for v in base.z) and all(
        substitute(r, {v: r.ring.zero for v in base.z}, r.ring).is_zero() for r in base.relations
    )
    arcs = list(user_arcs)
    attempts = 0
    shapes = ["pair", "same", "zero2", "zero1"] if zero_section else ["pair", "same"]
    while len(arcs) < count and attempts < 8 * count + 16:
        attempts += 1
        shape = shapes[attempts % len(shapes)]
        strats = s1.strategies(set())
        if not strats:
            break
        a1 = s1.build(strats[rng.randrange(len(strats))], rng, {})
        if a1 is None:
            continue
        if shape == "same":
            if c1 != c2:
                continue
            a2 = a1
        elif shape in ("zero1", "zero2"):
            ser = {v: (a1.series[v] if v not in base.z else _series([], N)) for v in base.ring.names}
            try:
                a2 = CurveArc(base, ser, N, {"kind": "zero-section"}, allow_constant=True)
            except UncertifiedArc:
                continue
            if shape == "zero1":
                a1, a2 = a2, a1
        else:
            fixed = {v: a1.series[v] for v in shared}
            strats2 = s2.strategies(set(fixed))
            if not strats2:
                continue
            a2 = s2.build(strats2[rng.randrange(len(strats2))], rng, fixed)
            if a2 is None:
                continue
        ser = {}
        for v in base.ring.names:
            ser[prod.map1[v]] = a1.series[v]
            ser[prod.map2[v]] = a2.series[v]
        try:
            arcs.append(
                CurveArc(prod.context, ser, N, {"kind": "pair", "shape": shape, "first": a1.provenance, "second": a2.provenance})
            )
        except UncertifiedArc:
            continue
    if not arcs:
        raise NoArcStrategy("no pair-arc strategy applies and no arcs were supplied")
    return arcs
