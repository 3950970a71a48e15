"""Closure verdicts for ideals and modules, combining the engines.

Auto order for ideals: monomial, plain/local membership, arcs, dependence.
Modules add a minors reduction after direct arcs.  Every Holds or Fails
certificate is re-verified from its JSON form before it is returned.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from itertools import product as iproduct
from typing import Callable, Mapping, Sequence

from gmpy2 import mpq

from ..exactalg.matrix import PolyMatrix, minors
from ..exactalg.poly import Poly
from ..exactalg.series import TruncSeries
from ..groebner import ideal_membership, local_membership, submodule_membership
from ..modulealg import ModulePresentation, RingContext, check_point, generic_rank, minors_ideal, _not_vanishing_on_X
from .arcs import ARC_VAR, CurveArc, NoArcStrategy, Parametrization, sample_arcs
from .certificates import (
    arc_cert,
    dependence_cert,
    membership_cert,
    minor_refutation_cert,
    minors_cert,
    termwise_cert,
    verify_certificate,
)
from .dependence import DependenceCertificate, default_max_deg, dependence_search
from .newton import NotMonomial, dependence_from_weights, exponents_of, newton_weights, separating_weight
from .pullback import arc_pullback_membership

__all__ = [
    "Bounds",
    "ClosureVerdict",
    "StrictClosureUnsupported",
    "CertificateInvariantError",
    "closure_membership_ideal",
    "closure_membership_module",
    "IDEAL_STRATEGIES",
    "MODULE_STRATEGIES",
]

IDEAL_STRATEGIES = ("auto", "monomial", "membership", "arcs", "dependence")
MODULE_STRATEGIES = ("auto", "membership", "arcs", "minors")

HOLDS, FAILS, INCONCLUSIVE = "Holds", "Fails", "Inconclusive"


class StrictClosureUnsupported(ValueError):
    """Strict (dagger) closure has no computational characterization here."""


class CertificateInvariantError(RuntimeError):
    """An engine produced a certificate that does not re-verify."""


@dataclass
class Bounds:
    max_m: int = 4
    max_deg: int | None = None  # None: twice the largest input degree
    arc_count: int = 32
    degree_budget: int = 6
    truncation: int = 50
    seed: int = 0
    unit_degree: int = 0

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class ClosureVerdict:
    status: str
    engine: str
    certificate: dict | None = None
    reason: str = ""
    bounds: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "engine": self.engine,
            "certificate": self.certificate,
            "reason": self.reason,
            "bounds": self.bounds,
        }

    @property
    def holds(self) -> bool:
        return self.status == HOLDS

    @property
    def fails(self) -> bool:
        return self.status == FAILS


ArcSource = Callable[[], Sequence[CurveArc]]


class _ArcCache:
    """Lazily sampled arcs, shared between the stages of one test."""

    def __init__(self, ctx: RingContext, point: dict, bounds: Bounds, source=None, param=None, user_arcs=()):
        self.ctx = ctx
        self.point = point
        self.bounds = bounds
        self.source = source
        self.param = param
        self.user_arcs = tuple(user_arcs)
        self._arcs: list | None = None
        self.note = ""

    def get(self) -> list[CurveArc]:
        if self._arcs is None:
            try:
                if callable(self.source):
                    self._arcs = list(self.source())
                elif self.source is not None:
                    self._arcs = list(self.source)
                else:
                    b = self.bounds
                    self._arcs = sample_arcs(
                        self.ctx,
                        b.arc_count,
                        b.degree_budget,
                        b.truncation,
                        seed=b.seed,
                        center=self.point,
                        param=self.param,
                        user_arcs=self.user_arcs,
                    )
            except NoArcStrategy as e:
                self._arcs = []
                self.note = str(e)
            self._arcs = [a for a in self._arcs if a.center == self.point]
        return self._arcs


def _checked(verdict: ClosureVerdict) -> ClosureVerdict:
    if verdict.status in (HOLDS, FAILS):
        ok, msg = verify_certificate(verdict.certificate)
        if not ok:
            raise CertificateInvariantError(f"{verdict.engine} certificate does not re-verify: {msg}")
    return verdict


def _reject_strict(closure: str):
    if closure != "integral":
        raise StrictClosureUnsupported(
            "strict (dagger) integral closure has no computational characterization; only 'integral' is supported"
        )


def _bounds_json(bounds: Bounds, f_and_gens: Sequence[Poly]) -> dict:
    out = bounds.to_json()
    if out["max_deg"] is None:
        polys = [p for p in f_and_gens if p]
        out["max_deg"] = max(2 * max([p.total_degree() for p in polys] + [0]), 1)
    return out


# -- ideal engines -------------------------------------------------------------


def _monomial_engine(f: Poly, gens: list[Poly], ctx: RingContext, pt: dict, bounds: Bounds) -> ClosureVerdict | None:
    if ctx.relations or any(pt.values()):
        return None
    try:
        E = exponents_of(gens)
    except NotMonomial:
        return None
    ring = f.ring
    if f.is_zero():
        return ClosureVerdict(HOLDS, "monomial", membership_cert(ctx, pt, f, [[g] for g in gens], ring.one, [ring.zero] * len(gens), []))
    if not E:
        return None
    index = {next(iter(g.terms)): j for j, g in reversed(list(enumerate(gens))) if g}
    outside = []
    parts = []
    for a, c in f.sorted_terms():
        lam = newton_weights(a, E)
        if lam is None:
            outside.append(a)
            continue
        m, cg = dependence_from_weights(a, lam)
        idx = tuple(sorted(j for g, k in cg.items() for j in [index[g]] * k))
        prod_coeff = mpq(1)
        for j in idx:
            prod_coeff *= gens[j].leading_term()[1]
        term = ring.monomial(a, c)
        coeffs = [[] for _ in range(m)]
        slack = [m * a[i] - sum(k * g[i] for g, k in cg.items()) for i in range(ring.nvars)]
        coeffs[m - 1] = [(idx, ring.monomial(tuple(slack), -(c**m) / prod_coeff))]
        parts.append(DependenceCertificate(term, list(gens), m, ring.one, coeffs, [], [], dict(pt)))
    if not outside:
        if len(parts) == 1:
            return ClosureVerdict(HOLDS, "monomial", dependence_cert(ctx, pt, parts[0]))
        return ClosureVerdict(HOLDS, "monomial", termwise_cert(ctx, pt, f, gens, [dependence_cert(ctx, pt, p) for p in parts]))
    w = separating_weight(outside[0], E)
    lo = min(sum(x * y for x, y in zip(w, g)) for g in E)
    dmin = min(sum(x * y for x, y in zip(w, a)) for a in f.terms)
    low = [(a, c) for a, c in f.terms.items() if sum(x * y for x, y in zip(w, a)) == dmin]
    # a nonzero polynomial of degree < |S| in each variable does not vanish on all of S^n
    top = max(max(a) for a, _ in low) + 2
    cvec = next(cv for cv in iproduct(*[range(1, top)] * ring.nvars) if sum(c * _mono_val(a, cv) for a, c in low))
    N = max(bounds.truncation, lo)
    ser = {}
    for v, wi, ci in zip(ring.names, w, cvec):
        cs = [mpq(0)] * (N + 1)
        if wi <= N:
            cs[wi] = mpq(ci)
        ser[v] = TruncSeries(cs, N, ARC_VAR)
    arc = CurveArc(ctx, ser, N, {"kind": "monomial", "weight": list(w), "coefficients": list(cvec)})
    ell = [TruncSeries([1], N, ARC_VAR)]
    return ClosureVerdict(FAILS, "monomial", arc_cert(ctx, pt, f, [[g] for g in gens], arc, ell, lo))


def _mono_val(a, cvec):
    out = 1
    for e, c in zip(a, cvec):
        out *= c**e
    return out


def _membership_engine(h, gens, ctx: RingContext, pt: dict, is_ideal: bool) -> ClosureVerdict | None:
    ring = ctx.ring
    rels = list(ctx.relations)
    if is_ideal:
        mem = ideal_membership(h, gens, rels)
        gvec = [[g] for g in gens]
    else:
        mem = submodule_membership(h, gens, rels, ring=ring, rank=len(h))
        gvec = gens
    if mem:
        return ClosureVerdict(HOLDS, "membership", membership_cert(ctx, pt, h, gvec, ring.one, mem.cofactors, mem.relation_terms))
    rank = 1 if is_ideal else len(h)
    loc = local_membership(h, gens, rels, pt, ring=ring, rank=rank)
    if loc:
        return ClosureVerdict(
            HOLDS, "local-membership", membership_cert(ctx, pt, h, gvec, loc.unit, loc.cofactors, loc.relation_terms)
        )
    return None


def _arc_engine(h, gens, ctx, pt, arcs: _ArcCache, engine="arcs") -> tuple[ClosureVerdict | None, int]:
    gvec = [[g] for g in gens] if isinstance(h, Poly) else gens
    tried = 0
    for arc in arcs.get():
        tried += 1
        res = arc_pullback_membership(h, gvec, arc)
        if res.status != "nonmember":
            continue
        cert = arc_cert(ctx, pt, h, gvec, arc, res.functional, res.threshold)
        if verify_certificate(cert)[0]:
            return ClosureVerdict(FAILS, engine, cert), tried
    return None, tried


def _dependence_engine(f, gens, ctx, pt, bounds: Bounds) -> ClosureVerdict | None:
    cert = dependence_search(
        f,
        gens,
        list(ctx.relations),
        bounds.max_m,
        bounds.max_deg,
        point=pt if bounds.unit_degree else None,
        unit_degree=bounds.unit_degree,
    )
    if cert is None:
        return None
    return ClosureVerdict(HOLDS, "dependence", dependence_cert(ctx, pt, cert))


def closure_membership_ideal(
    f: Poly | str,
    gens: Sequence[Poly | str],
    ctx: RingContext,
    point: Mapping | None = None,
    strategy: str = "auto",
    bounds: Bounds | None = None,
    *,
    param: Parametrization | None = None,
    user_arcs: Sequence[CurveArc] = (),
    arcs: ArcSource | Sequence[CurveArc] | None = None,
    closure: str = "integral",
    _cache: _ArcCache | None = None,
) -> ClosureVerdict:
    """Is f in the integral closure of (gens) at ``point`` on X?"""
    _reject_strict(closure)
    if strategy not in IDEAL_STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {IDEAL_STRATEGIES}")
    bounds = bounds or Bounds()
    f = ctx.parse(f)
    gens = [ctx.parse(g) for g in gens]
    pt = check_point(ctx, point or {})
    bj = _bounds_json(bounds, [f] + gens)
    cache = _cache or _ArcCache(ctx, pt, bounds, arcs, param, user_arcs)
    run = lambda s: strategy in ("auto", s)

    if run("monomial"):
        v = _monomial_engine(f, gens, ctx, pt, bounds)
        if v is not None:
            v.bounds = bj
            return _checked(v)
    if run("membership"):
        v = _membership_engine(f, gens, ctx, pt, True)
        if v is not None:
            v.bounds = bj
            return _checked(v)
    tried = 0
    if run("arcs"):
        v, tried = _arc_engine(f, gens, ctx, pt, cache)
        if v is not None:
            v.bounds = bj
            return _checked(v)
    if run("dependence"):
        v = _dependence_engine(f, gens, ctx, pt, bounds)
        if v is not None:
            v.bounds = bj
            return _checked(v)
    reason = f"no certificate within bounds (strategy {strategy}; {tried} arcs tried"
    reason += f"; {cache.note})" if cache.note else ")"
    return ClosureVerdict(INCONCLUSIVE, strategy, None, reason, bj)


# -- modules -----------------------------------------------------------------------


def _radical_proof(d: Poly, ctx: RingContext, max_e: int = 8):
    rels = list(ctx.relations)
    for e in range(1, max_e + 1):
        mem = ideal_membership(d**e, [], rels)
        if mem:
            q = [ctx.ring.zero] * len(rels)
            for k, _, c in mem.relation_terms:
                q[k] = q[k] + c
            return e, [str(x) for x in q]
    return None


def _minors_engine(h, gens, ctx, pt, bounds: Bounds, cache: _ArcCache):
    ring = ctx.ring
    p = len(h)
    HM = ModulePresentation(ctx, PolyMatrix.from_columns(ring, [h] + gens, p))
    k = generic_rank(HM)
    if k == 0:
        return ClosureVerdict(INCONCLUSIVE, "minors", None, "generic rank of (h, M) is zero although h is nonzero")
    gcache: dict = {}
    witness = next((rs, cs) for rs, cs, d in minors(HM.matrix, k) if _not_vanishing_on_X(d, ctx, gcache))
    vanishing = []
    if k < min(p, len(gens) + 1):
        for rs, cs, d in minors(HM.matrix, k + 1):
            if d.is_zero():
                continue
            proof = _radical_proof(d, ctx)
            if proof is None:
                return ClosureVerdict(INCONCLUSIVE, "minors", None, "could not certify that the (k+1)-minors vanish on X")
            vanishing.append([list(rs), list(cs), proof[0], proof[1]])
    Jk = minors_ideal(ModulePresentation(ctx, PolyMatrix.from_columns(ring, gens, p)), k).gens if k <= len(gens) else []
    entries = []
    undecided = []
    for rs, cs, d in minors(HM.matrix, k, must_include_col=0):
        if d.is_zero():
            continue
        sub = closure_membership_ideal(d, Jk, ctx, pt, "auto", bounds, _cache=cache)
        if sub.fails:
            direct = _direct_from_minor(h, gens, ctx, pt, sub.certificate)
            if direct is not None:
                return direct
            return ClosureVerdict(FAILS, "minors", minor_refutation_cert(ctx, pt, h, gens, k, rs, cs, sub.certificate))
        if sub.holds:
            entries.append([list(rs), list(cs), sub.certificate])
        else:
            undecided.append(f"minor {list(rs)}x{list(cs)}: {sub.reason}")
    if undecided:
        return ClosureVerdict(INCONCLUSIVE, "minors", None, f"k={k}; undecided minors: " + "; ".join(undecided))
    return ClosureVerdict(HOLDS, "minors", minors_cert(ctx, pt, h, gens, k, witness, vanishing, entries))


def _direct_from_minor(h, gens, ctx, pt, cert: dict) -> ClosureVerdict | None:
    if cert.get("kind") != "arc":
        return None
    arc = CurveArc.from_json(ctx, cert["arc"])
    res = arc_pullback_membership(h, gens, arc)
    if res.status != "nonmember":
        return None
    direct = arc_cert(ctx, pt, h, gens, arc, res.functional, res.threshold)
    if not verify_certificate(direct)[0]:
        return None
    return ClosureVerdict(FAILS, "minors+arc", direct)


def closure_membership_module(
    h: Sequence[Poly | str],
    M: ModulePresentation | Sequence[Sequence[Poly | str]],
    ctx: RingContext | None = None,
    point: Mapping | None = None,
    strategy: str = "auto",
    bounds: Bounds | None = None,
    *,
    param: Parametrization | None = None,
    user_arcs: Sequence[CurveArc] = (),
    arcs: ArcSource | Sequence[CurveArc] | None = None,
    closure: str = "integral",
    rho_check: bool = False,
) -> ClosureVerdict:
    """Is the vector h in the integral closure of the module M at ``point``?"""
    _reject_strict(closure)
    if strategy not in MODULE_STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {MODULE_STRATEGIES}")
    if isinstance(M, ModulePresentation):
        ctx = ctx or M.context
        gens = M.columns()
    else:
        if ctx is None:
            raise ValueError("a ring context is required when M is given as columns")
        gens = [[ctx.parse(x) for x in col] for col in M]
    bounds = bounds or Bounds()
    h = [ctx.parse(x) for x in h]
    gens = [[ctx.parse(x) for x in col] for col in gens]
    if any(len(col) != len(h) for col in gens):
        raise ValueError("generator length differs from the element length")
    gens = [col for col in gens if any(x for x in col)]
    pt = check_point(ctx, point or {})
    bj = _bounds_json(bounds, h + [x for col in gens for x in col])
    cache = _ArcCache(ctx, pt, bounds, arcs, param, user_arcs)
    run = lambda s: strategy in ("auto", s)

    verdict = None
    if all(x.is_zero() for x in h):
        verdict = ClosureVerdict(
            HOLDS, "zero", membership_cert(ctx, pt, h, gens, ctx.ring.one, [ctx.ring.zero] * len(gens), [])
        )
    if verdict is None and run("membership"):
        verdict = _membership_engine(h, gens, ctx, pt, False)
    tried = 0
    if verdict is None and run("arcs"):
        verdict, tried = _arc_engine(h, gens, ctx, pt, cache)
    if verdict is None and run("minors"):
        v = _minors_engine(h, gens, ctx, pt, bounds, cache)
        if v.status != INCONCLUSIVE:
            verdict = v
        else:
            verdict = ClosureVerdict(INCONCLUSIVE, strategy, None, v.reason + f"; {tried} direct arcs tried")
    if verdict is None:
        verdict = ClosureVerdict(INCONCLUSIVE, strategy, None, f"no certificate within bounds ({tried} arcs tried)")
    verdict.bounds = bj
    verdict = _checked(verdict)
    if rho_check and gens:
        _rho_cross_check(h, gens, ctx, pt, bounds, verdict)
    return verdict


def _rho_cross_check(h, gens, ctx, pt, bounds, verdict: ClosureVerdict):
    """Compare with the contraction ideal on each chart at tau = 0; a conflict is an engine bug."""
    from ..modulealg import rho_ideal

    p = len(h)
    checks = []
    for chart in range(1, p + 1):
        I = rho_ideal(ModulePresentation(ctx, PolyMatrix.from_columns(ctx.ring, gens, p)), chart)
        J = rho_ideal(ModulePresentation(ctx, PolyMatrix.from_columns(ctx.ring, [h], p)), chart)
        ext = I.context
        v = closure_membership_ideal(J.gens[0], I.gens, ext, dict(pt), "auto", bounds)
        checks.append({"chart": chart, "status": v.status, "engine": v.engine})
        # module Holds forces every chart point to Hold; a single chart point cannot force Fails
        if verdict.status == HOLDS and v.status == FAILS:
            raise CertificateInvariantError(f"contraction chart {chart} contradicts the module verdict")
    verdict.reason = (verdict.reason + "; " if verdict.reason else "") + "contraction cross-check: " + ", ".join(
        f"chart {c['chart']} {c['status']}" for c in checks
    )
