"""Equisingularity condition checkers: W, iL_mY, iL_A, the weighted-homogeneous
Euler fast path, and hyperplane-section families over a Grassmannian chart."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from gmpy2 import mpq

from .closure.arcs import Parametrization, sample_pair_arcs
from .closure.certificates import membership_cert, point_json, verify_certificate
from .closure.verdict import (
    FAILS,
    HOLDS,
    INCONCLUSIVE,
    Bounds,
    CertificateInvariantError,
    ClosureVerdict,
    closure_membership_module,
)
from .doubling import ProductRingContext, double_element, double_local_certificate, double_module
from .exactalg.linsolve import solve_sparse
from .exactalg.matrix import rank_q
from .exactalg.poly import Poly, PolyRing, substitute, to_q
from .groebner import local_membership
from .modulealg import ModulePresentation, RingContext, VarietyFamily, check_point, jacobian_modules

__all__ = [
    "ConditionReport",
    "aggregate",
    "check_w",
    "check_ila",
    "check_ilmy",
    "WeightVector",
    "WeightError",
    "FastPathInapplicable",
    "wh_euler_fastpath",
    "grassmann_modification",
    "grassmann_identities",
    "grassmann_ila_criterion",
    "IdentityFailure",
]

MODEL = "polynomial-proxy"


class WeightError(ValueError):
    pass


class FastPathInapplicable(ValueError):
    def __init__(self, message: str, system: list[str] | None = None, consistent: bool | None = None):
        super().__init__(message)
        self.system = system or []
        self.consistent = consistent


class IdentityFailure(RuntimeError):
    """A chain-rule identity failed; this is an engine bug."""


def aggregate(statuses: Sequence[str]) -> str:
    if all(s == HOLDS for s in statuses):
        return HOLDS
    if any(s == FAILS for s in statuses):
        return FAILS
    return INCONCLUSIVE


@dataclass
class ConditionReport:
    condition: str
    point: dict
    generators: list  # dicts: name, verdict, engine, reason, certificate
    bounds: dict
    notes: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def aggregate(self) -> str:
        return aggregate([g["verdict"] for g in self.generators])

    def to_json(self) -> dict:
        out = {
            "condition": self.condition,
            "point": self.point,
            "generators": self.generators,
            "aggregate": self.aggregate,
            "bounds": self.bounds,
            "model": MODEL,
            "notes": self.notes,
        }
        out.update(self.extra)
        return out


def _entry(name: str, v: ClosureVerdict) -> dict:
    return {"name": name, "verdict": v.status, "engine": v.engine, "reason": v.reason, "certificate": v.certificate}


def _point_of(ctx: RingContext, at: Mapping | None) -> dict:
    return check_point(ctx, dict(at or {}))


def _notes_for(ctx: RingContext, pt: dict) -> list[str]:
    notes = ["Holds verdicts are certified identities in the polynomial model; Fails verdicts carry analytic arcs"]
    if any(pt.get(v) for v in ctx.y):
        notes.append("parameter point away from the origin: default bounds reused")
    return notes


def _pname(y: str) -> str:
    return f"dF/d{y}"


# -- W ---------------------------------------------------------------------------


def check_w(
    fam: VarietyFamily,
    at: Mapping | None = None,
    bounds: Bounds | None = None,
    *,
    param: Parametrization | None = None,
    user_arcs=(),
) -> ConditionReport:
    """JM_Y in the closure of m_Y * J_zM at a point of X."""
    bounds = bounds or Bounds()
    ctx = fam.context
    pt = _point_of(ctx, at)
    _, JMY, JzM = jacobian_modules(fam)
    target = JzM.times_ideal(ctx.m_y().gens)
    gens = []
    for y, col in zip(ctx.y, JMY.columns()):
        v = closure_membership_module(col, target, ctx, pt, "auto", bounds, param=param, user_arcs=user_arcs)
        gens.append(_entry(_pname(y), v))
    return ConditionReport("W", point_json(pt), gens, bounds.to_json(), _notes_for(ctx, pt))


# -- doubled conditions ------------------------------------------------------------


def _doubled_test(
    condition: str,
    fam: VarietyFamily,
    module: ModulePresentation,
    at,
    bounds: Bounds,
    param,
    user_arcs,
    fast: bool = True,
) -> ConditionReport:
    ctx = fam.context
    if at is None:
        pt1 = pt2 = _point_of(ctx, None)
    else:
        pt1, pt2 = (_point_of(ctx, a) for a in at)
    prod = ProductRingContext(ctx, "relative")
    D = double_module(module, "relative", "B", prod)
    pp = prod.pair_point(pt1, pt2)
    _, JMY, _ = jacobian_modules(fam)
    gens_base = module.columns()
    arcs_cache: dict = {}

    def arcs():
        if "a" not in arcs_cache:
            arcs_cache["a"] = sample_pair_arcs(
                prod,
                bounds.arc_count,
                bounds.degree_budget,
                bounds.truncation,
                seed=bounds.seed,
                center1=pt1,
                center2=pt2,
                param=param,
                user_arcs=user_arcs,
            )
        return arcs_cache["a"]

    entries = []
    for y, col in zip(ctx.y, JMY.columns()):
        hD = double_element(col, prod)
        v = None
        if fast:
            v = _doubled_local(prod, D, col, gens_base, hD, pt1, pt2, pp, bounds)
        if v is None:
            v = closure_membership_module(hD, D.module, prod.context, pp, "auto", bounds, arcs=arcs)
        entries.append(_entry(f"({_pname(y)})_D", v))
    notes = _notes_for(ctx, pt1)
    notes.append(f"relative double over the fibered product, basis B, {len(D.labels)} generators")
    return ConditionReport(
        condition,
        {"first": point_json(pt1), "second": point_json(pt2)},
        entries,
        bounds.to_json(),
        notes,
    )


def _doubled_local(prod, D, h, gens, hD, pt1, pt2, pp, bounds) -> ClosureVerdict | None:
    """Local membership of h at the base point, lifted to a certificate for h_D."""
    ctx = prod.base
    if all(x.is_zero() for x in h):
        cert = membership_cert(prod.context, pp, hD, D.columns(), prod.ring.one, [prod.ring.zero] * len(D.columns()), [])
        return ClosureVerdict(HOLDS, "zero", cert, "", _bj(bounds))
    if pt1 != pt2:
        return None
    loc = local_membership(h, gens, list(ctx.relations), pt1, ring=ctx.ring, rank=len(h))
    if not loc:
        return None
    dc = double_local_certificate(prod, D, loc.unit, loc.cofactors, loc.relation_terms)
    cert = membership_cert(prod.context, pp, hD, D.columns(), dc.unit, dc.coefficients, dc.relation_terms)
    ok, msg = verify_certificate(cert)
    if not ok:
        raise CertificateInvariantError(f"lifted certificate does not re-verify: {msg}")
    return ClosureVerdict(HOLDS, "doubled-local-membership", cert, "local membership at the base point, doubled", _bj(bounds))


def _bj(bounds: Bounds) -> dict:
    return bounds.to_json()


def check_ila(
    fam: VarietyFamily,
    at: Sequence[Mapping] | None = None,
    bounds: Bounds | None = None,
    *,
    param: Parametrization | None = None,
    user_arcs=(),
    fast: bool = True,
) -> ConditionReport:
    """(JM_Y)_D in the closure of (J_zM)_D at a pair point (default: origin pair)."""
    bounds = bounds or Bounds()
    _, _, JzM = jacobian_modules(fam)
    return _doubled_test("iL_A", fam, JzM, at, bounds, param, user_arcs, fast)


def check_ilmy(
    fam: VarietyFamily,
    at: Sequence[Mapping] | None = None,
    variant: str = "z-only",
    bounds: Bounds | None = None,
    *,
    param: Parametrization | None = None,
    user_arcs=(),
    fast: bool = True,
) -> ConditionReport:
    """(JM_Y)_D in the closure of (m_Y J_zM)_D; the full variant also tests (m_Y JM)_D.

    With ``variant='full'`` the alternate report is attached under
    ``alternate`` and the two aggregates must not be {Holds, Fails}.
    """
    if variant not in ("z-only", "full"):
        raise ValueError("variant must be 'z-only' or 'full'")
    bounds = bounds or Bounds()
    ctx = fam.context
    JM, _, JzM = jacobian_modules(fam)
    mY = ctx.m_y().gens
    rep = _doubled_test("iL_mY", fam, JzM.times_ideal(mY), at, bounds, param, user_arcs, fast)
    if variant == "full":
        alt = _doubled_test("iL_mY_alt", fam, JM.times_ideal(mY), at, bounds, param, user_arcs, fast)
        pair = {rep.aggregate, alt.aggregate}
        if pair == {HOLDS, FAILS}:
            raise CertificateInvariantError("projection variants of iL_mY contradict each other")
        rep.extra["alternate"] = alt.to_json()
        rep.extra["variants"] = {"z-only": rep.aggregate, "full": alt.aggregate}
        rep.notes.append("full variant run against m_Y*JM; aggregates agree up to inconclusiveness")
    return rep


# -- weighted-homogeneous fast path ------------------------------------------------------


@dataclass
class WeightVector:
    z: dict
    y: dict
    degrees: list

    def weighted_degree(self, ring: PolyRing, e: tuple) -> mpq:
        w = {**self.z, **self.y}
        return sum((mpq(w.get(n, 0)) * k for n, k in zip(ring.names, e)), mpq(0))


def _verify_weights(fam: VarietyFamily, wv: WeightVector):
    ctx = fam.context
    for v in list(ctx.z) + list(ctx.y):
        if v not in wv.z and v not in wv.y:
            raise WeightError(f"no weight declared for {v}")
    if len(wv.degrees) != fam.p:
        raise WeightError("one degree per equation is required")
    for c, (f, d) in enumerate(zip(fam.F, wv.degrees)):
        for e in f.terms:
            if wv.weighted_degree(fam.ring, e) != mpq(d):
                raise WeightError(f"equation {c + 1} is not weighted homogeneous of degree {d}")


def _euler_system(fam: VarietyFamily, y: str) -> tuple[list[str], bool]:
    """Constant cofactors a_i on z_i*F_zi and c on F with sum = F_y: equations and consistency over Q(y)."""
    ctx = fam.context
    F = fam.F[0]
    ring = fam.ring
    cols = [ring.var(z) * F.diff(z) for z in ctx.z] + [F]
    names = [f"a{i + 1}" for i in range(len(ctx.z))] + ["c"]
    target = F.diff(y)
    zidx = [ring.index[z] for z in ctx.z]

    def split(p: Poly) -> dict:
        out: dict = {}
        for e, c in p.terms.items():
            key = tuple(e[i] for i in zidx)
            rest = tuple(0 if i in zidx else k for i, k in enumerate(e))
            out.setdefault(key, {})[rest] = c
        return {k: Poly(ring, v) for k, v in out.items()}

    parts = [split(p) for p in cols]
    tparts = split(target)
    keys = sorted(set().union(*parts, tparts), key=lambda k: (-sum(k), tuple(-x for x in k)))
    eqs = []
    rows = []
    for k in keys:
        coeffs = [p.get(k, ring.zero) for p in parts]
        rhs = tparts.get(k, ring.zero)
        lhs = " + ".join(_coef_str(c, n) for c, n in zip(coeffs, names) if c) or "0"
        eqs.append(f"{lhs} = {rhs}")
        rows.append((coeffs, rhs))
    # consistency over Q(params): generic rank by evaluation at a few parameter values
    rng = random.Random(0)
    others = [v for v in ring.names if v not in ctx.z]
    consistent = True
    ranks_a, ranks_ab = 0, 0
    for _ in range(4):
        val = {v: mpq(rng.randint(2, 97), rng.randint(1, 13)) for v in others}
        val.update({z: mpq(0) for z in ctx.z})
        A = [[c.evaluate(val) for c in coeffs] for coeffs, _ in rows]
        Ab = [r + [rhs.evaluate(val)] for r, (_, rhs) in zip(A, rows)]
        ranks_a = max(ranks_a, rank_q(A))
        ranks_ab = max(ranks_ab, rank_q(Ab))
    consistent = ranks_a == ranks_ab
    return eqs, consistent


def _coef_str(c: Poly, name: str) -> str:
    if len(c.terms) > 1:
        return f"({c})*{name}"
    if c == c.ring.one:
        return name
    if c == -c.ring.one:
        return f"-{name}"
    return f"{c}*{name}"


def wh_euler_fastpath(
    fam: VarietyFamily, weights: WeightVector, at: Mapping, bounds: Bounds | None = None
) -> ConditionReport:
    """Certificate of F_y in m_Y*J_zM + I(X) at a point with y != 0 from the Euler identity."""
    bounds = bounds or Bounds()
    ctx = fam.context
    pt = _point_of(ctx, at)
    ring = fam.ring
    _, JMY, JzM = jacobian_modules(fam)
    target = JzM.times_ideal(ctx.m_y().gens)
    tgens = target.columns()
    if all(x.is_zero() for col in JMY.columns() for x in col):
        entries = []
        for y, col in zip(ctx.y, JMY.columns()):
            cert = membership_cert(ctx, pt, col, tgens, ring.one, [ring.zero] * len(tgens), [])
            entries.append({"name": _pname(y), "verdict": HOLDS, "engine": "zero", "reason": "", "certificate": cert})
        return ConditionReport("WH_fastpath", point_json(pt), entries, bounds.to_json(), ["no parameter occurs in F"])
    _verify_weights(fam, weights)
    live = [y for y in ctx.y if weights.y.get(y, 0)]
    if not live:
        y = ctx.y[0]
        system, consistent = _euler_system(fam, y) if fam.p == 1 else ([], None)
        raise FastPathInapplicable(
            "all parameter weights are zero: the Euler identity does not involve the parameter derivative",
            system,
            consistent,
        )
    if len(ctx.y) != 1:
        raise FastPathInapplicable("the Euler fast path isolates a single parameter derivative; several parameters given")
    y = ctx.y[0]
    wy = mpq(weights.y[y])
    if pt[y] == 0:
        raise FastPathInapplicable(f"the fast path needs {y} != 0 at the point")
    n = len(ctx.z)
    # generator order in m_Y*J_zM: z_i times column j at index i*n + j
    cof = [ring.zero] * len(tgens)
    for i, z in enumerate(ctx.z):
        cof[i * n + i] = ring.const(-mpq(weights.z[z]))
    rel_index = {r: k for k, r in enumerate(ctx.relations)}
    rel_terms = []
    for c, (f, d) in enumerate(zip(fam.F, weights.degrees)):
        if f.is_zero():
            continue
        rel_terms.append((rel_index[f], c, ring.const(mpq(d))))
    unit = ring.var(y) * wy
    cert = membership_cert(ctx, pt, JMY.columns()[0], tgens, unit, cof, rel_terms)
    ok, msg = verify_certificate(cert)
    if not ok:
        raise CertificateInvariantError(f"Euler identity certificate does not verify: {msg}")
    entry = {
        "name": _pname(y),
        "verdict": HOLDS,
        "engine": "euler",
        "reason": f"{wy}*{y}*F_{y} = d*F - sum w_i z_i F_z_i",
        "certificate": cert,
    }
    return ConditionReport("WH_fastpath", point_json(pt), [entry], bounds.to_json(), _notes_for(ctx, pt))


# -- Grassmannian modification ---------------------------------------------------------


def grassmann_modification(f: Sequence[Poly], chart: int | None = None, y_prefix: str = "y") -> VarietyFamily:
    """F = f o beta with beta(z, y) = (z_1, ..., z_{n-1}, sum y_i z_i) over the chart U_n."""
    f = list(f)
    if not f:
        raise ValueError("at least one polynomial is required")
    ring = f[0].ring
    n = ring.nvars
    if chart is not None and chart != n:
        raise ValueError(f"only the chart U_n (chart={n}) is supported")
    if n < 2:
        raise ValueError("at least two variables are required")
    ys = [f"{y_prefix}{i}" for i in range(1, n)]
    if set(ys) & set(ring.names):
        raise ValueError("parameter names clash with the input variables")
    ctx = RingContext(ring.names, tuple(ys))
    R = ctx.ring
    zs = [R.var(v) for v in ring.names]
    lin = R.zero
    for yi, zi in zip(ys, zs[:-1]):
        lin = lin + R.var(yi) * zi
    beta = {v: zs[i] for i, v in enumerate(ring.names[:-1])}
    beta[ring.names[-1]] = lin
    F = [substitute(ring.convert(p), beta, R) for p in f]
    return VarietyFamily.from_polys(ring.names, ys, F)


def grassmann_identities(f: Sequence[Poly], fam: VarietyFamily | None = None) -> dict:
    """Check the chain-rule identities of F = f o beta exactly; raise on any mismatch."""
    f = list(f)
    fam = fam or grassmann_modification(f)
    ctx = fam.context
    R = ctx.ring
    ring = f[0].ring
    zn = ring.names[-1]
    zs = [R.var(v) for v in ring.names]
    lin = R.zero
    for yi, zi in zip(ctx.y, zs[:-1]):
        lin = lin + R.var(yi) * zi
    beta = {v: zs[i] for i, v in enumerate(ring.names[:-1])}
    beta[zn] = lin
    comp = lambda p: substitute(ring.convert(p), beta, R)
    checks = []
    for c, (fc, Fc) in enumerate(zip(f, fam.F)):
        dn = comp(fc.diff(zn))
        for i, yi in enumerate(ctx.y):
            lhs, rhs = Fc.diff(yi), zs[i] * dn
            checks.append({"equation": c + 1, "identity": f"dF/d{yi} = {ring.names[i]}*(df/d{zn} o beta)", "lhs": str(lhs), "rhs": str(rhs), "equal": lhs == rhs})
            lz, rz = Fc.diff(ring.names[i]), comp(fc.diff(ring.names[i])) + R.var(yi) * dn
            checks.append({"equation": c + 1, "identity": f"dF/d{ring.names[i]} = df/d{ring.names[i]} o beta + {yi}*(df/d{zn} o beta)", "lhs": str(lz), "rhs": str(rz), "equal": lz == rz})
        last = Fc.diff(zn)
        checks.append({"equation": c + 1, "identity": f"dF/d{zn} = 0", "lhs": str(last), "rhs": "0", "equal": last.is_zero()})
    bad = [c for c in checks if not c["equal"]]
    if bad:
        raise IdentityFailure(f"chain-rule identity failed: {bad[0]['identity']}")
    return {"F": [str(x) for x in fam.F], "identities": checks, "all_equal": True}


def grassmann_ila_criterion(
    f: Sequence[Poly],
    at: Mapping | None = None,
    bounds: Bounds | None = None,
    *,
    user_arcs=(),
) -> ConditionReport:
    """Doubled y-partials of F = f o beta against the doubled J_zM at (0, P) over the chart."""
    fam = grassmann_modification(f)
    grassmann_identities(f, fam)
    bounds = bounds or Bounds()
    pt = {v: to_q((at or {}).get(v, 0)) for v in fam.ring.names}
    for v in fam.context.z:
        if pt[v]:
            raise ValueError("the criterion is tested at points (0, P): fiber coordinates must vanish")
    rep = check_ila(fam, (pt, pt), bounds, user_arcs=user_arcs)
    rep.condition = "grassmann_criterion"
    rep.extra["F"] = [str(x) for x in fam.F]
    return rep
