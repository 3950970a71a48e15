"""JSON certificates and their standalone verification.

Every certificate carries its ring (variable names and relations) and the
base point, so verification needs only polynomial and series arithmetic
(plus one radical-membership test for the rank witness of a minors
certificate).
"""

from __future__ import annotations

from typing import Mapping, Sequence

from gmpy2 import mpq

from ..exactalg.matrix import PolyMatrix, determinant, minors
from ..exactalg.poly import Poly, PolyRing, to_q
from ..exactalg.series import TruncSeries
from ..modulealg import RingContext
from .arcs import ARC_VAR, CurveArc, UncertifiedArc
from .dependence import DependenceCertificate
from .pullback import functional_from_polys, functional_to_polys

__all__ = [
    "ring_json",
    "point_json",
    "membership_cert",
    "dependence_cert",
    "termwise_cert",
    "arc_cert",
    "minors_cert",
    "minor_refutation_cert",
    "verify_certificate",
    "CertificateError",
]


class CertificateError(ValueError):
    pass


# -- encoding ----------------------------------------------------------------


def ring_json(ctx: RingContext) -> dict:
    return {
        "z": list(ctx.z),
        "y": list(ctx.y),
        "aux": list(ctx.aux),
        "relations": [str(r) for r in ctx.relations],
    }


def point_json(pt: Mapping) -> dict:
    return {v: str(mpq(x)) for v, x in pt.items()}


def _vec(v) -> list[str]:
    return [str(x) for x in ([v] if isinstance(v, Poly) else v)]


def membership_cert(ctx, point, h, gens, unit: Poly, cofactors, relation_terms) -> dict:
    """unit * h = sum cofactors_j gens_j + sum (cofactor * relation) e_component."""
    return {
        "kind": "membership",
        "ring": ring_json(ctx),
        "point": point_json(point),
        "element": _vec(h),
        "generators": [_vec(g) for g in gens],
        "unit": str(unit),
        "cofactors": [str(c) for c in cofactors],
        "relation_terms": [[int(k), int(c), str(q)] for k, c, q in relation_terms],
    }


def dependence_cert(ctx, point, cert: DependenceCertificate) -> dict:
    return {
        "kind": "dependence",
        "ring": ring_json(ctx),
        "point": point_json(point),
        "element": str(cert.f),
        "ideal": [str(g) for g in cert.gens],
        "m": cert.m,
        "unit": str(cert.unit),
        "coefficients": [
            [{"product": list(idx), "cofactor": str(c)} for idx, c in level] for level in cert.coefficients
        ],
        "relation_cofactors": [str(q) for q in cert.relation_cofactors],
    }


def termwise_cert(ctx, point, f: Poly, gens, parts: Sequence[dict]) -> dict:
    return {
        "kind": "termwise",
        "ring": ring_json(ctx),
        "point": point_json(point),
        "element": str(f),
        "ideal": [str(g) for g in gens],
        "terms": list(parts),
    }


def arc_cert(ctx, point, h, gens, arc: CurveArc, ell: Sequence[TruncSeries], threshold: int) -> dict:
    N = arc.N
    hv = [h] if isinstance(h, Poly) else list(h)
    gv = [[g] if isinstance(g, Poly) else list(g) for g in gens]
    vals = _pairings(functional_from_polys(functional_to_polys(ell, N), N), [arc.compose_vector(g) for g in gv])
    hval = _pairings(functional_from_polys(functional_to_polys(ell, N), N), [arc.compose_vector(hv)])[0]
    return {
        "kind": "arc",
        "ring": ring_json(ctx),
        "point": point_json(point),
        "element": _vec(h),
        "generators": [_vec(g) for g in gens],
        "arc": arc.to_json(),
        "functional": functional_to_polys(ell, N),
        "threshold": int(threshold),
        "element_valuation": hval,
        "generator_valuations": [v if v is not None else "inf" for v in vals],
    }


def minors_cert(ctx, point, h, gens, k: int, witness: tuple, vanishing: list, entries: list) -> dict:
    """Holds via J_k((h, M)) in the closure of J_k(M), with k the generic rank of (h, M).

    ``witness`` = (rows, cols) of a k-minor of (h, M) not vanishing on X;
    ``vanishing`` = for each nonzero (k+1)-minor, [rows, cols, exponent, relation cofactors];
    ``entries`` = for each k-minor involving h: [rows, cols, certificate].
    """
    return {
        "kind": "minors",
        "ring": ring_json(ctx),
        "point": point_json(point),
        "element": _vec(h),
        "generators": [_vec(g) for g in gens],
        "k": k,
        "witness": [list(witness[0]), list(witness[1])],
        "vanishing": vanishing,
        "minors": entries,
    }


def minor_refutation_cert(ctx, point, h, gens, k: int, rows, cols, sub: dict) -> dict:
    """Fails: a k-minor of (h, M) through h outside the closure of J_k(M), refuted by ``sub``."""
    return {
        "kind": "minor-refutation",
        "ring": ring_json(ctx),
        "point": point_json(point),
        "element": _vec(h),
        "generators": [_vec(g) for g in gens],
        "k": k,
        "rows": list(rows),
        "cols": list(cols),
        "certificate": sub,
    }


# -- decoding and checks -------------------------------------------------------


def _ctx(data: Mapping) -> RingContext:
    r = data["ring"]
    return RingContext(tuple(r["z"]), tuple(r.get("y", ())), tuple(r.get("aux", ())), tuple(r.get("relations", ())))


def _point(ctx: RingContext, data: Mapping) -> dict:
    pt = {v: to_q(data.get("point", {}).get(v, 0)) for v in ctx.ring.names}
    for r in ctx.relations:
        if r.evaluate(pt) != 0:
            raise CertificateError(f"base point is not on X (relation {r})")
    return pt


def _pairings(ell, vecs):
    out = []
    for v in vecs:
        acc = None
        for a, b in zip(ell, v):
            t = a * b
            acc = t if acc is None else acc + t
        out.append(acc.valuation() if acc is not None else None)
    return out


def _check(cond: bool, msg: str):
    if not cond:
        raise CertificateError(msg)


def _verify_membership(data, ctx, pt):
    R = ctx.ring
    h = [R.parse(x) for x in data["element"]]
    gens = [[R.parse(x) for x in g] for g in data["generators"]]
    unit = R.parse(data["unit"])
    cof = [R.parse(c) for c in data["cofactors"]]
    _check(len(cof) == len(gens), "cofactor count mismatch")
    _check(unit.evaluate(pt) != 0, "unit vanishes at the base point")
    rhs = [R.zero] * len(h)
    for c, g in zip(cof, gens):
        _check(len(g) == len(h), "generator length mismatch")
        for i in range(len(h)):
            rhs[i] = rhs[i] + c * g[i]
    rels = list(ctx.relations)
    for k, comp, q in data["relation_terms"]:
        rhs[comp] = rhs[comp] + R.parse(q) * rels[k]
    lhs = [unit * x for x in h]
    _check(lhs == rhs, "membership identity fails")
    return "membership identity verified"


def _dep_from_json(data, ctx, pt) -> DependenceCertificate:
    R = ctx.ring
    gens = [R.parse(g) for g in data["ideal"]]
    coeffs = [[(tuple(e["product"]), R.parse(e["cofactor"])) for e in level] for level in data["coefficients"]]
    for level_i, level in enumerate(coeffs, start=1):
        for idx, _ in level:
            _check(len(idx) == level_i, "product of the wrong length in a dependence coefficient")
            _check(all(0 <= j < len(gens) for j in idx), "generator index out of range")
    return DependenceCertificate(
        R.parse(data["element"]),
        gens,
        int(data["m"]),
        R.parse(data["unit"]),
        coeffs,
        list(ctx.relations),
        [R.parse(q) for q in data["relation_cofactors"]],
        pt,
    )


def _verify_dependence(data, ctx, pt):
    cert = _dep_from_json(data, ctx, pt)
    _check(len(cert.coefficients) == cert.m, "coefficient levels do not match the degree m")
    _check(cert.verify(), "dependence identity fails")
    return f"integral dependence of degree {cert.m} verified"


def _verify_termwise(data, ctx, pt):
    R = ctx.ring
    f = R.parse(data["element"])
    total = R.zero
    for part in data["terms"]:
        _check(part["ideal"] == data["ideal"], "term certificate uses another ideal")
        _check(part["ring"] == data["ring"] and part["point"] == data["point"], "term certificate context differs")
        _verify_one(part)
        total = total + R.parse(part["element"])
    _check(total == f, "terms do not sum to the element")
    return "termwise closure certificates verified"


def _verify_arc(data, ctx, pt):
    R = ctx.ring
    try:
        arc = CurveArc.from_json(ctx, data["arc"])
    except UncertifiedArc as e:
        raise CertificateError(f"arc not certified on X: {e}") from None
    _check(arc.center == pt, "arc is not centered at the base point")
    N = arc.N
    v = int(data["threshold"])
    _check(1 <= v <= N, "threshold outside 1..N")
    ell = functional_from_polys(data["functional"], N)
    h = [R.parse(x) for x in data["element"]]
    gens = [[R.parse(x) for x in g] for g in data["generators"]]
    _check(len(ell) == len(h), "functional length mismatch")
    hv = _pairings(ell, [arc.compose_vector(h)])[0]
    _check(hv is not None and hv < v, "element pairing does not have valuation below the threshold")
    for g, gv in zip(gens, _pairings(ell, [arc.compose_vector(g) for g in gens])):
        _check(gv is None or gv >= v, "a generator pairing has valuation below the threshold")
    return f"valuation gap {hv} < {v} verified along the arc"


def _radical_power(f: Poly, rels: list[Poly], q: list[Poly], e: int) -> bool:
    rhs = f.ring.zero
    for a, b in zip(q, rels):
        rhs = rhs + a * b
    return f**e == rhs


def _verify_minors(data, ctx, pt):
    from ..groebner import radical_membership

    R = ctx.ring
    h = [R.parse(x) for x in data["element"]]
    gens = [[R.parse(x) for x in g] for g in data["generators"]]
    p = len(h)
    k = int(data["k"])
    _check(1 <= k <= min(p, len(gens) + 1), "k out of range")
    HM = PolyMatrix.from_columns(R, [h] + gens, p)
    M = PolyMatrix.from_columns(R, gens, p) if gens else None
    rels = list(ctx.relations)
    # rank of (h, M) is exactly k
    wr, wc = data["witness"]
    wit = determinant(HM.submatrix(wr, wc))
    _check(len(wr) == k and len(wc) == k, "witness of the wrong size")
    _check(wit and not radical_membership(wit, rels), "rank witness vanishes on X")
    if k < min(p, len(gens) + 1):
        listed = {(tuple(a), tuple(b)): (e, qs) for a, b, e, qs in data["vanishing"]}
        for rs, cs, d in minors(HM, k + 1):
            if d.is_zero():
                continue
            _check((rs, cs) in listed, "a nonzero (k+1)-minor lacks a vanishing proof")
            e, qs = listed[(rs, cs)]
            _check(_radical_power(d, rels, [R.parse(q) for q in qs], int(e)), "vanishing proof fails")
    # every k-minor involving h lies in the closure of J_k(M)
    Jk = [d for _, _, d in minors(M, k)] if M is not None and k <= len(gens) else []
    Jk_str = []
    for d in Jk:
        if d and str(d) not in Jk_str and str(-d) not in Jk_str:
            Jk_str.append(str(d))
    given = {(tuple(a), tuple(b)): c for a, b, c in data["minors"]}
    for rs, cs, d in minors(HM, k, must_include_col=0):
        if d.is_zero():
            continue
        _check((rs, cs) in given, "a k-minor involving the element lacks a certificate")
        sub = given[(rs, cs)]
        _check(sub["ring"] == data["ring"] and sub["point"] == data["point"], "minor certificate context differs")
        _check(R.parse(sub["element"]) == d, "minor certificate is for another element")
        _check(
            sorted(sub.get("ideal", [])) == sorted(Jk_str) or _ideal_match(sub, Jk_str), "minor certificate uses another ideal"
        )
        _verify_one(sub)
    return f"minors criterion at k={k} verified"


def _verify_minor_refutation(data, ctx, pt):
    R = ctx.ring
    h = [R.parse(x) for x in data["element"]]
    gens = [[R.parse(x) for x in g] for g in data["generators"]]
    p = len(h)
    k = int(data["k"])
    rows, cols = list(data["rows"]), list(data["cols"])
    _check(len(rows) == k and len(cols) == k and 0 in cols, "minor must be k x k and use the element column")
    HM = PolyMatrix.from_columns(R, [h] + gens, p)
    d = determinant(HM.submatrix(rows, cols))
    Jk = []
    if k <= len(gens):
        for _, _, m in minors(PolyMatrix.from_columns(R, gens, p), k):
            if m and str(m) not in Jk and str(-m) not in Jk:
                Jk.append(str(m))
    sub = data["certificate"]
    _check(sub.get("kind") == "arc", "minor refutation must carry an arc certificate")
    _check(sub["ring"] == data["ring"] and sub["point"] == data["point"], "minor certificate context differs")
    _check([R.parse(x) for x in sub["element"]] == [d], "arc certificate is for another element")
    _check(sorted(g[0] for g in sub["generators"]) == sorted(Jk), "arc certificate uses another ideal")
    _verify_arc(sub, ctx, pt)
    return f"k={k} minor outside the closure of J_k(M) verified"


def _ideal_match(sub, Jk_str):
    if sub["kind"] == "membership":
        return sorted(g[0] for g in sub["generators"]) == sorted(Jk_str)
    return False


_VERIFIERS = {
    "membership": _verify_membership,
    "dependence": _verify_dependence,
    "termwise": _verify_termwise,
    "arc": _verify_arc,
    "minors": _verify_minors,
    "minor-refutation": _verify_minor_refutation,
}


def _verify_one(data: Mapping) -> str:
    kind = data.get("kind")
    if kind not in _VERIFIERS:
        raise CertificateError(f"unknown certificate kind {kind!r}")
    ctx = _ctx(data)
    pt = _point(ctx, data)
    return _VERIFIERS[kind](data, ctx, pt)


def verify_certificate(data: Mapping) -> tuple[bool, str]:
    """(True, summary) when the certificate re-verifies exactly, else (False, reason)."""
    try:
        return True, _verify_one(data)
    except (CertificateError, KeyError, ValueError, TypeError, IndexError) as e:
        return False, f"{type(e).__name__}: {e}"
