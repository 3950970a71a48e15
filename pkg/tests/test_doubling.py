import pytest

from fixtures import modules, sample_points
from lipdouble.closure import closure_membership_module
from lipdouble.closure.certificates import membership_cert, verify_certificate
from lipdouble.doubling import (
    ProductRingContext,
    diagonal_ideal,
    divided_differences,
    double_element,
    double_local_certificate,
    double_module,
    offdiagonal_block_rank,
)
from lipdouble.groebner import local_membership, submodule_membership
from lipdouble.modulealg import ModulePresentation, RingContext, generic_rank, minors_ideal, rank_at_point

FIX = modules()
LINE = RingContext(("z",))
C2 = RingContext(("z1", "z2"))


def test_double_element_examples():
    prod = ProductRingContext(C2, "absolute")
    R = prod.ring
    assert double_element(C2.ring.var("z1"), prod) == [R.var("z1_1"), R.var("z1_2")]
    assert double_element(C2.ring.zero, prod) == [R.zero, R.zero]
    assert double_element([C2.ring.var("z1"), C2.ring.var("z2")], prod) == [R.var(v) for v in ("z1_1", "z2_1", "z1_2", "z2_2")]


def test_double_line_bases():
    M = ModulePresentation.from_columns(LINE, [["z"]])
    B = double_module(M, "absolute", "B")
    R = B.product.ring
    assert B.columns() == [[R.parse("z_1"), R.parse("z_2")], [R.zero, R.parse("(z_1 - z_2)*z_2")]]
    Bpp = double_module(M, "absolute", "B''")
    assert Bpp.columns() == [[R.parse("z_1"), R.parse("z_2")], [R.parse("z_1^2"), R.parse("z_2^2")]]


def test_relative_mode_shares_parameters():
    ctx = RingContext(("z1",), ("t",))
    D = double_module(ModulePresentation.from_columns(ctx, [["z1 + t"]]), "relative", "B")
    assert D.product.ring.names == ("z1_1", "z1_2", "t")
    assert D.product.diff_vars == ["z1"]
    assert len(D.columns()) == 2


def test_diagonal_ideal_examples():
    R = ProductRingContext(C2, "absolute").ring
    assert diagonal_ideal(ProductRingContext(C2, "absolute")).gens == [R.parse("z1_1 - z1_2"), R.parse("z2_1 - z2_2")]
    rel = ProductRingContext(RingContext(("z1",), ("t",)), "relative")
    assert diagonal_ideal(rel).gens == [rel.ring.parse("z1_1 - z1_2")]
    empty = ProductRingContext(RingContext((), ("t",)), "relative")
    assert diagonal_ideal(empty).gens == []


def test_offdiagonal_rank_examples():
    M = ModulePresentation.from_columns(LINE, [["z"]])
    assert offdiagonal_block_rank(M, {"z": 1}, {"z": 2}) == (1, 1, 2)
    r1, _, rd = offdiagonal_block_rank(M, {"z": 1}, {"z": 1}, allow_diagonal=True)
    assert rd == 1 == r1
    with pytest.raises(ValueError):
        offdiagonal_block_rank(M, {"z": 1}, {"z": 1})
    zero = ModulePresentation.from_columns(LINE, [["0"]])
    assert offdiagonal_block_rank(zero, {"z": 1}, {"z": 3}) == (0, 0, 0)


def test_divided_differences_telescoping():
    prod = ProductRingContext(C2, "absolute")
    b = C2.ring.parse("z1^3*z2 - 2*z2^2 + z1")
    D = divided_differences(b, prod)
    lhs = prod.pi1(b) - prod.pi2(b)
    rhs = sum((prod.difference(v) * D[v] for v in prod.diff_vars), prod.ring.zero)
    assert lhs == rhs


# -- generator-basis equivalence -------------------------------------------------------


def _members(D_from, D_to):
    rels = list(D_to.product.context.relations)
    ring = D_to.product.ring
    for col in D_from.columns():
        if not submodule_membership(col, D_to.columns(), rels, ring=ring, rank=len(col)):
            return False
    return True


@pytest.mark.parametrize("name", sorted(FIX))
def test_bases_mutually_generate(name):
    M, mode, _ = FIX[name]
    prod = ProductRingContext(M.context, mode)
    bases = {b: double_module(M, mode, b, prod) for b in ("B", "B'", "B''")}
    for a in bases:
        for b in bases:
            if a != b:
                assert _members(bases[a], bases[b]), (name, a, b)


# -- rank doubling and cosupport ------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(FIX))
def test_rank_doubles(name):
    M, mode, _ = FIX[name]
    assert generic_rank(double_module(M, mode).module) == 2 * generic_rank(M)


def test_line_double_cosupport_exact():
    D = double_module(ModulePresentation.from_columns(LINE, [["z"]]), "absolute")
    R = D.product.ring
    J = minors_ideal(D.module, 2).gens
    assert len(J) == 1 and J[0].primitive() == R.parse("z_1*z_2*(z_1 - z_2)").primitive()


def _in_sigma(M, pt, k):
    return rank_at_point(M, pt) < k


@pytest.mark.parametrize("name", [n for n in sorted(FIX) if FIX[n][2] is not None])
def test_cosupport_union_formula(name):
    M, mode, sampler = FIX[name]
    k = generic_rank(M)
    prod = ProductRingContext(M.context, mode)
    D = double_module(M, mode, "B", prod)
    pts = sample_points(sampler, 12, seed=3)
    # include cosupport points where the sampler can reach them
    origin = {v: 0 for v in M.context.ring.names}
    if all(r.evaluate(origin) == 0 for r in M.context.relations):
        pts.append(origin)
    checked = 0
    for a in pts:
        for b in pts:
            if any(a.get(v, 0) != b.get(v, 0) for v in prod.shared):
                continue
            pp = prod.pair_point(a, b)
            low = rank_at_point(D.module, pp) < 2 * k
            diag = all(a.get(v, 0) == b.get(v, 0) for v in M.context.ring.names)
            expected = diag or _in_sigma(M, a, k) or _in_sigma(M, b, k)
            assert low == expected, (a, b)
            checked += 1
    assert checked >= 20


# -- off-diagonal additivity and pointwise consistency ---------------------------------------


@pytest.mark.parametrize("name", [n for n in sorted(FIX) if FIX[n][2] is not None])
def test_offdiagonal_additivity(name):
    M, mode, sampler = FIX[name]
    pts = sample_points(sampler, 60, seed=11)
    pairs = 0
    for a, b in zip(pts[::2], pts[1::2]):
        if a == b:
            continue
        if mode == "relative" and a.get("t") != b.get("t"):
            b = dict(b, t=a.get("t"))
            if any(r.evaluate({v: b.get(v, 0) for v in M.context.ring.names}) for r in M.context.relations):
                continue
        if a == b:
            continue
        r1, r2, rd = offdiagonal_block_rank(M, a, b, mode)
        assert rd == r1 + r2
        pairs += 1
    if mode == "absolute":
        assert pairs >= 20


def test_offdiagonal_additivity_relative_family():
    M, mode, _ = FIX["jump_fiber_jacobian"]
    pairs = 0
    for t in range(-6, 7):
        # points (s*u, s, t) with s = -u^2 - t over the same t
        pts = [{"z1": (-u * u - t) * u, "z2": -u * u - t, "t": t} for u in range(-3, 4)]
        for a, b in zip(pts, pts[1:]):
            if a == b:
                continue
            r1, r2, rd = offdiagonal_block_rank(M, a, b, mode)
            assert rd == r1 + r2
            pairs += 1
    assert pairs >= 20


POINTWISE = [
    # (context, h, module columns, pair point)
    (LINE, ["z^2"], [["z"]], ({"z": 1}, {"z": 2})),
    (LINE, ["z^2"], [["z"]], ({"z": 0}, {"z": 0})),
    (C2, ["z1^2", "z1*z2"], [["z1", "0"], ["0", "z1"]], ({}, {})),
    (C2, ["z1", "z2"], [["z1", "0"], ["0", "z2"]], ({"z1": 1}, {"z2": 3})),
]


@pytest.mark.parametrize("case", range(len(POINTWISE)))
def test_doubled_holds_implies_pointwise_holds(case):
    ctx, h, columns, (a, b) = POINTWISE[case]
    M = ModulePresentation.from_columns(ctx, columns)
    prod = ProductRingContext(ctx, "absolute")
    D = double_module(M, "absolute", "B", prod)
    hv = [ctx.parse(x) for x in h]
    hD = double_element(hv, prod)
    pp = prod.pair_point(a, b)
    v = closure_membership_module(hD, D.module, prod.context, pp)
    assert v.holds
    for pt in (a, b):
        assert closure_membership_module(hv, M, ctx, pt).holds


def test_lifted_local_certificate_verifies():
    cusp = RingContext(("z1", "z2"), relations=("z1^2 - z2^3",))
    M = ModulePresentation.from_columns(cusp, [["2*z1"]])
    h = [cusp.parse("z2^3")]
    loc = local_membership(h, M.columns(), list(cusp.relations), cusp.origin(), ring=cusp.ring, rank=1)
    assert loc.member
    prod = ProductRingContext(cusp, "absolute")
    D = double_module(M, "absolute", "B", prod)
    dc = double_local_certificate(prod, D, loc.unit, loc.cofactors, loc.relation_terms)
    pp = prod.pair_point(cusp.origin(), cusp.origin())
    cert = membership_cert(prod.context, pp, double_element(h, prod), D.columns(), dc.unit, dc.coefficients, dc.relation_terms)
    ok, msg = verify_certificate(cert)
    assert ok, msg
