import sympy
import pytest
from hypothesis import given, settings, strategies as st

from lipdouble.closure import verify_certificate
from lipdouble.closure.verdict import HOLDS
from lipdouble.curvefam import (
    CurveFamilyParam,
    NormalFormError,
    bilip_verdict,
    chain_rule_check,
    cramer_field,
    implicitize,
    normal_form,
)
from lipdouble.exactalg import PolyRing
from lipdouble.exactalg.matrix import PolyMatrix
from lipdouble.exactalg.series import BiSeries
from lipdouble.modulealg import RingContext

DEFORMED = ["s^3 + t*s^4", "s^2"]
G_DEFORMED = "(z1 - t*z2^2)^2 - z2^3"
CTX = RingContext(("z1", "z2"), ("t",))


def same_up_to_scalar(a, b):
    (e, c), (_, d) = a.leading_term(), b.leading_term()
    return a.scale(d) == b.scale(c)


def lift(x, N):
    return BiSeries({(i, 0): c for i, c in enumerate(x.coeffs) if c}, N)


def recomposition_holds(param, nf):
    """L^-1 applied to the input, then s -> R^-1, gives the transformed family."""
    N = nf.transformed.N
    comps = [param.components[i] for i in nf.permutation]
    n = len(comps)
    for i in range(n):
        h = BiSeries({}, param.N)
        for j in range(n):
            h = h + comps[j] * lift(nf.L_inverse[i][j], param.N)
        if h.compose_s(nf.R_inverse).truncate(N) != nf.transformed.components[i].truncate(N):
            return False
        if nf.transformed.components[i].compose_s(nf.R).truncate(N - 1) != h.truncate(N - 1):
            return False
    return True


def check_normal(param, nf):
    out = nf.transformed
    p = param.p
    assert out.normal
    assert out.components[-1] == BiSeries({(0, p): 1}, out.N)
    for c in out.components[:-1]:
        assert c.ord_s() is None or c.ord_s() > p
    assert recomposition_holds(param, nf)


# -- normal form ---------------------------------------------------------------------


def test_already_normal():
    param = CurveFamilyParam.from_polys(["s^3", "s^2"], N=20)
    nf = normal_form(param)
    check_normal(param, nf)
    assert nf.R == BiSeries.s(nf.R.prec)
    assert nf.transformed.components[0] == BiSeries({(0, 3): 1}, 20)
    assert [[x.terms() for x in row] for row in nf.L_inverse] == [[[["1", 0]], []], [[], [["1", 0]]]]


def test_unit_factor_on_last_coordinate():
    param = CurveFamilyParam.from_polys(["s^3", "s^2*(1 + s)"], N=14)
    nf = normal_form(param)
    check_normal(param, nf)
    assert nf.audit["orders"] == [3]


def test_unit_factor_series_oracle():
    # s~ = s*sqrt(1 + s); invert by fixed point in sympy, then compare s(s~)^3.
    u = sympy.Symbol("u")
    K = 10
    psi = u
    for _ in range(K):
        psi = sympy.series(u / sympy.sqrt(1 + psi), u, 0, K).removeO()
    expect = sympy.Poly(sympy.series(psi**3, u, 0, K).removeO(), u)
    nf = normal_form(CurveFamilyParam.from_polys(["s^3", "s^2*(1 + s)"], N=14))
    got = {j: v for (i, j), v in nf.transformed.components[0].c.items() if i == 0 and j < K}
    want = {m[0]: sympy.Rational(c) for m, c in zip(expect.monoms(), expect.coeffs())}
    assert {j: sympy.Rational(int(v.numerator), int(v.denominator)) for j, v in got.items()} == want


def test_shear_example():
    param = CurveFamilyParam.from_polys(["s^2", "s^2 + s^3"], N=14)
    nf = normal_form(param)
    check_normal(param, nf)
    # L^-1 F = (-s^3, s^2 (1 + s)) before the reparametrization
    h0 = param.components[0] * lift(nf.L_inverse[0][0], 14) + param.components[1] * lift(nf.L_inverse[0][1], 14)
    assert h0 == BiSeries({(0, 3): -1}, 14)
    assert nf.transformed.components[0].c[(0, 3)] == -1


def test_rejects_wrong_multiplicity():
    with pytest.raises(NormalFormError):
        normal_form(CurveFamilyParam.from_polys(["t*s^2", "t*s^2 + s^3"], N=10))


def test_flag_is_verified():
    with pytest.raises(NormalFormError):
        CurveFamilyParam.from_polys(["s^2", "s^2"], N=10).flagged()
    assert CurveFamilyParam.from_polys(["s^3", "s^2"], N=10).flagged().normal


@st.composite
def families(draw):
    p = draw(st.integers(2, 3))
    coeff = st.integers(-2, 2)
    last = f"s^{p}*(1 + ({draw(coeff)})*s + ({draw(coeff)})*t)"
    first = f"({draw(coeff)})*s^{p} + ({draw(st.integers(1, 2))})*s^{p + 1} + ({draw(coeff)})*t*s^{p + 1}"
    comps = [first, last] if draw(st.booleans()) else [last, first]
    return CurveFamilyParam.from_polys(comps, N=10)


@given(families())
@settings(max_examples=10)
def test_normal_form_property(param):
    check_normal(param, normal_form(param))


# -- implicitization ----------------------------------------------------------------


def test_implicitize_examples():
    G = implicitize(CurveFamilyParam.from_polys(DEFORMED))
    assert len(G) == 1 and same_up_to_scalar(G[0], CTX.parse(G_DEFORMED))
    G = implicitize(CurveFamilyParam.from_polys(["s^3", "s^2"]))
    assert len(G) == 1 and same_up_to_scalar(G[0], CTX.parse("z1^2 - z2^3"))
    G = implicitize(CurveFamilyParam.from_polys(["s", "0"]))
    assert len(G) == 1 and same_up_to_scalar(G[0], CTX.parse("z2"))


def test_implicitize_oracle():
    t, s, z1, z2 = sympy.symbols("t s z1 z2")
    G = sympy.sympify(G_DEFORMED.replace("^", "**"))
    assert sympy.expand(G.subs({z1: s**3 + t * s**4, z2: s**2})) == 0


# -- Cramer field and chain rule --------------------------------------------------------


def test_cramer_examples():
    R = CTX.ring
    Mk = PolyMatrix.from_rows(R, [[R.parse("2*(z1 - t*z2^2)")]])
    h = R.parse("-2*z2^2*(z1 - t*z2^2)")
    assert cramer_field(Mk, [h]) == [(R.parse("-z2^2"), R.one)]
    assert cramer_field(Mk, [R.zero]) == [(R.zero, R.one)]
    eye = PolyMatrix.from_rows(R, [[R.one, R.zero], [R.zero, R.one]])
    hs = [R.parse("z1*t"), R.parse("z2^2 - 1")]
    assert cramer_field(eye, hs) == [(hs[0], R.one), (hs[1], R.one)]


def test_cramer_singular():
    R = CTX.ring
    with pytest.raises(ValueError):
        cramer_field(PolyMatrix.from_rows(R, [[R.parse("z1"), R.parse("z2")], [R.parse("2*z1"), R.parse("2*z2")]]), [R.one, R.one])


R2 = PolyRing(("z1", "z2", "t"))
small = st.integers(-2, 2)


@given(st.lists(small, min_size=4, max_size=4), st.lists(small, min_size=4, max_size=4))
@settings(max_examples=25)
def test_cramer_solves_system(a, b):
    gens = [R2.parse(x) for x in ("z1", "z2", "t", "1")]
    entries = [sum((c * g for c, g in zip(a[i:] + a[:i], gens)), R2.zero) for i in range(4)]
    Mk = PolyMatrix.from_rows(R2, [entries[:2], entries[2:]])
    h = [R2.parse(f"{b[0]}*z1 + {b[1]}"), R2.parse(f"{b[2]}*t + {b[3]}*z2")]
    try:
        sol = cramer_field(Mk, h)
    except ValueError:
        return
    for i in range(2):
        # sum_j M_ij n_j / d_j = h_i, with denominators cleared
        den = sol[0][1] * sol[1][1]
        lhs = Mk[i, 0] * sol[0][0] * sol[1][1] + Mk[i, 1] * sol[1][0] * sol[0][1]
        assert lhs == h[i] * den


def test_chain_rule_deformed():
    param = CurveFamilyParam.from_polys(DEFORMED)
    rep = chain_rule_check(param, [CTX.parse(G_DEFORMED)])
    assert rep["status"] == "verified" and rep["velocity_identity"]
    assert rep["cramer"] == [["-z2^2", "1"]]
    # c o F = -s^4 = -dF_1/dt
    s = sympy.Symbol("s")
    t = sympy.Symbol("t")
    assert -((s**2) ** 2) == -sympy.diff(s**3 + t * s**4, t)


def test_chain_rule_normal_form_reduction():
    rep = chain_rule_check(CurveFamilyParam.from_polys(DEFORMED).flagged(), [CTX.parse(G_DEFORMED)])
    assert all(q["ord_s"] >= 0 for q in rep["reduction_quotients"])


def test_chain_rule_product_family():
    rep = chain_rule_check(CurveFamilyParam.from_polys(["s^3", "s^2"]), [CTX.parse("z1^2 - z2^3")])
    assert rep["status"] == "verified"
    assert rep["cramer"] == [["0", "1"]]


def test_chain_rule_negative_control():
    rep = chain_rule_check(CurveFamilyParam.from_polys(DEFORMED), [CTX.parse(G_DEFORMED + " + t*z2^3")])
    assert rep["status"] == "mismatch" and not rep["identities_hold"]


@given(st.integers(-2, 2).filter(bool), st.integers(-2, 2))
@settings(max_examples=8)
def test_round_trip(a, b):
    param = CurveFamilyParam.from_polys([f"s^3 + ({a})*t*s^4 + ({b})*s^5", "s^2"], N=20)
    G = implicitize(param)
    assert chain_rule_check(param, G)["status"] == "verified"


# -- bi-Lipschitz verdicts --------------------------------------------------------------


@pytest.mark.parametrize("comps", [["s^3", "s^2"], ["s^3*(1 + t)", "s^2"], DEFORMED, ["s^5", "s^2"]])
def test_bilip_holds(comps):
    rep = bilip_verdict(CurveFamilyParam.from_polys(comps))
    assert rep.aggregate == HOLDS
    assert rep.condition == "bilip"
    for g in rep.generators:
        ok, msg = verify_certificate(g["certificate"])
        assert ok, msg


def test_bilip_oracle_plain_multiple():
    # dG/dt = -2(1+t) z2^3 = -2 z1^2 / (1+t) mod G: a multiple of 2 z1 away from t = -1
    z1, z2, t = sympy.symbols("z1 z2 t")
    G = z1**2 - (1 + t) ** 2 * z2**3
    r = sympy.rem(sympy.expand(sympy.diff(G, t) * (1 + t)), G, z2)
    assert sympy.expand(r + 2 * z1**2) == 0


def test_bilip_requires_normal_form():
    with pytest.raises(NormalFormError):
        bilip_verdict(CurveFamilyParam.from_polys(["s^3", "s^2 + t*s^3"]))
