import sympy
import pytest
from hypothesis import given, settings

from conftest import polys, to_sympy
from lipdouble.closure import verify_certificate
from lipdouble.closure.verdict import FAILS, HOLDS, INCONCLUSIVE
from lipdouble.equising import (
    FastPathInapplicable,
    WeightError,
    WeightVector,
    aggregate,
    check_ila,
    check_ilmy,
    check_w,
    grassmann_identities,
    grassmann_ila_criterion,
    grassmann_modification,
    wh_euler_fastpath,
)
from lipdouble.exactalg import PolyRing
from lipdouble.modulealg import RingContext, VarietyFamily

JUMP = "z1^2 + z2^3 + t*z2^2"


def family(F, z=("z1", "z2"), y=("t",)):
    ctx = RingContext(z, y)
    return VarietyFamily.from_polys(z, y, [ctx.parse(x) for x in F])


def certs_verify(rep):
    for g in rep.generators:
        if g["verdict"] in (HOLDS, FAILS):
            ok, msg = verify_certificate(g["certificate"])
            assert ok, msg


# Families at the origin pair, plus the weighted family over t = 1.
FIXTURES = {
    "product": (["z1^2 + z2^3"], {}),
    "relabeled": (["z1^2 + z2^3"], {}),
    "jump": ([JUMP], {}),
    "jump_t1": ([JUMP], {"t": 1}),
    "constant_mu": (["z1^3 + z2^3 + t*z1*z2^2"], {}),
    "node": (["z1^2 - z2^2 + t*z2^3"], {}),
}


@pytest.fixture(scope="module")
def reports():
    out = {}
    for name, (F, pt) in FIXTURES.items():
        y = ("u",) if name == "relabeled" else ("t",)
        fam = family(F, y=y)
        out[name] = {
            "W": check_w(fam, pt),
            "A": check_ila(fam, (pt, pt)),
            "mY": check_ilmy(fam, (pt, pt), variant="full"),
        }
    return out


def test_aggregate_rule():
    assert aggregate([HOLDS, HOLDS]) == HOLDS
    assert aggregate([HOLDS, FAILS, INCONCLUSIVE]) == FAILS
    assert aggregate([HOLDS, INCONCLUSIVE]) == INCONCLUSIVE


def test_w_examples(reports):
    assert reports["product"]["W"].aggregate == HOLDS
    assert reports["relabeled"]["W"].aggregate == HOLDS
    jump = reports["jump"]["W"]
    assert jump.aggregate == FAILS
    assert jump.generators[0]["engine"] == "arcs"
    certs_verify(jump)


def test_w_refutation_oracle():
    # Arc t = -s^2, z2 = s^2, z1 = 0 lies on the jump family.
    s = sympy.Symbol("s")
    z1, z2, t = sympy.Integer(0), s**2, -(s**2)
    assert sympy.expand(z1**2 + z2**3 + t * z2**2) == 0
    gens = [zi * g for zi in (z1, z2) for g in (2 * z1, 3 * z2**2 + 2 * t * z2)]
    orders = [sympy.Poly(sympy.expand(g), s).monoms()[-1][0] for g in gens if sympy.expand(g) != 0]
    assert sympy.Poly(z2**2, s).monoms()[-1][0] < min(orders)


def test_json_shape(reports):
    js = reports["jump"]["W"].to_json()
    assert {"condition", "point", "generators", "aggregate", "bounds", "model", "notes"} <= set(js)
    assert js["model"] == "polynomial-proxy"
    assert set(js["generators"][0]) >= {"name", "verdict", "engine", "reason", "certificate"}


def test_ila_examples(reports):
    assert reports["product"]["A"].aggregate == HOLDS
    assert reports["jump_t1"]["A"].aggregate == HOLDS
    # The doubled W refutation does not transfer: without the m_Y factor the
    # partial lies in the closure along every single arc.
    assert reports["jump"]["A"].aggregate != HOLDS
    for r in reports.values():
        certs_verify(r["A"])


def test_ilmy_examples(reports):
    assert reports["product"]["mY"].extra["variants"] == {"z-only": HOLDS, "full": HOLDS}
    jump = reports["jump"]["mY"]
    assert jump.extra["variants"] == {"z-only": FAILS, "full": FAILS}
    certs_verify(jump)


def test_monotonicity(reports):
    for name, r in reports.items():
        if r["mY"].aggregate == HOLDS:
            assert r["A"].aggregate == HOLDS, name


def test_w_fails_blocks_ilmy(reports):
    for name, r in reports.items():
        if r["W"].aggregate == FAILS:
            assert r["mY"].aggregate != HOLDS, name
            assert r["mY"].extra["variants"]["full"] != HOLDS, name


def test_variants_never_contradict(reports):
    for name, r in reports.items():
        assert set(r["mY"].extra["variants"].values()) != {HOLDS, FAILS}, name


@pytest.mark.parametrize("t", [1, -2, "1/2", 3])
def test_weighted_family_holds_off_origin(t):
    fam = family([JUMP])
    pt = {"t": t}
    assert check_ila(fam, (pt, pt)).aggregate == HOLDS


# -- Euler fast path ---------------------------------------------------------------


WH = WeightVector({"z1": 3, "z2": 2}, {"t": 2}, [6])


def test_euler_certificate():
    rep = wh_euler_fastpath(family([JUMP]), WH, {"t": 1})
    assert rep.aggregate == HOLDS
    assert rep.generators[0]["engine"] == "euler"
    certs_verify(rep)


def test_euler_identity_oracle():
    z1, z2, t = sympy.symbols("z1 z2 t")
    F = z1**2 + z2**3 + t * z2**2
    lhs = 2 * t * sympy.diff(F, t)
    rhs = 6 * F - 3 * z1 * sympy.diff(F, z1) - 2 * z2 * sympy.diff(F, z2)
    assert sympy.expand(lhs - rhs) == 0


def test_euler_needs_nonzero_parameter():
    with pytest.raises(FastPathInapplicable):
        wh_euler_fastpath(family([JUMP]), WH, {"t": 0})


def test_no_parameter_holds_trivially():
    rep = wh_euler_fastpath(family(["z1^2 + z2^3"]), WeightVector({"z1": 3, "z2": 2}, {"t": 0}, [6]), {"t": 1})
    assert rep.aggregate == HOLDS
    certs_verify(rep)


def test_weight_zero_rejected():
    fam = family(["z1^4 + z2^4 + t*z1^2*z2^2"])
    with pytest.raises(FastPathInapplicable) as exc:
        wh_euler_fastpath(fam, WeightVector({"z1": 1, "z2": 1}, {"t": 0}, [4]), {"t": 1})
    assert exc.value.consistent is False
    assert sorted(exc.value.system) == sorted(["4*a1 + c = 0", "2*t*a1 + 2*t*a2 + t*c = 1", "4*a2 + c = 0"])


def test_weight_zero_system_oracle():
    a, b, c, t = sympy.symbols("a b c t")
    eqs = [4 * a + c, 4 * b + c, 2 * t * (a + b) + c * t - 1]
    assert sympy.solve(eqs, [a, b, c], dict=True) == []


def test_weights_must_be_homogeneous():
    with pytest.raises(WeightError):
        wh_euler_fastpath(family([JUMP]), WeightVector({"z1": 1, "z2": 1}, {"t": 2}, [2]), {"t": 1})
    with pytest.raises(WeightError):
        wh_euler_fastpath(family([JUMP]), WeightVector({"z1": 3}, {"t": 2}, [6]), {"t": 1})


# -- hyperplane-section families ----------------------------------------------------


Z2 = PolyRing(("z1", "z2"))
Z3 = PolyRing(("z1", "z2", "z3"))


def test_modification_examples():
    fam = grassmann_modification([Z2.parse("z2")])
    assert list(fam.F) == [fam.ring.parse("y1*z1")]
    fam = grassmann_modification([Z2.parse("z1^2 + z2^2")])
    assert list(fam.F) == [fam.ring.parse("z1^2*(1 + y1^2)")]
    fam = grassmann_modification([Z3.parse("z1*z2 + z3^2")])
    assert list(fam.F) == [fam.ring.parse("z1*z2 + (y1*z1 + y2*z2)^2")]
    assert fam.context.y == ("y1", "y2")


def test_modification_substitution_oracle():
    f = Z3.parse("z1*z2 + z3^2 - z1*z3")
    fam = grassmann_modification([f])
    z1, z2, z3, y1, y2 = sympy.symbols("z1 z2 z3 y1 y2")
    expect = to_sympy(f).subs(z3, y1 * z1 + y2 * z2)
    assert sympy.expand(to_sympy(fam.F[0]) - expect) == 0


@pytest.mark.parametrize(
    "ring,texts",
    [
        (Z2, ["z2"]),
        (Z2, ["z1^2 + z2^2"]),
        (Z2, ["z1^2 + z2^3"]),
        (Z3, ["z1*z2 + z3^2"]),
        (Z3, ["z1^3 + z2*z3", "z3^2 - z1"]),
    ],
)
def test_identities(ring, texts):
    rep = grassmann_identities([ring.parse(x) for x in texts])
    assert rep["all_equal"]
    assert all(c["equal"] for c in rep["identities"])
    last = [c for c in rep["identities"] if c["identity"].endswith("= 0")]
    assert len(last) == len(texts) and all(c["lhs"] == "0" for c in last)


def test_identities_constant():
    rep = grassmann_identities([Z2.parse("5")])
    assert all(c["lhs"] == "0" and c["equal"] for c in rep["identities"])


@given(polys(Z3, max_terms=4, max_exp=3))
@settings(max_examples=25)
def test_identities_property(f):
    assert grassmann_identities([f])["all_equal"]


def test_identity_oracle_three():
    fam = grassmann_modification([Z3.parse("z1*z2 + z3^2")])
    z1, z2, y1, y2 = sympy.symbols("z1 z2 y1 y2")
    assert sympy.expand(sympy.diff(to_sympy(fam.F[0]), y1) - 2 * z1 * (y1 * z1 + y2 * z2)) == 0


def test_criterion_linear_and_circle():
    for text in ("z1 + 2*z2", "z1^2 + z2^2"):
        rep = grassmann_ila_criterion([Z2.parse(text)])
        assert rep.aggregate == HOLDS, text
        assert rep.condition == "grassmann_criterion"
        certs_verify(rep)


def test_criterion_cusp_at_sampled_point():
    rep = grassmann_ila_criterion([Z2.parse("z1^2 + z2^3")], {"y1": 2})
    assert rep.aggregate == HOLDS
    certs_verify(rep)


def test_criterion_rejects_fiber_offset():
    with pytest.raises(ValueError):
        grassmann_ila_criterion([Z2.parse("z1^2 + z2^2")], {"z1": 1})
