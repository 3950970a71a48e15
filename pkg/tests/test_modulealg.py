import pytest

from lipdouble.exactalg import PolyRing
from lipdouble.modulealg import (
    ModulePresentation,
    PointError,
    RingContext,
    VarietyFamily,
    cosupport_ideal,
    generic_rank,
    jacobian_modules,
    minors_ideal,
    rank_at_point,
    rho_ideal,
)

C2 = RingContext(("z1", "z2"))


def cols(M):
    return [[str(x) for x in c] for c in M.columns()]


def test_jacobian_modules_sphere():
    fam = VarietyFamily.from_polys(["z1", "z2", "z3"], [], ["z1^2 + z2^2 + z3^2"])
    JM, JMY, JzM = jacobian_modules(fam)
    assert cols(JM) == [["2*z1"], ["2*z2"], ["2*z3"]]
    assert JMY.r == 0 and JzM.r == 3


def test_jacobian_modules_family():
    fam = VarietyFamily.from_polys(["z1", "z2"], ["t"], ["(z1 - t*z2^2)^2 - z2^3"])
    _, JMY, JzM = jacobian_modules(fam)
    R = fam.ring
    assert JzM.columns()[0][0] == R.parse("2*(z1 - t*z2^2)")
    assert JzM.columns()[1][0] == R.parse("-4*t*z2*(z1 - t*z2^2) - 3*z2^2")
    assert JMY.columns()[0][0] == R.parse("-2*z2^2*(z1 - t*z2^2)")


def test_constant_family_gives_zero_module():
    fam = VarietyFamily.from_polys(["z1"], ["t"], ["0"])
    JM, _, _ = jacobian_modules(fam)
    assert JM.is_zero()


def test_minors_ideal_examples():
    M = ModulePresentation.from_columns(C2, [["z1", "0"], ["0", "z1"]])
    assert [str(g) for g in minors_ideal(M, 2).gens] == ["z1^2"]
    assert [str(g) for g in minors_ideal(M, 1).gens] == ["z1"]
    N = ModulePresentation.from_columns(C2, [["z1"], ["z2 + 1"]])
    assert {str(g) for g in minors_ideal(N, 1).gens} == {"z1", "z2 + 1"}
    with pytest.raises(ValueError):
        minors_ideal(M, 3)


def test_generic_rank_examples():
    ctx = RingContext(("z1", "z2", "z3"), relations=("z1^2 + z2^2 + z3^2",))
    JM = ModulePresentation.from_columns(ctx, [["2*z1"], ["2*z2"], ["2*z3"]])
    assert generic_rank(JM) == 1
    zero = ModulePresentation.from_columns(C2, [["0", "0"]])
    assert generic_rank(zero) == 0
    # the minor vanishes on X although it is a nonzero polynomial
    line = RingContext(("z1", "z2"), relations=("z1",))
    assert generic_rank(ModulePresentation.from_columns(line, [["z1"]])) == 0


def test_cosupport_examples():
    line = RingContext(("z",))
    assert [str(g) for g in cosupport_ideal(ModulePresentation.from_columns(line, [["z"]])).gens] == ["z"]
    free = ModulePresentation.from_columns(C2, [["1", "0"], ["0", "1"]])
    assert cosupport_ideal(free).is_unit()


def test_rho_examples():
    I = rho_ideal(ModulePresentation.from_columns(C2, [["z1", "z2"]]), 1)
    assert I.gens == [I.context.ring.parse("z1 + z2*tau2")]
    assert rho_ideal(ModulePresentation.from_columns(C2, [["1", "0"]]), 1).is_unit()
    J = rho_ideal(ModulePresentation.from_columns(C2, [["z1", "0"], ["0", "z2"]]), 2)
    assert J.gens == [J.context.ring.parse("z1*tau1"), J.context.ring.parse("z2")]
    with pytest.raises(ValueError):
        rho_ideal(ModulePresentation.from_columns(C2, [["z1", "z2"]]), 3)


def test_rank_at_point():
    cone = RingContext(("z1", "z2", "z3"), relations=("z1^2 + z2^2 - z3^2",))
    JM = ModulePresentation.from_columns(cone, [["2*z1"], ["2*z2"], ["-2*z3"]])
    assert rank_at_point(JM, {"z1": 3, "z2": 4, "z3": 5}) == 1
    assert rank_at_point(JM, {}) == 0  # vertex lies in the cosupport
    with pytest.raises(PointError):
        rank_at_point(JM, {"z1": 1})
    zero = ModulePresentation.from_columns(C2, [["0", "0"]])
    assert rank_at_point(zero, {"z1": 2}) == 0


def test_times_ideal_order():
    M = ModulePresentation.from_columns(C2, [["z1"], ["z2"]])
    P = M.times_ideal(C2.m_y().gens)
    assert cols(P) == [["z1^2"], ["z1*z2"], ["z1*z2"], ["z2^2"]]
