"""Fixture modules shared by the doubling and acceptance tests.

Each entry: (context, generator columns, doubling mode, rational point sampler or None).
"""

from fractions import Fraction
import random

from lipdouble.modulealg import ModulePresentation, RingContext, VarietyFamily, jacobian_modules


def _q(rng):
    return Fraction(rng.randint(-9, 9), rng.randint(1, 4))


def _line(rng):
    return {"z": _q(rng)}


def _plane(rng):
    return {"z1": _q(rng), "z2": _q(rng)}


def _cone(rng):
    m, n, k = rng.randint(-5, 5), rng.randint(-5, 5), _q(rng)
    return {"z1": k * (m * m - n * n), "z2": k * 2 * m * n, "z3": k * (m * m + n * n)}


def _cusp(rng):
    s = _q(rng)
    return {"z1": s**3, "z2": s**2}


def _jump(rng):
    # few parameter values so that fibered pairs over a common t are plentiful
    t, u = rng.choice([-2, 1]), _q(rng)
    s = -u * u - t
    return {"z1": s * u, "z2": s, "t": t}


def _jump_family():
    return VarietyFamily.from_polys(["z1", "z2"], ["t"], ["z1^2 + z2^3 + t*z2^2"])


def modules():
    out = {}
    line = RingContext(("z",))
    out["line"] = (ModulePresentation.from_columns(line, [["z"]]), "absolute", _line)
    sphere = RingContext(("z1", "z2", "z3"), relations=("z1^2 + z2^2 + z3^2",))
    out["sphere_jacobian"] = (ModulePresentation.from_columns(sphere, [["2*z1"], ["2*z2"], ["2*z3"]]), "absolute", None)
    cone = RingContext(("z1", "z2", "z3"), relations=("z1^2 + z2^2 - z3^2",))
    out["cone_jacobian"] = (ModulePresentation.from_columns(cone, [["2*z1"], ["2*z2"], ["-2*z3"]]), "absolute", _cone)
    plane = RingContext(("z1", "z2"))
    out["diagonal_z1"] = (ModulePresentation.from_columns(plane, [["z1", "0"], ["0", "z1"]]), "absolute", _plane)
    out["vector_z"] = (ModulePresentation.from_columns(plane, [["z1", "z2"]]), "absolute", _plane)
    cusp = RingContext(("z1", "z2"), relations=("z1^2 - z2^3",))
    out["cusp_jacobian"] = (ModulePresentation.from_columns(cusp, [["2*z1"], ["-3*z2^2"]]), "absolute", _cusp)
    fam = _jump_family()
    out["jump_fiber_jacobian"] = (jacobian_modules(fam)[2], "relative", _jump)
    return out


def sample_points(sampler, count, seed=0):
    rng = random.Random(seed)
    return [sampler(rng) for _ in range(count)]
