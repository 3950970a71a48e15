import random

import pytest
import sympy
from gmpy2 import mpq
from hypothesis import given, strategies as st

from conftest import from_sympy, polys, to_sympy
from lipdouble.exactalg import (
    BiSeries,
    ParseError,
    Poly,
    PolyMatrix,
    PolyRing,
    TruncSeries,
    determinant,
    minors,
    rank_q,
    series_nth_root,
    solve_sparse,
    substitute,
)

R = PolyRing(["z1", "z2", "t"])
P = polys(R)


# -- parsing and printing ---------------------------------------------------------


def test_parse_roundtrip_fixed():
    p = R.parse("(z1 - t*z2^2)^2 - z2^3")
    assert R.parse(str(p)) == p
    assert p == (R.var("z1") - R.var("t") * R.var("z2") ** 2) ** 2 - R.var("z2") ** 3


def test_parse_accepts_double_star_and_rationals():
    assert R.parse("z1**2/4") == R.var("z1") ** 2 * mpq(1, 4)


@pytest.mark.parametrize(
    "text,pos",
    [("z1*+z2", 3), ("z1 + w", 5), ("(z1", 3), ("z1^z2", 3), ("", 0), ("z1 $ z2", 3)],
)
def test_parse_error_positions(text, pos):
    with pytest.raises(ParseError) as e:
        R.parse(text)
    assert e.value.pos == pos
    assert "position" in str(e.value)


def test_float_coefficients_rejected():
    with pytest.raises(TypeError):
        R.const(0.5)


@given(P)
def test_print_parse_roundtrip(p):
    assert R.parse(str(p)) == p


# -- ring axioms against an independent oracle ---------------------------------------


@given(P, P, P)
def test_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == R.zero
    assert a * R.one == a


@given(P, P)
def test_product_matches_sympy(a, b):
    assert from_sympy(to_sympy(a) * to_sympy(b), R) == a * b


@given(P, st.integers(0, 4))
def test_power_matches_repeated_product(a, k):
    acc = R.one
    for _ in range(k):
        acc = acc * a
    assert a**k == acc


# -- differentiation ----------------------------------------------------------------


def test_derivative_examples():
    assert R.parse("z1^2*z2").diff("z1") == R.parse("2*z1*z2")
    G = R.parse("(z1 - t*z2^2)^2 - z2^3")
    assert G.diff("t") == R.parse("-2*z2^2*(z1 - t*z2^2)")
    assert R.const(5).diff("z1") == R.zero


@given(P, P, st.sampled_from(R.names))
def test_leibniz_rule(a, b, v):
    assert (a * b).diff(v) == a.diff(v) * b + a * b.diff(v)


@given(P, st.sampled_from(R.names))
def test_derivative_matches_sympy(a, v):
    assert from_sympy(sympy.diff(to_sympy(a), sympy.Symbol(v)), R) == a.diff(v)


# -- substitution --------------------------------------------------------------------


def test_substitution_examples():
    S = PolyRing(["s"])
    p = PolyRing(["z1", "z2"]).parse("z1 + z2")
    assert substitute(p, {"z1": S.parse("s^2"), "z2": S.parse("s^3")}, S) == S.parse("s^2 + s^3")
    B = PolyRing(["z1", "z2", "y1"])
    q = PolyRing(["z1", "z2"]).parse("z2")
    assert substitute(q, {"z1": B.var("z1"), "z2": B.parse("y1*z1")}, B) == B.parse("y1*z1")
    assert substitute(R.parse("z1*t + 3"), {v: R.var(v) for v in R.names}, R) == R.parse("z1*t + 3")


@given(P, P)
def test_substitution_is_a_homomorphism(a, b):
    img = {"z1": R.parse("z2 + t"), "z2": R.parse("z1^2"), "t": R.parse("3")}
    sub = lambda p: substitute(p, img, R)
    assert sub(a * b) == sub(a) * sub(b)
    assert sub(a + b) == sub(a) + sub(b)


# -- determinants and rank -----------------------------------------------------------


def _cofactor_det(rows):
    if len(rows) == 1:
        return rows[0][0]
    acc = rows[0][0].ring.zero
    for j in range(len(rows)):
        minor = [r[:j] + r[j + 1 :] for r in rows[1:]]
        term = rows[0][j] * _cofactor_det(minor)
        acc = acc + term if j % 2 == 0 else acc - term
    return acc


def test_determinant_examples():
    S = PolyRing(["z1", "z2"])
    m = PolyMatrix.from_rows(S, [[S.var("z1"), S.var("z2")], [S.var("z2"), S.var("z1")]])
    assert determinant(m) == S.parse("z1^2 - z2^2")
    h = S.parse("z1*z2 + 1")
    assert determinant(PolyMatrix.from_rows(S, [[h]])) == h


def test_random_3x3_against_cofactor_expansion():
    rng = random.Random(7)
    gens = R.gens()
    mons = [R.one] + gens + [a * b for a in gens for b in gens]
    for _ in range(10):
        rows = [[sum((rng.randint(-3, 3) * m for m in rng.sample(mons, 3)), R.zero) for _ in range(3)] for _ in range(3)]
        assert determinant(PolyMatrix.from_rows(R, rows)) == _cofactor_det(rows)


@given(st.lists(st.lists(st.integers(-4, 4), min_size=3, max_size=3), min_size=1, max_size=4))
def test_rank_matches_sympy(rows):
    assert rank_q([[mpq(x) for x in r] for r in rows]) == sympy.Matrix(rows).rank()


def test_minors_count_and_values():
    S = PolyRing(["z1"])
    m = PolyMatrix.from_rows(S, [[S.var("z1"), S.zero], [S.zero, S.var("z1")]])
    assert [d for _, _, d in minors(m, 2)] == [S.parse("z1^2")]
    assert len(minors(m, 1)) == 4


def test_solve_sparse_consistent_and_inconsistent():
    sol = solve_sparse([{0: mpq(1), 1: mpq(1)}, {0: mpq(1), 1: mpq(-1)}], [mpq(3), mpq(1)])
    assert sol == {0: 2, 1: 1}
    assert solve_sparse([{0: mpq(1)}, {0: mpq(2)}], [mpq(1), mpq(1)]) is None


# -- series ---------------------------------------------------------------------------


def test_nth_root_examples():
    x = TruncSeries([1, 1], 3, "s")
    assert series_nth_root(x, 2).coeffs == [1, mpq(1, 2), mpq(-1, 8), mpq(1, 16)]
    assert series_nth_root(TruncSeries([1], 5), 3) == TruncSeries([1], 5)
    assert series_nth_root(TruncSeries([1, 2, 1], 10), 2) == TruncSeries([1, 1], 10)


@given(st.lists(st.integers(-5, 5), min_size=1, max_size=6), st.integers(1, 4))
def test_nth_root_power_roundtrip(tail, n):
    x = TruncSeries([1] + tail, 12)
    r = series_nth_root(x, n)
    assert r**n == x


def test_nth_root_requires_unit_constant():
    with pytest.raises(ValueError):
        series_nth_root(TruncSeries([2, 1], 4), 2)


@given(st.lists(st.integers(-5, 5), min_size=1, max_size=6))
def test_series_inverse(tail):
    x = TruncSeries([3] + tail, 15)
    assert x * x.inverse() == x.one_like()


def test_bivariate_series_derivatives():
    F = BiSeries.from_terms([[1, 0, 3], [1, 1, 4]], 20)
    assert F.diff_t() == BiSeries.from_terms([[1, 0, 4]], 20)
    assert F.diff_s() == BiSeries.from_terms([[3, 0, 2], [4, 1, 3]], 20)
    assert F.ord_s() == 3


def test_truncation_drops_high_terms():
    a = TruncSeries([0, 1], 4)
    assert (a**5).is_zero()
