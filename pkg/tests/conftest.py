import sys
from pathlib import Path

import sympy
from hypothesis import HealthCheck, settings, strategies as st

from lipdouble.exactalg import Poly, PolyRing

ROOT = Path(__file__).resolve().parents[1]
CORPUS = ROOT / "corpus"

settings.register_profile("default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def to_sympy(p: Poly):
    """Independent oracle representation: parse our printed form with sympy."""
    syms = {n: sympy.Symbol(n) for n in p.ring.names}
    return sympy.sympify(str(p).replace("^", "**"), locals=syms)


def from_sympy(expr, ring: PolyRing) -> Poly:
    return ring.parse(str(sympy.expand(expr)).replace("**", "^"))


def polys(ring: PolyRing, max_terms: int = 4, max_exp: int = 3, coeff: int = 5):
    n = ring.nvars
    exps = st.tuples(*[st.integers(0, max_exp)] * n)
    coeffs = st.integers(-coeff, coeff).filter(bool)
    return st.dictionaries(exps, coeffs, max_size=max_terms).map(lambda d: Poly(ring, d))


# Lines recorded by the acceptance suite, echoed after the run.
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
