"""Sparse exact linear systems over Q with a modular consistency prefilter.

A system is a list of sparse rows ``{column: coefficient}`` with a
right-hand side.  ``solve_sparse`` returns one particular solution (free
unknowns set to zero) or ``None`` when inconsistent.
"""

from __future__ import annotations

from gmpy2 import mpq

__all__ = ["solve_sparse", "consistent_mod_p", "PRIME"]

PRIME = 2147483629  # largest prime below 2^31


def _reduce_rows(rows, rhs, add, mul, inv, is_zero):
    """Gauss-Jordan on dict rows; returns (pivot rows, inconsistent flag)."""
    pivots: dict[int, tuple[dict, object]] = {}
    order: list[int] = []
    for row, b in zip(rows, rhs):
        row = {c: v for c, v in row.items() if not is_zero(v)}
        # eliminate existing pivots from the incoming row
        changed = True
        while changed:
            changed = False
            for c in [c for c in row if c in pivots]:
                v = row.get(c)
                if v is None:
                    continue
                prow, pb = pivots[c]
                f = v
                for pc, pv in prow.items():
                    nv = add(row.get(pc, 0), mul(-1, mul(f, pv)))
                    if is_zero(nv):
                        row.pop(pc, None)
                    else:
                        row[pc] = nv
                b = add(b, mul(-1, mul(f, pb)))
                changed = True
        if not row:
            if not is_zero(b):
                return pivots, order, True
            continue
        c = min(row, key=lambda k: (len(row), k))
        ic = inv(row[c])
        row = {k: mul(v, ic) for k, v in row.items()}
        b = mul(b, ic)
        pivots[c] = (row, b)
        order.append(c)
    return pivots, order, False


def consistent_mod_p(rows: list[dict], rhs: list, p: int = PRIME) -> bool:
    """Consistency of the system reduced mod ``p``.

    Raises ``ValueError`` when ``p`` divides a denominator.
    """

    def red(x):
        x = mpq(x)
        return int(x.numerator) * pow(int(x.denominator), -1, p) % p

    rows_p = [{c: red(v) for c, v in r.items()} for r in rows]
    rhs_p = [red(b) for b in rhs]
    _, _, bad = _reduce_rows(
        rows_p,
        rhs_p,
        lambda a, b: (a + b) % p,
        lambda a, b: (a * b) % p,
        lambda a: pow(a, -1, p),
        lambda a: a % p == 0,
    )
    return not bad


def solve_sparse(rows: list[dict], rhs: list, prefilter: bool = True):
    """Particular solution ``{column: value}`` of the system, or ``None``.

    With ``prefilter`` a system inconsistent mod a large prime is rejected
    without the rational solve.  A bad prime can reject a solvable system,
    so callers must treat ``None`` as "not found", never as a proof.
    """
    if prefilter:
        try:
            if not consistent_mod_p(rows, rhs):
                return None
        except ValueError:
            pass
    return _solve_q(rows, rhs)


def _solve_q(rows, rhs):
    pivots, order, bad = _reduce_rows(
        [{c: mpq(v) for c, v in r.items()} for r in rows],
        [mpq(b) for b in rhs],
        lambda a, b: a + b,
        lambda a, b: a * b,
        lambda a: 1 / a,
        lambda a: not a,
    )
    if bad:
        return None
    # back substitution, free unknowns = 0
    sol: dict = {}
    for c in reversed(order):
        prow, b = pivots[c]
        v = b
        for k, coef in prow.items():
            if k != c:
                v -= coef * sol.get(k, 0)
        sol[c] = v
    return {k: v for k, v in sol.items() if v}
