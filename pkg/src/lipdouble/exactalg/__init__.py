"""Exact arithmetic kernel: rationals, sparse polynomials, series, matrices."""

from .linsolve import solve_sparse
from .matrix import PolyMatrix, determinant, minors, rank_q
from .poly import (
    ParseError,
    Poly,
    PolyRing,
    Q,
    RingMismatch,
    differentiate,
    drl_key,
    substitute,
    to_q,
)
from .series import DEFAULT_TRUNCATION, BiSeries, TruncSeries, series_nth_root

__all__ = [
    "Q",
    "to_q",
    "Poly",
    "PolyRing",
    "ParseError",
    "RingMismatch",
    "differentiate",
    "substitute",
    "drl_key",
    "TruncSeries",
    "BiSeries",
    "series_nth_root",
    "DEFAULT_TRUNCATION",
    "PolyMatrix",
    "determinant",
    "minors",
    "rank_q",
    "solve_sparse",
]
