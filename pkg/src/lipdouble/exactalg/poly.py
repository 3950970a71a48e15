"""Sparse multivariate polynomials over the rationals.

A :class:`PolyRing` is an ordered tuple of variable names; a :class:`Poly`
maps exponent tuples (one slot per ring variable) to nonzero ``mpq``
coefficients.  Equality is structural because zero coefficients are never
stored.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping

from gmpy2 import mpq, mpz

__all__ = [
    "Q",
    "to_q",
    "PolyRing",
    "Poly",
    "ParseError",
    "RingMismatch",
    "substitute",
    "differentiate",
    "drl_key",
]

Q = mpq

_MPQ = type(mpq(0))
_SCALARS = (int, Fraction, type(mpq(0)), type(mpz(0)))

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class RingMismatch(ValueError):
    pass


class ParseError(ValueError):
    """Malformed polynomial text; ``pos`` is the 0-based character offset."""

    def __init__(self, message: str, text: str, pos: int):
        self.text = text
        self.pos = pos
        self.reason = message
        super().__init__(f"{message} at position {pos}:\n  {text}\n  {' ' * pos}^")


def to_q(c) -> mpq:
    if isinstance(c, str):
        return mpq(c.strip())
    if isinstance(c, Fraction):
        return mpq(c.numerator, c.denominator)
    if isinstance(c, float):
        raise TypeError("floating-point coefficients are not supported")
    return mpq(c)


def drl_key(exp: tuple) -> tuple:
    """Sort key realising degree-reverse-lexicographic order (larger is bigger)."""
    return (sum(exp), tuple(-e for e in reversed(exp)))


class PolyRing:
    __slots__ = ("names", "index", "nvars", "zero_exp")

    def __init__(self, names: Iterable[str]):
        names = tuple(names)
        for n in names:
            if not isinstance(n, str) or not _IDENT.match(n):
                raise ValueError(f"invalid variable name {n!r}")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        self.names = names
        self.index = {n: i for i, n in enumerate(names)}
        self.nvars = len(names)
        self.zero_exp = (0,) * len(names)

    def __eq__(self, other):
        return isinstance(other, PolyRing) and self.names == other.names

    def __hash__(self):
        return hash(("PolyRing", self.names))

    def __repr__(self):
        return f"PolyRing({', '.join(self.names)})"

    # constructors
    @property
    def zero(self) -> Poly:
        return Poly(self, {})

    @property
    def one(self) -> Poly:
        return Poly(self, {self.zero_exp: mpq(1)})

    def const(self, c) -> Poly:
        c = to_q(c)
        return Poly(self, {self.zero_exp: c} if c else {})

    def var(self, name: str) -> Poly:
        if name not in self.index:
            raise KeyError(f"unknown variable {name!r} in {self!r}")
        e = [0] * self.nvars
        e[self.index[name]] = 1
        return Poly(self, {tuple(e): mpq(1)})

    def gens(self) -> list[Poly]:
        return [self.var(n) for n in self.names]

    def monomial(self, exp: tuple, coeff=1) -> Poly:
        c = to_q(coeff)
        return Poly(self, {tuple(exp): c} if c else {})

    def __call__(self, x) -> Poly:
        if isinstance(x, Poly):
            return self.convert(x)
        if isinstance(x, str):
            return self.parse(x)
        return self.const(x)

    def parse(self, text: str) -> Poly:
        return _Parser(self, text).parse()

    def extend(self, *names: str) -> PolyRing:
        return PolyRing(self.names + tuple(n for n in names if n not in self.index))

    def convert(self, p: Poly) -> Poly:
        """Re-express ``p`` in this ring, matching variables by name."""
        if p.ring == self:
            return p
        src = p.ring.names
        pos = []
        for i, n in enumerate(src):
            pos.append(self.index.get(n, -1))
        terms = {}
        for e, c in p.terms.items():
            ne = [0] * self.nvars
            for i, k in enumerate(e):
                if k:
                    j = pos[i]
                    if j < 0:
                        raise RingMismatch(f"variable {src[i]!r} not in {self!r}")
                    ne[j] = k
            terms[tuple(ne)] = c
        return Poly(self, terms)


class Poly:
    __slots__ = ("ring", "terms", "_hash")

    def __init__(self, ring: PolyRing, terms: dict):
        self.ring = ring
        # coefficients must be mpq so that inverses stay exact
        if any(type(c) is not _MPQ for c in terms.values()):
            terms = {e: to_q(c) for e, c in terms.items() if c}
        self.terms = terms
        self._hash = None

    # -- coercion -------------------------------------------------------
    def _coerce(self, other) -> Poly:
        if isinstance(other, Poly):
            if other.ring != self.ring:
                raise RingMismatch(f"{self.ring!r} vs {other.ring!r}")
            return other
        if isinstance(other, _SCALARS):
            return self.ring.const(other)
        return NotImplemented

    # -- arithmetic -----------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if not o.terms:
            return self
        t = dict(self.terms)
        for e, c in o.terms.items():
            v = t.get(e)
            if v is None:
                t[e] = c
            else:
                v = v + c
                if v:
                    t[e] = v
                else:
                    del t[e]
        return Poly(self.ring, t)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.ring, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if not self.terms or not o.terms:
            return Poly(self.ring, {})
        if len(o.terms) == 1 and o.is_constant():
            c = o.terms[self.ring.zero_exp]
            return Poly(self.ring, {e: v * c for e, v in self.terms.items()})
        t: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in o.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = t.get(e)
                t[e] = c1 * c2 if v is None else v + c1 * c2
        return Poly(self.ring, {e: c for e, c in t.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result = self.ring.one
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def scale(self, c) -> Poly:
        c = to_q(c)
        if not c:
            return self.ring.zero
        return Poly(self.ring, {e: v * c for e, v in self.terms.items()})

    def mul_term(self, exp: tuple, c) -> Poly:
        return Poly(
            self.ring,
            {tuple(a + b for a, b in zip(e, exp)): v * c for e, v in self.terms.items()},
        )

    # -- predicates and data --------------------------------------------
    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and self.ring.zero_exp in self.terms)

    def is_term(self) -> bool:
        return len(self.terms) == 1

    def constant_coeff(self) -> mpq:
        return self.terms.get(self.ring.zero_exp, mpq(0))

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def degree(self, var: str) -> int:
        i = self.ring.index[var]
        return max((e[i] for e in self.terms), default=-1)

    def variables(self) -> list[str]:
        used = [False] * self.ring.nvars
        for e in self.terms:
            for i, k in enumerate(e):
                if k:
                    used[i] = True
        return [n for n, u in zip(self.ring.names, used) if u]

    def sorted_terms(self) -> list[tuple[tuple, mpq]]:
        return sorted(self.terms.items(), key=lambda ec: drl_key(ec[0]), reverse=True)

    def leading_term(self) -> tuple[tuple, mpq]:
        e = max(self.terms, key=drl_key)
        return e, self.terms[e]

    def content(self) -> mpq:
        """Positive rational ``c`` with ``self / c`` primitive over the integers."""
        from math import gcd, lcm

        if not self.terms:
            return mpq(0)
        num = 0
        den = 1
        for c in self.terms.values():
            num = gcd(num, int(c.numerator))
            den = lcm(den, int(c.denominator))
        return mpq(num, den)

    def primitive(self) -> Poly:
        """Primitive integer associate with positive leading coefficient."""
        if not self.terms:
            return self
        c = self.content()
        if self.leading_term()[1] < 0:
            c = -c
        return self.scale(1 / c)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.ring == other.ring and self.terms == other.terms
        if isinstance(other, _SCALARS):
            return self == self.ring.const(other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ring, frozenset(self.terms.items())))
        return self._hash

    # -- calculus and composition --------------------------------------
    def diff(self, var: str) -> Poly:
        if var not in self.ring.index:
            raise KeyError(f"unknown variable {var!r} in {self.ring!r}")
        i = self.ring.index[var]
        t = {}
        for e, c in self.terms.items():
            k = e[i]
            if k:
                ne = e[:i] + (k - 1,) + e[i + 1 :]
                t[ne] = c * k
        return Poly(self.ring, t)

    def evaluate(self, point: Mapping[str, object]):
        """Evaluate at rational values; every used variable must be given."""
        vals = []
        for n in self.ring.names:
            vals.append(to_q(point[n]) if n in point else None)
        total = mpq(0)
        for e, c in self.terms.items():
            v = c
            for x, k in zip(vals, e):
                if k:
                    if x is None:
                        raise KeyError("point does not assign every variable")
                    v *= x**k
            total += v
        return total

    def subs(self, assignment: Mapping[str, object], ring: PolyRing | None = None):
        return substitute(self, assignment, ring)

    def exact_div(self, other: Poly) -> Poly:
        """Quotient ``q`` with ``self == q * other``; raises if not exact."""
        q, r = self.divmod(other)
        if r:
            raise ArithmeticError("polynomial division is not exact")
        return q

    def divmod(self, other: Poly) -> tuple[Poly, Poly]:
        other = self._coerce(other)
        if not other.terms:
            raise ZeroDivisionError("division by zero polynomial")
        le, lc = other.leading_term()
        quo: dict = {}
        rem: dict = {}
        work = dict(self.terms)
        while work:
            e = max(work, key=drl_key)
            c = work.pop(e)
            if all(a >= b for a, b in zip(e, le)):
                qe = tuple(a - b for a, b in zip(e, le))
                qc = c / lc
                quo[qe] = quo.get(qe, 0) + qc
                for e2, c2 in other.terms.items():
                    if e2 == le:
                        continue
                    ne = tuple(a + b for a, b in zip(qe, e2))
                    v = work.get(ne, 0) - qc * c2
                    if v:
                        work[ne] = v
                    else:
                        work.pop(ne, None)
            else:
                rem[e] = c
        return Poly(self.ring, {e: c for e, c in quo.items() if c}), Poly(self.ring, rem)

    # -- text -------------------------------------------------------------
    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                n if k == 1 else f"{n}^{k}" for n, k in zip(self.ring.names, e) if k
            )
            a = abs(c)
            if not mono:
                body = str(a)
            elif a == 1:
                body = mono
            else:
                body = f"{a}*{mono}"
            if not parts:
                parts.append(("-" if c < 0 else "") + body)
            else:
                parts.append((" - " if c < 0 else " + ") + body)
        return "".join(parts)

    def __repr__(self):
        return f"Poly({str(self)!r})"


def differentiate(p: Poly, var: str) -> Poly:
    return p.diff(var)


def _one_like(sample):
    return sample.one_like() if hasattr(sample, "one_like") else mpq(1)


def substitute(p: Poly, assignment: Mapping[str, object], ring: PolyRing | None = None):
    """Compose ``p`` with ``assignment``.

    Values may be Polys (any ring; converted into ``ring``), rationals, or
    series objects exposing ``one_like``/``zero_like``.  Unassigned
    variables stay fixed, which requires a polynomial target ring.
    """
    names = p.ring.names
    vals: list = []
    series_like = None
    for n in names:
        v = assignment.get(n)
        if v is not None and hasattr(v, "one_like"):
            if series_like is not None and type(series_like) is not type(v):
                raise TypeError("mixed incompatible targets in substitution")
            series_like = v
        vals.append(v)
    if series_like is not None:
        if any(
            vals[i] is None or isinstance(vals[i], Poly)
            for i, n in enumerate(names)
            if any(e[i] for e in p.terms)
        ):
            raise TypeError("mixed incompatible targets: series substitution needs every used variable")
        values = [
            v if v is None or hasattr(v, "one_like") else series_like.one_like() * to_q(v)
            for v in vals
        ]
        zero = series_like.zero_like()
        return _horner_eval(p, values, zero, series_like.one_like())
    if ring is None:
        ring = p.ring
        for v in vals:
            if isinstance(v, Poly):
                ring = v.ring if ring == p.ring else ring
                break
    values = []
    for n, v in zip(names, vals):
        if v is None:
            if n not in ring.index:
                if not any(e[p.ring.index[n]] for e in p.terms):
                    values.append(None)
                    continue
                raise RingMismatch(f"unassigned variable {n!r} missing from target ring")
            values.append(ring.var(n))
        elif isinstance(v, Poly):
            values.append(ring.convert(v))
        else:
            values.append(ring.const(v))
    return _horner_eval(p, values, ring.zero, ring.one)


def _horner_eval(p: Poly, values: list, zero, one):
    # power cache per variable, then sum of scaled monomial products
    cache: list[dict] = [dict() for _ in values]

    def power(i, k):
        d = cache[i]
        if k not in d:
            if k == 1:
                d[k] = values[i]
            else:
                h = k // 2
                d[k] = power(i, h) * power(i, k - h)
        return d[k]

    total = zero
    for e, c in p.sorted_terms():
        term = None
        for i, k in enumerate(e):
            if k:
                f = power(i, k)
                term = f if term is None else term * f
        if term is None:
            total = total + one * c
        else:
            total = total + term * c
    return total


# ---------------------------------------------------------------------------
# grammar: integers, a/b, identifiers, + - * ^ (and **), parentheses


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<id>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>\*\*|[-+*/^()−]))"
)


class _Parser:
    def __init__(self, ring: PolyRing, text: str):
        self.ring = ring
        self.text = text
        self.toks: list[tuple[str, str, int]] = []
        pos = 0
        n = len(text)
        while pos < n:
            if text[pos].isspace():
                pos += 1
                continue
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
            kind = m.lastgroup
            val = m.group(kind)
            start = m.start(kind)
            if val == "−":
                val = "-"
            if val == "**":
                val = "^"
            self.toks.append((kind, val, start))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self):
        t = self.peek()
        self.i += 1
        return t

    def fail(self, msg):
        t = self.peek()
        pos = t[2] if t else len(self.text)
        raise ParseError(msg, self.text, pos)

    def parse(self) -> Poly:
        if not self.toks:
            raise ParseError("empty polynomial", self.text, 0)
        p = self.expr()
        if self.peek() is not None:
            self.fail("unexpected token")
        return p

    def expr(self) -> Poly:
        t = self.peek()
        if t and t[1] in "+-" and t[0] == "op":
            self.take()
            p = self.term()
            if t[1] == "-":
                p = -p
        else:
            p = self.term()
        while True:
            t = self.peek()
            if t and t[0] == "op" and t[1] in "+-":
                self.take()
                q = self.term()
                p = p + q if t[1] == "+" else p - q
            else:
                return p

    def term(self) -> Poly:
        p = self.factor()
        while True:
            t = self.peek()
            if t and t[0] == "op" and t[1] in "*/":
                self.take()
                start = self.peek()
                q = self.factor()
                if t[1] == "*":
                    p = p * q
                else:
                    if not q.is_constant() or q.is_zero():
                        pos = start[2] if start else len(self.text)
                        raise ParseError("division only by nonzero constants", self.text, pos)
                    p = p.scale(1 / q.constant_coeff())
            else:
                return p

    def factor(self) -> Poly:
        base = self.atom()
        t = self.peek()
        if t and t[0] == "op" and t[1] == "^":
            self.take()
            e = self.peek()
            if e is None or e[0] != "num":
                self.fail("exponent must be a nonnegative integer literal")
            self.take()
            return base ** int(e[1])
        return base

    def atom(self) -> Poly:
        t = self.peek()
        if t is None:
            self.fail("unexpected end of input")
        kind, val, pos = t
        if kind == "num":
            self.take()
            return self.ring.const(int(val))
        if kind == "id":
            self.take()
            if val not in self.ring.index:
                raise ParseError(f"unknown variable {val!r}", self.text, pos)
            return self.ring.var(val)
        if val == "(":
            self.take()
            p = self.expr()
            t2 = self.peek()
            if t2 is None or t2[1] != ")":
                self.fail("expected ')'")
            self.take()
            return p
        if val == "-":
            self.take()
            return -self.factor()
        self.fail(f"unexpected token {val!r}")
