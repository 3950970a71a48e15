"""Truncated power series in one variable (``TruncSeries``) and in two
variables with total-degree truncation (``BiSeries``).

Coefficients are ``mpq`` by default but any exact ring element supporting
``+``, ``*`` and truthiness works (``Poly`` coefficients are used for
series whose coefficients depend on other variables).
"""

from __future__ import annotations

from gmpy2 import mpq

from .poly import to_q

DEFAULT_TRUNCATION = 50

__all__ = ["TruncSeries", "BiSeries", "series_nth_root", "DEFAULT_TRUNCATION"]


def _scalar(x):
    return isinstance(x, (int, type(mpq(0))))


class TruncSeries:
    """sum_{i<=N} c_i var^i + O(var^{N+1})."""

    __slots__ = ("coeffs", "prec", "var")

    def __init__(self, coeffs, prec: int = DEFAULT_TRUNCATION, var: str = "t"):
        if prec < 0:
            raise ValueError("truncation order must be >= 0")
        cs = [c if not _scalar(c) else mpq(c) for c in list(coeffs)[: prec + 1]]
        zero = cs[0] * 0 if cs else mpq(0)
        cs.extend([zero] * (prec + 1 - len(cs)))
        self.coeffs = cs
        self.prec = prec
        self.var = var

    @classmethod
    def from_terms(cls, terms, prec: int = DEFAULT_TRUNCATION, var: str = "t"):
        cs = [mpq(0)] * (prec + 1)
        for c, k in terms:
            if k <= prec:
                cs[k] += to_q(c)
        return cls(cs, prec, var)

    def one_like(self) -> TruncSeries:
        return TruncSeries([mpq(1)], self.prec, self.var)

    def zero_like(self) -> TruncSeries:
        return TruncSeries([], self.prec, self.var)

    def _lift(self, other):
        if isinstance(other, TruncSeries):
            return other
        return TruncSeries([other], self.prec, self.var)

    def __add__(self, other):
        o = self._lift(other)
        n = min(self.prec, o.prec)
        return TruncSeries([a + b for a, b in zip(self.coeffs[: n + 1], o.coeffs[: n + 1])], n, self.var)

    __radd__ = __add__

    def __neg__(self):
        return TruncSeries([-a for a in self.coeffs], self.prec, self.var)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, TruncSeries):
            return TruncSeries([a * other for a in self.coeffs], self.prec, self.var)
        n = min(self.prec, other.prec)
        a = self.coeffs
        b = other.coeffs
        va = self.valuation()
        vb = other.valuation()
        zero = a[0] * 0
        out = [zero] * (n + 1)
        if va is None or vb is None:
            return TruncSeries(out, n, self.var)
        nzb = [(j, b[j]) for j in range(vb, n + 1) if b[j]]
        for i in range(va, n - vb + 1):
            ai = a[i]
            if not ai:
                continue
            lim = n - i
            for j, bj in nzb:
                if j > lim:
                    break
                out[i + j] = out[i + j] + ai * bj
        return TruncSeries(out, n, self.var)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result = self.one_like()
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if not isinstance(other, TruncSeries):
            return NotImplemented
        n = min(self.prec, other.prec)
        return self.coeffs[: n + 1] == other.coeffs[: n + 1]

    __hash__ = None

    def valuation(self):
        """Index of the first nonzero coefficient, or ``None`` if zero to precision."""
        for i, c in enumerate(self.coeffs):
            if c:
                return i
        return None

    def is_zero(self) -> bool:
        return self.valuation() is None

    def shift(self, k: int) -> TruncSeries:
        """Divide by var^k (exact when the valuation is at least k); precision drops by k."""
        if k == 0:
            return self
        if any(self.coeffs[:k]):
            raise ArithmeticError("series not divisible by requested power")
        return TruncSeries(self.coeffs[k:], self.prec - k, self.var)

    def truncate(self, n: int) -> TruncSeries:
        return TruncSeries(self.coeffs[: n + 1], min(n, self.prec), self.var)

    def inverse(self) -> TruncSeries:
        c0 = self.coeffs[0]
        if not c0:
            raise ZeroDivisionError("series is not a unit")
        n = self.prec
        inv0 = 1 / c0
        out = [inv0] + [mpq(0)] * n
        a = self.coeffs
        for k in range(1, n + 1):
            s = 0
            for j in range(1, k + 1):
                if a[j]:
                    s += a[j] * out[k - j]
            out[k] = -s * inv0
        return TruncSeries(out, n, self.var)

    def divide(self, other: TruncSeries) -> TruncSeries:
        """Exact quotient by a series of valuation v <= own valuation."""
        v = other.valuation()
        if v is None:
            raise ZeroDivisionError("division by a series that is zero to precision")
        num = self.shift(v)
        den = other.shift(v)
        n = min(num.prec, den.prec)
        return num.truncate(n) * den.truncate(n).inverse()

    def derivative(self) -> TruncSeries:
        return TruncSeries([self.coeffs[i] * i for i in range(1, self.prec + 1)], max(self.prec - 1, 0), self.var)

    def compose(self, inner: TruncSeries) -> TruncSeries:
        """self(inner(t)) for inner with zero constant term."""
        if inner.coeffs[0]:
            raise ValueError("inner series must have zero constant term")
        n = min(self.prec, inner.prec)
        acc = TruncSeries([self.coeffs[n]], n, self.var)
        for i in range(n - 1, -1, -1):
            acc = acc * inner + self.coeffs[i]
        return acc

    def terms(self) -> list[list]:
        return [[str(c), i] for i, c in enumerate(self.coeffs) if c]

    def __repr__(self):
        body = " + ".join(f"({c})*{self.var}^{i}" for i, c in enumerate(self.coeffs) if c) or "0"
        return f"TruncSeries({body} + O({self.var}^{self.prec + 1}))"


class BiSeries:
    """sum c_ij t^i s^j over i + j <= N."""

    __slots__ = ("c", "prec")

    def __init__(self, coeffs: dict | None = None, prec: int = DEFAULT_TRUNCATION):
        self.prec = prec
        self.c = {}
        for (i, j), v in (coeffs or {}).items():
            if i + j <= prec and v:
                self.c[(i, j)] = v if not _scalar(v) else mpq(v)

    @classmethod
    def from_terms(cls, terms, prec: int = DEFAULT_TRUNCATION) -> BiSeries:
        """Build from ``[[coeff, i, j], ...]`` meaning coeff * t^i * s^j."""
        d: dict = {}
        for c, i, j in terms:
            if i < 0 or j < 0:
                raise ValueError("negative exponent in series term list")
            d[(i, j)] = d.get((i, j), mpq(0)) + to_q(c)
        return cls(d, prec)

    @classmethod
    def t(cls, prec: int = DEFAULT_TRUNCATION) -> BiSeries:
        return cls({(1, 0): 1}, prec)

    @classmethod
    def s(cls, prec: int = DEFAULT_TRUNCATION) -> BiSeries:
        return cls({(0, 1): 1}, prec)

    def one_like(self) -> BiSeries:
        return BiSeries({(0, 0): 1}, self.prec)

    def zero_like(self) -> BiSeries:
        return BiSeries({}, self.prec)

    def _lift(self, other):
        if isinstance(other, BiSeries):
            return other
        return BiSeries({(0, 0): to_q(other)}, self.prec)

    def __add__(self, other):
        o = self._lift(other)
        n = min(self.prec, o.prec)
        d = {k: v for k, v in self.c.items() if sum(k) <= n}
        for k, v in o.c.items():
            if sum(k) <= n:
                w = d.get(k, 0) + v
                if w:
                    d[k] = w
                else:
                    d.pop(k, None)
        return BiSeries(d, n)

    __radd__ = __add__

    def __neg__(self):
        return BiSeries({k: -v for k, v in self.c.items()}, self.prec)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, BiSeries):
            o = to_q(other)
            return BiSeries({k: v * o for k, v in self.c.items()}, self.prec)
        n = min(self.prec, other.prec)
        d: dict = {}
        items_b = sorted(other.c.items(), key=lambda kv: sum(kv[0]))
        for (i1, j1), v1 in self.c.items():
            room = n - i1 - j1
            if room < 0:
                continue
            for (i2, j2), v2 in items_b:
                if i2 + j2 > room:
                    break
                k = (i1 + i2, j1 + j2)
                d[k] = d.get(k, 0) + v1 * v2
        return BiSeries(d, n)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        result = self.one_like()
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if not isinstance(other, BiSeries):
            return NotImplemented
        n = min(self.prec, other.prec)
        a = {k: v for k, v in self.c.items() if sum(k) <= n}
        b = {k: v for k, v in other.c.items() if sum(k) <= n}
        return a == b

    __hash__ = None

    def truncate(self, n: int) -> BiSeries:
        return BiSeries(self.c, min(n, self.prec))

    def constant(self):
        return self.c.get((0, 0), mpq(0))

    def is_zero(self) -> bool:
        return not self.c

    def ord_s(self):
        """Smallest s-exponent with a nonzero coefficient (None if zero)."""
        return min((j for (_, j) in self.c), default=None)

    def s_coefficient(self, j: int) -> TruncSeries:
        """Coefficient of s^j as a series in t (precision prec - j)."""
        n = self.prec - j
        cs = [mpq(0)] * (n + 1)
        for (i, jj), v in self.c.items():
            if jj == j:
                cs[i] = v
        return TruncSeries(cs, n, "t")

    def diff_t(self) -> BiSeries:
        return BiSeries({(i - 1, j): v * i for (i, j), v in self.c.items() if i}, self.prec - 1)

    def diff_s(self) -> BiSeries:
        return BiSeries({(i, j - 1): v * j for (i, j), v in self.c.items() if j}, self.prec - 1)

    def inverse(self) -> BiSeries:
        c0 = self.constant()
        if not c0:
            raise ZeroDivisionError("bivariate series is not a unit")
        x = self * (1 / c0) - 1  # zero constant term
        acc = self.one_like()
        term = self.one_like()
        for _ in range(self.prec):
            term = term * (-x)
            if term.is_zero():
                break
            acc = acc + term
        return acc * (1 / c0)

    def compose_s(self, inner: BiSeries) -> BiSeries:
        """Substitute s := inner(t, s) where inner has zero constant term."""
        if inner.constant():
            raise ValueError("inner series must have zero constant term")
        n = min(self.prec, inner.prec)
        maxj = max((j for (_, j) in self.c), default=0)
        # Horner in s with t-only coefficients
        acc = self.zero_like().truncate(n)
        for j in range(maxj, -1, -1):
            coeff_j = BiSeries({(i, 0): v for (i, jj), v in self.c.items() if jj == j}, n)
            acc = acc * inner + coeff_j
        return acc

    def divide_by_s_power(self, k: int) -> BiSeries:
        if any(j < k for (_, j) in self.c):
            raise ArithmeticError(f"series not divisible by s^{k}")
        return BiSeries({(i, j - k): v for (i, j), v in self.c.items()}, self.prec - k)

    def terms(self) -> list[list]:
        return [[str(v), i, j] for (i, j), v in sorted(self.c.items())]

    def __repr__(self):
        body = " + ".join(f"({v})*t^{i}*s^{j}" for (i, j), v in sorted(self.c.items())) or "0"
        return f"BiSeries({body}; N={self.prec})"


def series_nth_root(c, n: int):
    """n-th root of a (Trunc|Bi)Series with constant term 1, to its truncation."""
    if not isinstance(n, int) or n < 1:
        raise ValueError("root index must be an integer >= 1")
    if isinstance(c, TruncSeries):
        c0 = c.coeffs[0]
    elif isinstance(c, BiSeries):
        c0 = c.constant()
    else:
        raise TypeError("series_nth_root expects a TruncSeries or BiSeries")
    if c0 != 1:
        raise ValueError("constant term must equal 1")
    if n == 1:
        return c
    x = c - 1
    # (1+x)^(1/n) = sum_k binom(1/n, k) x^k, by Horner in x
    e = mpq(1, n)
    binoms = [mpq(1)]
    for k in range(1, c.prec + 1):
        binoms.append(binoms[-1] * (e - (k - 1)) / k)
    acc = c.one_like() * binoms[-1]
    for k in range(c.prec - 1, -1, -1):
        acc = acc * x + binoms[k]
    return acc
