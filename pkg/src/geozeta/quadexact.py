"""Exact arithmetic in a real quadratic field.

Elements are stored as ``(p + q*sqrt(D)) / r`` with integer ``p, q``,
positive ``r`` and a fixed nonsquare radicand ``D``.  Every comparison,
floor and ceiling is decided with integer arithmetic only.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational


def is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


def _floor_q_sqrt(q: int, D: int) -> int:
    """floor(q * sqrt(D)) for nonsquare D."""
    if q == 0:
        return 0
    root = math.isqrt(q * q * D)
    return root if q > 0 else -root - 1


class QuadExact:
    """An element ``(p + q*sqrt(D))/r`` of Q(sqrt(D))."""

    __slots__ = ("p", "q", "r", "D")

    def __init__(self, p: int, q: int = 0, r: int = 1, D: int = 5):
        if r == 0:
            raise ZeroDivisionError("zero denominator")
        if D <= 1 or is_square(D):
            raise ValueError(f"radicand must be a positive nonsquare, got {D}")
        p, q, r = int(p), int(q), int(r)
        if r < 0:
            p, q, r = -p, -q, -r
        g = math.gcd(math.gcd(p, q), r)
        self.p, self.q, self.r, self.D = p // g, q // g, r // g, int(D)

    @classmethod
    def rational(cls, x, D: int) -> "QuadExact":
        x = Fraction(x)
        return cls(x.numerator, 0, x.denominator, D)

    @classmethod
    def sqrt(cls, D: int) -> "QuadExact":
        return cls(0, 1, 1, D)

    # -- coercion -------------------------------------------------------
    def _coerce(self, other) -> "QuadExact":
        if isinstance(other, QuadExact):
            if other.D != self.D:
                raise ValueError(f"mixed radicands {self.D} and {other.D}")
            return other
        if isinstance(other, (int, Rational)):
            return QuadExact.rational(other, self.D)
        return NotImplemented

    # -- field operations -----------------------------------------------
    def __neg__(self) -> "QuadExact":
        return QuadExact(-self.p, -self.q, self.r, self.D)

    def __pos__(self) -> "QuadExact":
        return self

    def __add__(self, other) -> "QuadExact":
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadExact(self.p * o.r + o.p * self.r, self.q * o.r + o.q * self.r,
                         self.r * o.r, self.D)

    __radd__ = __add__

    def __sub__(self, other) -> "QuadExact":
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other) -> "QuadExact":
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other) -> "QuadExact":
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadExact(self.p * o.p + self.q * o.q * self.D,
                         self.p * o.q + self.q * o.p,
                         self.r * o.r, self.D)

    __rmul__ = __mul__

    def inverse(self) -> "QuadExact":
        # 1/a = conj(a) / N(a); N(a) r^2 = p^2 - D q^2
        n = self.p * self.p - self.D * self.q * self.q
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        return QuadExact(self.p * self.r, -self.q * self.r, n, self.D)

    def __truediv__(self, other) -> "QuadExact":
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other) -> "QuadExact":
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o * self.inverse()

    def __pow__(self, k: int) -> "QuadExact":
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result = QuadExact(1, 0, 1, self.D)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # -- conjugation, norm, trace ---------------------------------------
    def conj(self) -> "QuadExact":
        return QuadExact(self.p, -self.q, self.r, self.D)

    def norm(self) -> Fraction:
        return Fraction(self.p * self.p - self.D * self.q * self.q, self.r * self.r)

    def trace(self) -> Fraction:
        return Fraction(2 * self.p, self.r)

    def is_rational(self) -> bool:
        return self.q == 0

    # -- exact ordering --------------------------------------------------
    def sign(self) -> int:
        """Sign of p + q*sqrt(D) (r > 0)."""
        p, q = self.p, self.q
        if q == 0:
            return (p > 0) - (p < 0)
        if p == 0 or (p > 0) == (q > 0):
            return 1 if q > 0 else -1
        # opposite signs: compare p^2 with D q^2 (never equal, D nonsquare)
        if p * p > self.D * q * q:
            return 1 if p > 0 else -1
        return 1 if q > 0 else -1

    def floor(self) -> int:
        return (self.p + _floor_q_sqrt(self.q, self.D)) // self.r

    def ceil(self) -> int:
        return -((-self).floor())

    def __floor__(self) -> int:
        return self.floor()

    def __ceil__(self) -> int:
        return self.ceil()

    def _cmp(self, other) -> int:
        o = self._coerce(other)
        if o is NotImplemented:
            raise TypeError(f"cannot compare QuadExact with {type(other).__name__}")
        return (self - o).sign()

    def __lt__(self, other) -> bool:
        return self._cmp(other) < 0

    def __le__(self, other) -> bool:
        return self._cmp(other) <= 0

    def __gt__(self, other) -> bool:
        return self._cmp(other) > 0

    def __ge__(self, other) -> bool:
        return self._cmp(other) >= 0

    def __eq__(self, other) -> bool:
        if isinstance(other, QuadExact):
            return (self.D, self.p, self.q, self.r) == (other.D, other.p, other.q, other.r)
        if isinstance(other, (int, Rational)):
            return self.q == 0 and Fraction(self.p, self.r) == other
        return NotImplemented

    def __hash__(self) -> int:
        if self.q == 0:
            return hash(Fraction(self.p, self.r))
        return hash((self.p, self.q, self.r, self.D))

    def __abs__(self) -> "QuadExact":
        return -self if self.sign() < 0 else self

    def __bool__(self) -> bool:
        return self.p != 0 or self.q != 0

    def __float__(self) -> float:
        # exact-ish: avoid cancellation by going through the conjugate when needed
        s = math.sqrt(self.D)
        num = self.p + self.q * s
        if self.q and self.p and (self.p > 0) != (self.q > 0) and abs(num) < 1e-6 * abs(self.p):
            n = self.p * self.p - self.D * self.q * self.q
            return n / ((self.p - self.q * s) * self.r)
        return num / self.r

    # -- rendering -------------------------------------------------------
    def __str__(self) -> str:
        sign = "-" if self.q < 0 else "+"
        return f"({self.p}{sign}{abs(self.q)}*sqrt({self.D}))/{self.r}"

    def __repr__(self) -> str:
        return f"QuadExact({self.p}, {self.q}, {self.r}, D={self.D})"

    def half_form(self, squarefree: bool = False) -> str:
        """Render as "(v+u*sqrt(d))/2" with integers v, u (algebraic integers only),
        d = D or its squarefree part."""
        e = self.simplified() if squarefree else self
        v, u = Fraction(2 * e.p, e.r), Fraction(2 * e.q, e.r)
        if v.denominator != 1 or u.denominator != 1:
            return str(e)
        sign = "-" if u < 0 else "+"
        return f"({v.numerator}{sign}{abs(u.numerator)}*sqrt({e.D}))/2"

    def simplified(self) -> "QuadExact":
        """Same value with the radicand's square part pulled out."""
        k, d0 = 1, self.D
        f = 2
        while f * f <= d0:
            while d0 % (f * f) == 0:
                d0 //= f * f
                k *= f
            f += 1
        return QuadExact(self.p, self.q * k, self.r, d0)

    @classmethod
    def parse(cls, text: str) -> "QuadExact":
        m = re.fullmatch(r"\(\s*(-?\d+)\s*([+-])\s*(\d+)\*sqrt\((\d+)\)\s*\)\s*/\s*(\d+)",
                         text.strip())
        if not m:
            raise ValueError(f"malformed quadratic literal {text!r}")
        p, sgn, q, D, r = m.groups()
        q = int(q) if sgn == "+" else -int(q)
        return cls(int(p), q, int(r), int(D))
