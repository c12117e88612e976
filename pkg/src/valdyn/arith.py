"""Exact arithmetic over Q and over real quadratic fields Q(sqrt(d)).

Everything here is integer/Fraction based; no floating point enters any
decision.  Floats appear only in ``QuadElem.__float__`` and are meant for
display.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

Rat = Fraction

RatLike = Union[int, Fraction]


class MixedFieldError(ValueError):
    """Raised when combining elements of Q(sqrt(d)) with different d."""


def isqrt_exact(n: int) -> int | None:
    """Integer square root of n if n is a perfect square, else None."""
    if n < 0:
        return None
    r = math.isqrt(n)
    return r if r * r == n else None


def squarefree_decompose(n: int) -> tuple[int, int]:
    """Write n > 0 as f**2 * d with d squarefree; returns (f, d)."""
    if n <= 0:
        raise ValueError(f"expected a positive integer, got {n}")
    f, d, p = 1, 1, 2
    m = n
    while p * p <= m:
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            f *= p ** (e // 2)
            if e % 2:
                d *= p
        p += 1 if p == 2 else 2
    d *= m
    return f, d


@lru_cache(maxsize=None)
def is_squarefree(n: int) -> bool:
    return n > 1 and squarefree_decompose(n)[0] == 1


@dataclass(frozen=True)
class QuadElem:
    """An element a + b*sqrt(d) of the real quadratic field Q(sqrt(d)).

    d must be squarefree and >= 2.  Elements with distinct d never mix;
    attempting to combine them raises MixedFieldError rather than guessing
    an embedding.
    """

    d: int
    a: Fraction
    b: Fraction

    def __post_init__(self) -> None:
        if not is_squarefree(self.d):
            raise ValueError(f"d = {self.d} is not a squarefree integer >= 2")
        if not isinstance(self.a, Fraction):
            object.__setattr__(self, "a", Fraction(self.a))
        if not isinstance(self.b, Fraction):
            object.__setattr__(self, "b", Fraction(self.b))

    # -- construction helpers -------------------------------------------------

    @staticmethod
    def of(d: int, a: RatLike, b: RatLike = 0) -> "QuadElem":
        return QuadElem(d, Fraction(a), Fraction(b))

    @staticmethod
    def sqrt_of(d: int) -> "QuadElem":
        return QuadElem(d, Fraction(0), Fraction(1))

    def _coerce(self, other) -> "QuadElem":
        if isinstance(other, QuadElem):
            if other.d != self.d:
                raise MixedFieldError(
                    f"cannot combine sqrt({self.d}) with sqrt({other.d})"
                )
            return other
        if isinstance(other, (int, Fraction)):
            return QuadElem(self.d, Fraction(other), Fraction(0))
        return NotImplemented  # type: ignore[return-value]

    # -- ring operations ------------------------------------------------------

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return QuadElem(self.d, self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self) -> "QuadElem":
        return QuadElem(self.d, -self.a, -self.b)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return QuadElem(self.d, self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return QuadElem(
            self.d,
            self.a * o.a + self.d * self.b * o.b,
            self.a * o.b + self.b * o.a,
        )

    __rmul__ = __mul__

    def inverse(self) -> "QuadElem":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt(d))")
        return QuadElem(self.d, self.a / n, -self.b / n)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k: int) -> "QuadElem":
        if k < 0:
            return self.inverse() ** (-k)
        out = QuadElem(self.d, Fraction(1), Fraction(0))
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # -- field invariants -----------------------------------------------------

    def conj(self) -> "QuadElem":
        """Galois conjugate a - b*sqrt(d)."""
        return QuadElem(self.d, self.a, -self.b)

    def norm(self) -> Fraction:
        """Field norm a^2 - d*b^2 = x * conj(x)."""
        return self.a * self.a - self.d * self.b * self.b

    def trace(self) -> Fraction:
        return 2 * self.a

    def sign(self) -> int:
        """Exact sign of a + b*sqrt(d), by integer comparison only."""
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sb == 0:
            return sa
        if sa == 0:
            return sb
        if sa == sb:
            return sa
        # opposite signs: compare a^2 against d*b^2
        lhs = self.a * self.a
        rhs = self.d * self.b * self.b
        if lhs == rhs:
            return 0
        return sa if lhs > rhs else sb

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_rational(self) -> bool:
        return self.b == 0

    def rational_value(self) -> Fraction:
        if self.b != 0:
            raise ValueError(f"{self} is irrational")
        return self.a

    def is_integral(self) -> bool:
        """Membership in the ring of integers of Q(sqrt(d)).

        x is an algebraic integer iff both its trace 2a and norm a^2 - d b^2
        are rational integers; this covers the half-integer basis of
        d = 1 mod 4 without a case split.
        """
        return self.trace().denominator == 1 and self.norm().denominator == 1

    def is_unit(self) -> bool:
        return self.is_integral() and abs(self.norm()) == 1

    def is_totally_positive(self) -> bool:
        return self.sign() > 0 and self.conj().sign() > 0

    # -- order ----------------------------------------------------------------

    def _cmp(self, other) -> int:
        o = self._coerce(other)
        return (self - o).sign()

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    # -- presentation ----------------------------------------------------------

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def __str__(self) -> str:
        return f"{self.a}+{self.b}*sqrt({self.d})"

    def minimal_polynomial(self) -> tuple[int, ...]:
        """Primitive integer coefficients, leading first.

        Rational x = p/q gives (q, -p); irrational x gives the integer
        multiple of x^2 - tr(x) x + norm(x).
        """
        if self.b == 0:
            return (self.a.denominator, -self.a.numerator)
        t, n = -self.trace(), self.norm()
        den = math.lcm(t.denominator, n.denominator)
        c2, c1, c0 = den, int(t * den), int(n * den)
        g = math.gcd(c2, math.gcd(abs(c1), abs(c0)))
        return (c2 // g, c1 // g, c0 // g)


def quad_from_root(d_times_square: int, a: RatLike, b_scaled: RatLike) -> QuadElem:
    """Build a + b*sqrt(n) where n = f^2 d need not be squarefree."""
    f, d = squarefree_decompose(d_times_square)
    if d == 1:
        return QuadElem(2, Fraction(a) + Fraction(b_scaled) * f, Fraction(0))
    return QuadElem(d, Fraction(a), Fraction(b_scaled) * f)


_QUAD_RE = re.compile(
    r"""^\s*
    (?P<a>[+-]?\d+(?:/\d+)?)?
    \s*(?P<op>[+-])?\s*
    (?:(?P<b>\d+(?:/\d+)?)\s*\*\s*)?
    sqrt\(\s*(?P<d>\d+)\s*\)
    \s*$""",
    re.VERBOSE,
)


def parse_quad(text: str, d: int | None = None) -> QuadElem:
    """Parse the fixture syntax "a+b*sqrt(d)" with a, b rationals "p/q".

    Plain rationals are accepted when a field tag d is supplied.
    """
    text = text.strip()
    m = _QUAD_RE.match(text)
    if m is None:
        a = Fraction(text)
        if d is None:
            raise ValueError(f"rational literal {text!r} needs an explicit d")
        return QuadElem(d, a, Fraction(0))
    a = Fraction(m.group("a")) if m.group("a") else Fraction(0)
    b = Fraction(m.group("b")) if m.group("b") else Fraction(1)
    if m.group("op") == "-":
        b = -b
    dd = int(m.group("d"))
    if d is not None and dd != d:
        raise MixedFieldError(f"literal has sqrt({dd}), expected sqrt({d})")
    return QuadElem(dd, a, b)


def _pell_fundamental(d: int) -> QuadElem:
    """Smallest unit > 1 of Z[sqrt(d)], via the continued fraction of sqrt(d)."""
    a0 = math.isqrt(d)
    m, q, a = 0, 1, a0
    h_prev, h = 1, a0
    k_prev, k = 0, 1
    while True:
        if h * h - d * k * k in (1, -1):
            return QuadElem(d, Fraction(h), Fraction(k))
        m = a * q - m
        q = (d - m * m) // q
        a = (a0 + m) // q
        h_prev, h = h, a * h + h_prev
        k_prev, k = k, a * k + k_prev


def fundamental_unit(d: int) -> QuadElem:
    """Fundamental unit > 1 of the full ring of integers of Q(sqrt(d))."""
    u = _pell_fundamental(d)
    if d % 4 == 1:
        # scan for a smaller half-integer unit (x + y*sqrt(d))/2, x = y mod 2
        y_max = int(u.b)
        best = u
        for y in range(1, y_max + 1):
            for target in (4, -4):
                x2 = d * y * y + target
                x = isqrt_exact(x2)
                if x is not None and (x - y) % 2 == 0:
                    cand = QuadElem(d, Fraction(x, 2), Fraction(y, 2))
                    if 1 < cand < best:
                        best = cand
        u = best
    return u


def fundamental_totally_positive_unit(d: int) -> QuadElem:
    """Generator > 1 of the totally positive units of the ring of integers."""
    u = fundamental_unit(d)
    return u if u.norm() == 1 else u * u


def unit_log_index(x: QuadElem, base: QuadElem) -> int | None:
    """Exact k with x = base**k, for base > 1; None if no such k exists."""
    one = QuadElem(x.d, Fraction(1), Fraction(0))
    if x.sign() <= 0:
        return None
    if x == one:
        return 0
    k, cur = 0, x
    if cur > 1:
        while cur > 1:
            cur = cur / base
            k += 1
            if k > 4096:
                return None
        return k if cur == one else None
    while cur < 1:
        cur = cur * base
        k += 1
        if k > 4096:
            return None
    return -k if cur == one else None
