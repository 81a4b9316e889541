"""Exact arithmetic in Z[1/m].

An :class:`MAdic` stores ``num * m**(-exp)`` in reduced form: either ``exp == 0``
or ``m`` does not divide ``num``.  Values are immutable and hashable, so they
can be used inside group elements.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

Number = Union[int, "MAdic"]


class MAdic:
    __slots__ = ("num", "exp", "base")

    def __init__(self, num: int = 0, exp: int = 0, base: int = 2):
        if base < 2:
            raise ValueError(f"base must be >= 2, got {base}")
        if exp < 0:
            num *= base ** (-exp)
            exp = 0
        if num == 0:
            exp = 0
        else:
            while exp > 0 and num % base == 0:
                num //= base
                exp -= 1
        self.num = num
        self.exp = exp
        self.base = base

    @classmethod
    def from_fraction(cls, x: Union[int, Fraction], base: int) -> "MAdic":
        x = Fraction(x)
        den = x.denominator
        e = 0
        power = 1
        while power % den:
            if e > den.bit_length():
                raise ValueError(f"{x} is not in Z[1/{base}]")
            power *= base
            e += 1
        return cls(x.numerator * (power // den), e, base)

    def _coerce(self, other: Number) -> "MAdic":
        if isinstance(other, MAdic):
            if other.base != self.base:
                raise ValueError(f"mixing bases {self.base} and {other.base}")
            return other
        if isinstance(other, int):
            return MAdic(other, 0, self.base)
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other: Number) -> "MAdic":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        m = self.base
        if self.exp >= o.exp:
            return MAdic(self.num + o.num * m ** (self.exp - o.exp), self.exp, m)
        return MAdic(self.num * m ** (o.exp - self.exp) + o.num, o.exp, m)

    __radd__ = __add__

    def __neg__(self) -> "MAdic":
        return MAdic(-self.num, self.exp, self.base)

    def __sub__(self, other: Number) -> "MAdic":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other: Number) -> "MAdic":
        return (-self) + other

    def __mul__(self, other: Number) -> "MAdic":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return MAdic(self.num * o.num, self.exp + o.exp, self.base)

    __rmul__ = __mul__

    def scale(self, k: int) -> "MAdic":
        """Multiply by ``base**k`` (``k`` may be negative)."""
        if k >= 0:
            if k <= self.exp:
                return MAdic(self.num, self.exp - k, self.base)
            return MAdic(self.num * self.base ** (k - self.exp), 0, self.base)
        return MAdic(self.num, self.exp - k, self.base)

    def mod1(self) -> "MAdic":
        """Representative of ``self + Z`` in ``[0, 1)``."""
        if self.exp == 0:
            return MAdic(0, 0, self.base)
        return MAdic(self.num % self.base**self.exp, self.exp, self.base)

    def valuation(self) -> float:
        """The ``m``-adic order: ``-exp`` if ``exp > 0``, else the power of ``m`` dividing ``num``."""
        if self.num == 0:
            return float("inf")
        if self.exp:
            return -self.exp
        v, n = 0, self.num
        while n % self.base == 0:
            n //= self.base
            v += 1
        return v

    def to_fraction(self) -> Fraction:
        return Fraction(self.num, self.base**self.exp)

    def is_zero(self) -> bool:
        return self.num == 0

    def __abs__(self) -> "MAdic":
        return MAdic(abs(self.num), self.exp, self.base)

    def _cmp_key(self, other: Number):
        o = self._coerce(other)
        if o is NotImplemented:
            raise TypeError(f"cannot compare MAdic with {type(other).__name__}")
        m = self.base
        e = max(self.exp, o.exp)
        return self.num * m ** (e - self.exp), o.num * m ** (e - o.exp)

    def __lt__(self, other: Number) -> bool:
        a, b = self._cmp_key(other)
        return a < b

    def __le__(self, other: Number) -> bool:
        a, b = self._cmp_key(other)
        return a <= b

    def __gt__(self, other: Number) -> bool:
        a, b = self._cmp_key(other)
        return a > b

    def __ge__(self, other: Number) -> bool:
        a, b = self._cmp_key(other)
        return a >= b

    def __eq__(self, other: object) -> bool:
        if isinstance(other, MAdic):
            return self.num == other.num and self.exp == other.exp and self.base == other.base
        if isinstance(other, int):
            return self.exp == 0 and self.num == other
        return NotImplemented

    def __hash__(self) -> int:
        if self.exp == 0:
            return hash(self.num)
        return hash((self.num, self.exp))

    def __repr__(self) -> str:
        if self.exp == 0:
            return f"MAdic({self.num}, base={self.base})"
        return f"MAdic({self.num}/{self.base}^{self.exp})"

    def __str__(self) -> str:
        return f"{self.num}/{self.exp}" if self.exp else str(self.num)

    @classmethod
    def parse(cls, s: str, base: int) -> "MAdic":
        if "/" in s:
            num, exp = s.split("/")
            return cls(int(num), int(exp), base)
        return cls(int(s), 0, base)
