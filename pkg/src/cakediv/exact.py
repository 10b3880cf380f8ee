"""Exact arithmetic in the ordered field Q(sqrt d).

A :class:`Scalar` is stored as ``(a + b*sqrt(d)) / den`` with integers
``a, b, den``, ``den > 0`` and ``gcd(a, b, den) == 1``.  Pure rationals are
stored with ``b == 0`` and ``d == 0`` so they mix freely with any radicand.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Union

from .errors import ConfigurationError

DEFAULT_RADICAND = 5

Number = Union["Scalar", int, Fraction]


@lru_cache(maxsize=None)
def _check_radicand(d: int) -> int:
    if d < 0:
        raise ConfigurationError(f"radicand must be nonnegative, got {d}")
    if d in (0, 1):
        return d
    k = 2
    while k * k <= d:
        if d % (k * k) == 0:
            raise ConfigurationError(f"radicand {d} is not squarefree")
        k += 1
    return d


def _sign(a: int, b: int, d: int) -> int:
    """Sign of a + b*sqrt(d) for an irrational sqrt(d) (or b == 0)."""
    if b == 0:
        return (a > 0) - (a < 0)
    if a >= 0 and b > 0:
        return 1
    if a <= 0 and b < 0:
        return -1
    # opposite signs: compare a^2 with b^2 d (never equal, sqrt d is irrational)
    if a * a > b * b * d:
        return 1 if a > 0 else -1
    return 1 if b > 0 else -1


def _floor_surd(b: int, d: int) -> int:
    """floor(b * sqrt(d))."""
    if b == 0:
        return 0
    root = math.isqrt(b * b * d)
    return root if b > 0 else -root - 1


class Scalar:
    """An element ``rat + coef*sqrt(d)`` of Q(sqrt d)."""

    __slots__ = ("_a", "_b", "_den", "_d")

    def __init__(self, rat: Union[int, Fraction, str] = 0, coef: Union[int, Fraction] = 0,
                 d: int = 0):
        if isinstance(rat, str):
            parsed = Scalar.parse(rat, d or DEFAULT_RADICAND)
            self._a, self._b, self._den, self._d = parsed._a, parsed._b, parsed._den, parsed._d
            return
        rat = Fraction(rat)
        coef = Fraction(coef)
        if coef and d == 0:
            raise ConfigurationError("a nonzero surd part needs a positive radicand")
        den = rat.denominator * coef.denominator // math.gcd(rat.denominator, coef.denominator)
        a = rat.numerator * (den // rat.denominator)
        b = coef.numerator * (den // coef.denominator)
        self._set(a, b, den, d)

    def _set(self, a: int, b: int, den: int, d: int) -> None:
        if not b:
            g = math.gcd(a, den)
            if g != 1:
                a, den = a // g, den // g
            self._a, self._b, self._den, self._d = a, 0, den, 0
            return
        if d:
            _check_radicand(d)
            if d == 1:
                a, b, d = a + b, 0, 0
        if not b:
            b, d = 0, 0
        g = math.gcd(math.gcd(a, b), den)
        if g != 1:
            a, b, den = a // g, b // g, den // g
        self._a, self._b, self._den, self._d = a, b, den, d

    @classmethod
    def _raw(cls, a: int, b: int, den: int, d: int) -> "Scalar":
        obj = cls.__new__(cls)
        if den < 0:
            a, b, den = -a, -b, -den
        if not b:
            g = math.gcd(a, den)
            if g != 1:
                a, den = a // g, den // g
            obj._a, obj._b, obj._den, obj._d = a, 0, den, 0
            return obj
        obj._set(a, b, den, d)
        return obj

    @classmethod
    def of(cls, x: Number) -> "Scalar":
        if isinstance(x, Scalar):
            return x
        if isinstance(x, int):
            return cls._raw(x, 0, 1, 0)
        if isinstance(x, Fraction):
            return cls._raw(x.numerator, 0, x.denominator, 0)
        if isinstance(x, str):
            return cls.parse(x)
        raise TypeError(f"cannot convert {type(x).__name__} to Scalar")

    @classmethod
    def golden(cls) -> "Scalar":
        """The golden-ratio entitlement (-1 + sqrt 5)/2."""
        return cls._raw(-1, 1, 2, 5)

    # -- components -------------------------------------------------------
    @property
    def rat(self) -> Fraction:
        return Fraction(self._a, self._den)

    @property
    def coef(self) -> Fraction:
        return Fraction(self._b, self._den)

    @property
    def radicand(self) -> int:
        return self._d

    def is_rational(self) -> bool:
        return self._b == 0

    def as_fraction(self) -> Fraction:
        if self._b:
            raise ValueError(f"{self} is irrational")
        return Fraction(self._a, self._den)

    # -- arithmetic -------------------------------------------------------
    def _common_d(self, other: "Scalar") -> int:
        if self._d == other._d or not other._d:
            return self._d
        if not self._d:
            return other._d
        raise ConfigurationError(f"mismatched radicands {self._d} and {other._d}")

    def __add__(self, other: Number) -> "Scalar":
        if not isinstance(other, Scalar):
            if isinstance(other, int):
                return Scalar._raw(self._a + other * self._den, self._b, self._den, self._d)
            try:
                other = Scalar.of(other)
            except TypeError:
                return NotImplemented
        if not (self._b or other._b):
            return Scalar._raw(self._a * other._den + other._a * self._den, 0,
                               self._den * other._den, 0)
        d = self._common_d(other)
        if self._den == other._den:
            return Scalar._raw(self._a + other._a, self._b + other._b, self._den, d)
        return Scalar._raw(self._a * other._den + other._a * self._den,
                           self._b * other._den + other._b * self._den,
                           self._den * other._den, d)

    __radd__ = __add__

    def __neg__(self) -> "Scalar":
        obj = Scalar.__new__(Scalar)
        obj._a, obj._b, obj._den, obj._d = -self._a, -self._b, self._den, self._d
        return obj

    def __pos__(self) -> "Scalar":
        return self

    def __sub__(self, other: Number) -> "Scalar":
        if not isinstance(other, Scalar):
            try:
                other = Scalar.of(other)
            except TypeError:
                return NotImplemented
        if not (self._b or other._b):
            return Scalar._raw(self._a * other._den - other._a * self._den, 0,
                               self._den * other._den, 0)
        return self + (-other)

    def __rsub__(self, other: Number) -> "Scalar":
        return Scalar.of(other) - self

    def __mul__(self, other: Number) -> "Scalar":
        if not isinstance(other, Scalar):
            if isinstance(other, int):
                return Scalar._raw(self._a * other, self._b * other, self._den, self._d)
            try:
                other = Scalar.of(other)
            except TypeError:
                return NotImplemented
        d = self._common_d(other)
        a = self._a * other._a + self._b * other._b * d
        b = self._a * other._b + self._b * other._a
        return Scalar._raw(a, b, self._den * other._den, d)

    __rmul__ = __mul__

    def inverse(self) -> "Scalar":
        a, b, d = self._a, self._b, self._d
        norm = a * a - b * b * d
        if norm == 0:
            raise ZeroDivisionError("division by zero Scalar")
        # den/(a + b sqrt d) = den (a - b sqrt d) / norm
        return Scalar._raw(self._den * a, -self._den * b, norm, d)

    def __truediv__(self, other: Number) -> "Scalar":
        if isinstance(other, int):
            if other == 0:
                raise ZeroDivisionError("division by zero Scalar")
            return Scalar._raw(self._a, self._b, self._den * other, self._d)
        if not isinstance(other, Scalar):
            try:
                other = Scalar.of(other)
            except TypeError:
                return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other: Number) -> "Scalar":
        return Scalar.of(other) * self.inverse()

    def __abs__(self) -> "Scalar":
        return -self if self.sign() < 0 else self

    # -- order ------------------------------------------------------------
    def sign(self) -> int:
        return _sign(self._a, self._b, self._d)

    def __bool__(self) -> bool:
        return self._a != 0 or self._b != 0

    def compare(self, other: Number) -> int:
        """-1, 0 or 1 as self is less than, equal to or greater than other."""
        if not isinstance(other, Scalar):
            other = Scalar.of(other)
        d = self._common_d(other)
        return _sign(self._a * other._den - other._a * self._den,
                     self._b * other._den - other._b * self._den, d)

    def _cmp(self, other) -> int:
        if other.__class__ is not Scalar:
            if isinstance(other, (int, Fraction)):
                other = Scalar.of(other)
            else:
                return None
        a = self._a * other._den - other._a * self._den
        b = self._b * other._den - other._b * self._den
        if not b:
            return (a > 0) - (a < 0)
        if self._d and other._d and self._d != other._d:
            raise ConfigurationError(f"mismatched radicands {self._d} and {other._d}")
        return _sign(a, b, self._d or other._d)

    def __eq__(self, other) -> bool:
        if isinstance(other, Scalar):
            return (self._a == other._a and self._b == other._b and self._den == other._den)
        if isinstance(other, (int, Fraction)):
            f = Fraction(other)
            return self._b == 0 and self._a * f.denominator == f.numerator * self._den
        return NotImplemented

    def __hash__(self) -> int:
        if self._b == 0:
            return hash(Fraction(self._a, self._den))
        return hash((self._a, self._b, self._den, self._d))

    def __lt__(self, other) -> bool:
        if other.__class__ is Scalar and not (self._b or other._b):
            return self._a * other._den < other._a * self._den
        c = self._cmp(other)
        return NotImplemented if c is None else c < 0

    def __le__(self, other) -> bool:
        if other.__class__ is Scalar and not (self._b or other._b):
            return self._a * other._den <= other._a * self._den
        c = self._cmp(other)
        return NotImplemented if c is None else c <= 0

    def __gt__(self, other) -> bool:
        if other.__class__ is Scalar and not (self._b or other._b):
            return self._a * other._den > other._a * self._den
        c = self._cmp(other)
        return NotImplemented if c is None else c > 0

    def __ge__(self, other) -> bool:
        if other.__class__ is Scalar and not (self._b or other._b):
            return self._a * other._den >= other._a * self._den
        c = self._cmp(other)
        return NotImplemented if c is None else c >= 0

    def __floor__(self) -> int:
        return (self._a + _floor_surd(self._b, self._d)) // self._den

    def __ceil__(self) -> int:
        return -(-self).__floor__()

    def __float__(self) -> float:
        value = float(Fraction(self._a, self._den))
        if self._b:
            value += float(Fraction(self._b, self._den)) * math.sqrt(self._d)
        return value

    # -- text -------------------------------------------------------------
    def __str__(self) -> str:
        rat = _fmt_fraction(self.rat)
        if not self._b:
            return rat
        coef = self.coef
        op = "+" if coef > 0 else "-"
        return f"{rat}{op}{_fmt_fraction(abs(coef))}√{self._d}"

    def __repr__(self) -> str:
        return f"Scalar('{self}')"

    _PATTERN = re.compile(
        r"^\s*(?P<rat>[+-]?\d+(?:/\d+)?)?\s*"
        r"(?:(?P<op>[+-])?\s*(?P<coef>\d+(?:/\d+)?)?\s*\*?\s*(?:√|sqrt)\s*\(?\s*(?P<d>\d+)\s*\)?)?\s*$"
    )

    @classmethod
    def parse(cls, text: str, radicand: int = DEFAULT_RADICAND) -> "Scalar":
        """Parse ``"p/q"``, ``"p/q+r/s√d"`` (``sqrt`` accepted for ``√``) or ``"golden"``."""
        text = text.strip()
        if text == "golden":
            if radicand != 5:
                raise ConfigurationError("'golden' needs radicand 5")
            return cls.golden()
        m = cls._PATTERN.match(text)
        if not m or not text or (m.group("rat") is None and m.group("d") is None):
            raise ValueError(f"cannot parse Scalar from {text!r}")
        rat = Fraction(m.group("rat") or 0)
        if m.group("d") is None:
            return cls._raw(rat.numerator, 0, rat.denominator, 0)
        if m.group("rat") is not None and m.group("op") is None:
            raise ValueError(f"cannot parse Scalar from {text!r}")
        coef = Fraction(m.group("coef") or 1)
        if m.group("op") == "-":
            coef = -coef
        d = int(m.group("d"))
        if radicand and d != radicand and coef:
            raise ConfigurationError(f"literal uses radicand {d}, run is configured for {radicand}")
        return cls(rat, coef, d)


def _fmt_fraction(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def compare(a: Number, b: Number) -> str:
    """Ordering of two Scalars as ``"less"``, ``"equal"`` or ``"greater"``."""
    return ("less", "equal", "greater")[Scalar.of(a).compare(b) + 1]


ZERO = Scalar(0)
ONE = Scalar(1)


def scalar(x) -> Scalar:
    """Coerce ints, Fractions and strings to Scalar."""
    return x if x.__class__ is Scalar else Scalar.of(x)


def total(values: Iterable) -> Scalar:
    """Exact sum, normalised once instead of after every addition."""
    a, b, den, d = 0, 0, 1, 0
    for v in values:
        v = scalar(v)
        if v._b:
            if d and v._d != d:
                raise ConfigurationError(f"mismatched radicands {d} and {v._d}")
            d = v._d
        if v._den == den:
            a += v._a
            b += v._b
        else:
            g = math.gcd(den, v._den)
            left, right = v._den // g, den // g
            a = a * left + v._a * right
            b = b * left + v._b * right
            den *= left
    return Scalar._raw(a, b, den, d)
