"""Exact arithmetic over Q(sqrt 2) and its complex extension Q(sqrt 2)[j].

Every coefficient that appears in a design lives here, so orthogonality checks
are decidable equalities rather than floating-point comparisons.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Union

__all__ = [
    "Sqrt2Rational",
    "Sqrt2Complex",
    "as_fraction",
    "ZERO",
    "ONE",
    "INV_SQRT2",
    "CZERO",
    "CONE",
    "J",
]

RationalLike = Union[int, Fraction]


def as_fraction(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


_F0 = Fraction(0)


def _fmul(x: Fraction, y: Fraction) -> Fraction:
    # products with a zero component are by far the common case in designs
    return x * y if x and y else _F0


def _frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


class Sqrt2Rational:
    """The real number ``a + b*sqrt(2)`` with rational ``a`` and ``b``."""

    __slots__ = ("a", "b")

    def __init__(self, a: RationalLike = 0, b: RationalLike = 0):
        # Fraction already keeps lowest terms with a positive denominator.
        object.__setattr__(self, "a", as_fraction(a))
        object.__setattr__(self, "b", as_fraction(b))

    def __setattr__(self, name, value):
        raise AttributeError("Sqrt2Rational is immutable")

    @classmethod
    def _raw(cls, a: Fraction, b: Fraction) -> "Sqrt2Rational":
        obj = object.__new__(cls)
        object.__setattr__(obj, "a", a)
        object.__setattr__(obj, "b", b)
        return obj

    @classmethod
    def coerce(cls, value) -> "Sqrt2Rational":
        if isinstance(value, Sqrt2Rational):
            return value
        return cls(as_fraction(value), 0)

    # ring operations -----------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, Sqrt2Rational):
            if isinstance(other, (int, Fraction)):
                return Sqrt2Rational(self.a + other, self.b)
            return NotImplemented
        return Sqrt2Rational._raw(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __neg__(self):
        return Sqrt2Rational._raw(-self.a, -self.b)

    def __sub__(self, other):
        if not isinstance(other, (Sqrt2Rational, int, Fraction)):
            return NotImplemented
        return self + (-Sqrt2Rational.coerce(other))

    def __rsub__(self, other):
        if not isinstance(other, (int, Fraction)):
            return NotImplemented
        return Sqrt2Rational.coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Sqrt2Rational):
            if isinstance(other, (int, Fraction)):
                return Sqrt2Rational(self.a * other, self.b * other)
            return NotImplemented
        a1, b1, a2, b2 = self.a, self.b, other.a, other.b
        if not b1 and not b2:
            return Sqrt2Rational._raw(_fmul(a1, a2), _F0)
        return Sqrt2Rational._raw(_fmul(a1, a2) + 2 * _fmul(b1, b2), _fmul(a1, b2) + _fmul(a2, b1))

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        """Field norm ``a^2 - 2 b^2`` (product with the Galois conjugate)."""
        return self.a * self.a - 2 * self.b * self.b

    def inverse(self) -> "Sqrt2Rational":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero in Q(sqrt 2)")
        return Sqrt2Rational(self.a / n, -self.b / n)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero")
            return Sqrt2Rational(self.a / other, self.b / other)
        if not isinstance(other, Sqrt2Rational):
            return NotImplemented
        return self * other.inverse()

    # comparisons ---------------------------------------------------------
    def sign(self) -> int:
        """Exact sign of ``a + b*sqrt(2)``."""
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sa == 0 or sa == sb:
            return sb if sa == 0 else sa
        if sb == 0:
            return sa
        # opposite signs: compare a^2 against 2 b^2
        d = self.a * self.a - 2 * self.b * self.b
        return sa if d > 0 else -sa

    def __eq__(self, other):
        if isinstance(other, Sqrt2Rational):
            return self.a == other.a and self.b == other.b
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        return NotImplemented

    def __hash__(self):
        return hash((self.a, self.b))

    def __lt__(self, other):
        return (self - Sqrt2Rational.coerce(other)).sign() < 0

    def __le__(self, other):
        return (self - Sqrt2Rational.coerce(other)).sign() <= 0

    def __gt__(self, other):
        return (self - Sqrt2Rational.coerce(other)).sign() > 0

    def __ge__(self, other):
        return (self - Sqrt2Rational.coerce(other)).sign() >= 0

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def is_zero(self) -> bool:
        return not self

    def is_rational(self) -> bool:
        return self.b == 0

    def __float__(self):
        return float(self.a) + float(self.b) * 2.0 ** 0.5

    def __repr__(self):
        return f"Sqrt2Rational({self.a}, {self.b})"

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        if self.a == 0:
            return f"{self.b}*r2"
        return f"{self.a}{'+' if self.b > 0 else '-'}{abs(self.b)}*r2"

    def to_json(self) -> dict:
        return {"a": _frac_str(self.a), "b": _frac_str(self.b)}

    @classmethod
    def from_json(cls, obj: dict) -> "Sqrt2Rational":
        return cls(as_fraction(obj["a"]), as_fraction(obj["b"]))


class Sqrt2Complex:
    """Complex number ``re + j*im`` with both parts in Q(sqrt 2)."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", Sqrt2Rational.coerce(re))
        object.__setattr__(self, "im", Sqrt2Rational.coerce(im))

    def __setattr__(self, name, value):
        raise AttributeError("Sqrt2Complex is immutable")

    @classmethod
    def coerce(cls, value) -> "Sqrt2Complex":
        if isinstance(value, Sqrt2Complex):
            return value
        return cls(value, 0)

    def __add__(self, other):
        if not isinstance(other, Sqrt2Complex):
            if isinstance(other, (int, Fraction, Sqrt2Rational)):
                other = Sqrt2Complex(other)
            else:
                return NotImplemented
        return Sqrt2Complex(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return Sqrt2Complex(-self.re, -self.im)

    def __sub__(self, other):
        if not isinstance(other, (Sqrt2Complex, Sqrt2Rational, int, Fraction)):
            return NotImplemented
        return self + (-Sqrt2Complex.coerce(other))

    def __rsub__(self, other):
        return Sqrt2Complex.coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Sqrt2Complex):
            if isinstance(other, (int, Fraction, Sqrt2Rational)):
                return Sqrt2Complex(self.re * other, self.im * other)
            return NotImplemented
        a, b, c, d = self.re, self.im, other.re, other.im
        if not d:
            return Sqrt2Complex(a * c, b * c)
        if not b:
            return Sqrt2Complex(a * c, a * d)
        return Sqrt2Complex(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, Sqrt2Rational)):
            return Sqrt2Complex(self.re / other, self.im / other)
        if not isinstance(other, Sqrt2Complex):
            return NotImplemented
        den = other.abs2()
        return (self * other.conj()) / den

    def conj(self) -> "Sqrt2Complex":
        return Sqrt2Complex(self.re, -self.im)

    def abs2(self) -> Sqrt2Rational:
        """``|z|^2`` as an exact real."""
        return self.re * self.re + self.im * self.im

    def is_zero(self) -> bool:
        return not self.re and not self.im

    def is_real(self) -> bool:
        return not self.im

    def is_imag(self) -> bool:
        return not self.re

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if isinstance(other, Sqrt2Complex):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction, Sqrt2Rational)):
            return self.im.is_zero() and self.re == other
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"Sqrt2Complex({self.re!r}, {self.im!r})"

    def __str__(self):
        if self.im.is_zero():
            return str(self.re)
        if self.re.is_zero():
            return f"j*({self.im})"
        return f"({self.re})+j*({self.im})"

    def components(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        """``(re.a, re.b, im.a, im.b)``."""
        return self.re.a, self.re.b, self.im.a, self.im.b

    def to_json(self) -> dict:
        return {"re": self.re.to_json(), "im": self.im.to_json()}

    @classmethod
    def from_json(cls, obj: dict) -> "Sqrt2Complex":
        return cls(Sqrt2Rational.from_json(obj["re"]), Sqrt2Rational.from_json(obj["im"]))


ZERO = Sqrt2Rational(0, 0)
ONE = Sqrt2Rational(1, 0)
INV_SQRT2 = Sqrt2Rational(0, Fraction(1, 2))
CZERO = Sqrt2Complex(0, 0)
CONE = Sqrt2Complex(1, 0)
J = Sqrt2Complex(0, 1)
