"""Exact Gaussian-rational scalars.

The exact backend works over Q(i): complex numbers whose real and imaginary
parts are arbitrary-precision rationals.  Rationals are gmpy2.mpq when gmpy2
is importable (noticeably faster on big numerators) and fractions.Fraction
otherwise; both normalise to lowest terms with a positive denominator, which
is the storage invariant relied on by the JSON codec.
"""

from __future__ import annotations

from typing import Union

try:
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover - exercised only without gmpy2
    from fractions import Fraction as _Q

RationalLike = Union[int, str]


def rational(num: RationalLike = 0, den: int = 1):
    """Build a normalised rational from integers or a decimal/`a/b` string."""
    return _Q(num, den) if den != 1 else _Q(num)


class GaussianRational:
    """An element re + im*i of Q(i), immutable."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", re if type(re) is type(_Q(0)) else _Q(re))
        object.__setattr__(self, "im", im if type(im) is type(_Q(0)) else _Q(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __mul__(self, other: "GaussianRational") -> "GaussianRational":
        a, b, c, d = self.re, self.im, other.re, other.im
        return GaussianRational(a * c - b * d, a * d + b * c)

    def __truediv__(self, other: "GaussianRational") -> "GaussianRational":
        n = other.re * other.re + other.im * other.im
        if n == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        a, b, c, d = self.re, self.im, other.re, other.im
        return GaussianRational((a * c + b * d) / n, (b * c - a * d) / n)

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.re, -self.im)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def norm2(self):
        """|z|^2 as an exact rational."""
        return self.re * self.re + self.im * self.im

    # -- predicates & ordering --------------------------------------------

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __eq__(self, other) -> bool:
        if not isinstance(other, GaussianRational):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def sort_key(self):
        """Lexicographic (re, im) key; the canonical eigenvalue order."""
        return (self.re, self.im)

    # -- conversions -------------------------------------------------------

    def to_complex(self) -> complex:
        return complex(self.re) + 1j * complex(self.im)

    def __repr__(self) -> str:
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"


GR_ZERO = GaussianRational(0, 0)
GR_ONE = GaussianRational(1, 0)
GR_I = GaussianRational(0, 1)

Scalar = Union[GaussianRational, complex]


def as_gaussian(value) -> GaussianRational:
    """Coerce ints, rationals, (re, im) pairs or GaussianRational to Q(i)."""
    if isinstance(value, GaussianRational):
        return value
    if isinstance(value, tuple) and len(value) == 2:
        return GaussianRational(_Q(value[0]), _Q(value[1]))
    if isinstance(value, complex):
        raise TypeError("refusing to coerce a float complex into the exact backend")
    if isinstance(value, float):
        raise TypeError("refusing to coerce a float into the exact backend")
    return GaussianRational(_Q(value), _Q(0))


# ---------------------------------------------------------------------------
# Gaussian integers as plain (int, int) pairs.
#
# Fraction-free elimination runs over Z[i] after clearing denominators; tuples
# with inline arithmetic keep that inner loop cheap.
# ---------------------------------------------------------------------------

GInt = tuple  # (a, b) meaning a + b*i with a, b Python ints


def gint_mul(x: GInt, y: GInt) -> GInt:
    a, b = x
    c, d = y
    return (a * c - b * d, a * d + b * c)


def gint_sub(x: GInt, y: GInt) -> GInt:
    return (x[0] - y[0], x[1] - y[1])


def gint_divexact(x: GInt, y: GInt) -> GInt:
    """x / y, assuming divisibility in Z[i]."""
    a, b = x
    c, d = y
    n = c * c + d * d
    return ((a * c + b * d) // n, (b * c - a * d) // n)


def gint_is_zero(x: GInt) -> bool:
    return x[0] == 0 and x[1] == 0
