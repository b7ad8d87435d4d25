"""Exact arithmetic helpers for circle constructions.

Convention used throughout the package: exact coordinates on the circle
are stored as `fractions.Fraction` values in *units of pi*, i.e. the
rational q denotes the point q*pi radians.  The ambient interval of a
Cantor scheme is then [0, 2] and the lift of a homeomorphism lives on
[-1, 1].  This keeps every construction (including the basepoint 2*pi)
rational.

Quantities mixing a rational number of radians with rational multiples
of pi (for example the measure of a delta-neighborhood inflated by a
dyadic radian delta) are held exactly as ``PiLinear`` values a + b*pi
with rational a, b.  Comparisons are decided by refining rational bounds
on pi; they terminate because a rational never equals pi.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Union

import mpmath

Rat = Union[Fraction, int]


@lru_cache(maxsize=None)
def pi_bounds(dps: int) -> tuple[Fraction, Fraction]:
    """Rational lower/upper bounds for pi accurate to ``dps`` digits."""
    with mpmath.workdps(dps + 5):
        lo = Fraction(mpmath.nstr(mpmath.mpf(mpmath.pi) - mpmath.mpf(10) ** (-dps), dps + 5))
        hi = Fraction(mpmath.nstr(mpmath.mpf(mpmath.pi) + mpmath.mpf(10) ** (-dps), dps + 5))
    return lo, hi


def _sign_of_rational_vs_pi(r: Fraction) -> int:
    """Sign of (r - pi), exact for rational r."""
    dps = 30
    while True:
        lo, hi = pi_bounds(dps)
        if r < lo:
            return -1
        if r > hi:
            return 1
        dps *= 2
        if dps > 10000:  # pragma: no cover - unreachable for sane inputs
            raise RuntimeError("pi comparison did not separate")


class PiLinear:
    """Exact number of the form a + b*pi with rational a, b."""

    __slots__ = ("a", "b")

    def __init__(self, a: Rat = 0, b: Rat = 0):
        self.a = Fraction(a)
        self.b = Fraction(b)

    @staticmethod
    def coerce(x: "PiLinear | Rat") -> "PiLinear":
        if isinstance(x, PiLinear):
            return x
        return PiLinear(x, 0)

    @staticmethod
    def pi_units(q: Rat) -> "PiLinear":
        """The point/length q*pi given q in units of pi."""
        return PiLinear(0, q)

    def __add__(self, other):
        o = PiLinear.coerce(other)
        return PiLinear(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __sub__(self, other):
        o = PiLinear.coerce(other)
        return PiLinear(self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        return PiLinear.coerce(other) - self

    def __neg__(self):
        return PiLinear(-self.a, -self.b)

    def __mul__(self, other):
        if isinstance(other, PiLinear):
            raise TypeError("product of two PiLinear values is not linear in pi")
        q = Fraction(other)
        return PiLinear(self.a * q, self.b * q)

    __rmul__ = __mul__

    def sign(self) -> int:
        if self.b == 0:
            return (self.a > 0) - (self.a < 0)
        # a + b*pi = b*(pi - r) with r = -a/b
        r = -self.a / self.b
        s = _sign_of_rational_vs_pi(r)  # sign of (r - pi)
        return -s if self.b > 0 else s

    def _cmp(self, other) -> int:
        return (self - other).sign()

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __eq__(self, other):
        if isinstance(other, (PiLinear, Fraction, int)):
            return self._cmp(other) == 0
        return NotImplemented

    def __hash__(self):
        return hash((self.a, self.b))

    def __float__(self) -> float:
        import math

        return float(self.a) + float(self.b) * math.pi

    def __repr__(self):
        return f"PiLinear({self.a!r} + {self.b!r}*pi)"

    def is_rational(self) -> bool:
        return self.b == 0

    def as_fraction(self) -> Fraction:
        if self.b != 0:
            raise ValueError("value has a pi component")
        return self.a


def dyadic(num: int, pow2: int) -> Fraction:
    """The dyadic rational num / 2**pow2."""
    return Fraction(num, 1 << pow2)


def float_to_fraction(x: float) -> Fraction:
    """Exact rational value of a binary float."""
    return Fraction(x)
