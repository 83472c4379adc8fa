"""Outward-rounded interval arithmetic over reals and complex rectangles.

Every arithmetic operation returns an interval that provably contains the
exact mathematical result for all inputs drawn from the operand intervals.
Directed rounding is simulated by post-hoc endpoint widening with
``math.nextafter`` (one extra ulp of width per operation) instead of
touching any process-global rounding mode, so all operations are pure and
thread-safe.

There is deliberately no notion of interval equality: two enclosures of
the same number need not have equal endpoints, and comparing them as if
they were values is a soundness bug waiting to happen.  Use
:func:`strictly_less`, :meth:`RealInterval.contains`, or explicit endpoint
access instead.
"""

import math
from fractions import Fraction

from .errors import DomainError

_INF = math.inf


def _down(x):
    """Next float toward -inf (identity on infinities)."""
    if x == -_INF or x == _INF:
        return x
    return math.nextafter(x, -_INF)


def _up(x):
    """Next float toward +inf (identity on infinities)."""
    if x == -_INF or x == _INF:
        return x
    return math.nextafter(x, _INF)


def _lo_sat(x):
    """Saturate an indeterminate lower endpoint (NaN from inf-inf) to -inf."""
    return -_INF if math.isnan(x) else x


def _hi_sat(x):
    return _INF if math.isnan(x) else x


class RealInterval:
    """Closed interval [lo, hi] with 64-bit float endpoints.

    Endpoints may be +-inf only as saturated overflow results; NaN is
    never a legal endpoint.
    """

    __slots__ = ("_lo", "_hi")

    def __init__(self, lo, hi=None):
        if hi is None:
            hi = lo
        lo = float(lo)
        hi = float(hi)
        if math.isnan(lo) or math.isnan(hi):
            raise DomainError("NaN endpoint")
        if lo > hi:
            raise DomainError("lo > hi: [%r, %r]" % (lo, hi))
        self._lo = lo
        self._hi = hi

    @property
    def lo(self):
        return self._lo

    @property
    def hi(self):
        return self._hi

    # -- constructors -------------------------------------------------

    @classmethod
    def point(cls, x):
        """Degenerate interval [x, x] (no widening)."""
        return cls(x, x)

    @classmethod
    def enclosing(cls, x):
        """Interval one ulp either side of float(x); use for values that
        are not exactly representable (decimal literals, pi, ...)."""
        x = float(x)
        return cls(_down(x), _up(x))

    # -- queries -------------------------------------------------------

    def width(self):
        return self._hi - self._lo

    def midpoint(self):
        m = 0.5 * (self._lo + self._hi)
        if math.isfinite(m):
            return m
        return self._lo if math.isfinite(self._lo) else self._hi

    def contains(self, x):
        """Exact containment test: lo <= x <= hi with x an int, float, or
        Fraction, compared without rounding."""
        if isinstance(x, float):
            if math.isnan(x):
                return False
            if math.isinf(x):
                return (x == self._lo) or (x == self._hi) or \
                    (self._lo < x < self._hi)
            x = Fraction(x)
        else:
            x = Fraction(x)
        lo_ok = self._lo == -_INF or Fraction(self._lo) <= x
        hi_ok = self._hi == _INF or x <= Fraction(self._hi)
        return lo_ok and hi_ok

    def contains_interval(self, other):
        """True iff other is a subset of self (endpoint comparison)."""
        return self._lo <= other._lo and other._hi <= self._hi

    def is_finite(self):
        return math.isfinite(self._lo) and math.isfinite(self._hi)

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        if other._lo == 0.0 and other._hi == 0.0:
            return self
        if self._lo == 0.0 and self._hi == 0.0:
            return other
        return RealInterval(_down(_lo_sat(self._lo + other._lo)),
                            _up(_hi_sat(self._hi + other._hi)))

    __radd__ = __add__

    def __neg__(self):
        return RealInterval(-self._hi, -self._lo)

    def __sub__(self, other):
        other = _coerce(other)
        if other._lo == 0.0 and other._hi == 0.0:
            return self
        return RealInterval(_down(_lo_sat(self._lo - other._hi)),
                            _up(_hi_sat(self._hi - other._lo)))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        cands = [_prod(a, b) for a in (self._lo, self._hi)
                 for b in (other._lo, other._hi)]
        lo, hi = min(cands), max(cands)
        if lo == 0.0 and hi == 0.0:
            return RealInterval(0.0, 0.0)
        return RealInterval(_down(lo), _up(hi))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other._lo <= 0.0 <= other._hi:
            raise DomainError("division by interval containing 0: [%r, %r]"
                              % (other._lo, other._hi))
        cands = [_quot(a, b) for a in (self._lo, self._hi)
                 for b in (other._lo, other._hi)]
        lo, hi = min(cands), max(cands)
        if lo == 0.0 and hi == 0.0:
            return RealInterval(0.0, 0.0)
        return RealInterval(_down(lo), _up(hi))

    def __rtruediv__(self, other):
        return _coerce(other) / self

    def sqrt(self):
        """Outward-rounded square root; requires lo >= 0."""
        if self._lo < 0.0:
            raise DomainError("sqrt of interval with negative lower "
                              "endpoint: [%r, %r]" % (self._lo, self._hi))
        lo = 0.0 if self._lo == 0.0 else max(0.0, _down(math.sqrt(self._lo)))
        hi = 0.0 if self._hi == 0.0 else _up(math.sqrt(self._hi))
        return RealInterval(lo, hi)

    def square(self):
        """Tight enclosure of {x^2 : x in self} (better than self*self
        when the interval straddles 0)."""
        a, b = abs(self._lo), abs(self._hi)
        lo_abs, hi_abs = min(a, b), max(a, b)
        if self._lo <= 0.0 <= self._hi:
            lo_abs = 0.0
        lo = 0.0 if lo_abs == 0.0 else _down(_prod(lo_abs, lo_abs))
        return RealInterval(lo, _up(_prod(hi_abs, hi_abs)))

    def intersect(self, other):
        """Intersection, or None when provably disjoint."""
        lo = max(self._lo, other._lo)
        hi = min(self._hi, other._hi)
        if lo > hi:
            return None
        return RealInterval(lo, hi)

    def hull(self, other):
        return RealInterval(min(self._lo, other._lo),
                            max(self._hi, other._hi))

    def widened(self, ulps=1):
        lo, hi = self._lo, self._hi
        for _ in range(ulps):
            lo, hi = _down(lo), _up(hi)
        return RealInterval(lo, hi)

    # -- no value equality ----------------------------------------------

    def __eq__(self, other):
        raise TypeError("intervals have no equality; compare endpoints "
                        "or use strictly_less/contains")

    __hash__ = None

    def __repr__(self):
        return "RealInterval(%r, %r)" % (self._lo, self._hi)


def _coerce(x):
    if isinstance(x, RealInterval):
        return x
    if isinstance(x, (int, float)):
        return RealInterval(x, x)
    raise TypeError("cannot mix RealInterval with %r" % type(x).__name__)


def _prod(a, b):
    """Endpoint product with the exact-zero convention 0 * inf = 0."""
    if a == 0.0 or b == 0.0:
        return 0.0
    return a * b


def _quot(a, b):
    """Endpoint quotient; b is never 0 here (divisor excludes 0)."""
    if a == 0.0:
        return 0.0
    if math.isinf(a) and math.isinf(b):
        # |a/b| can be anything; saturate by sign agreement
        return _INF if (a > 0) == (b > 0) else -_INF
    return a / b


def add(a, b):
    return _coerce(a) + _coerce(b)


def sub(a, b):
    return _coerce(a) - _coerce(b)


def mul(a, b):
    return _coerce(a) * _coerce(b)


def div(a, b):
    return _coerce(a) / _coerce(b)


def sqrt(a):
    return _coerce(a).sqrt()


def strictly_less(a, b):
    """True only when every x in a is less than every y in b.

    False means "not provably less" -- it is never a proof of the
    reverse inequality.
    """
    a = _coerce(a)
    b = _coerce(b)
    return a.hi < b.lo


class ComplexBox:
    """Axis-aligned rectangle {x + iy : x in re, y in im}."""

    __slots__ = ("_re", "_im")

    def __init__(self, re, im):
        if not isinstance(re, RealInterval):
            re = RealInterval(re)
        if not isinstance(im, RealInterval):
            im = RealInterval(im)
        self._re = re
        self._im = im

    @property
    def re(self):
        return self._re

    @property
    def im(self):
        return self._im

    @classmethod
    def point(cls, z):
        z = complex(z)
        return cls(RealInterval.point(z.real), RealInterval.point(z.imag))

    @classmethod
    def enclosing(cls, z):
        z = complex(z)
        return cls(RealInterval.enclosing(z.real),
                   RealInterval.enclosing(z.imag))

    def midpoint(self):
        return complex(self._re.midpoint(), self._im.midpoint())

    def width(self):
        return max(self._re.width(), self._im.width())

    def contains(self, re, im=None):
        """Exact containment of the complex number re + i*im (two exact
        reals, or a single complex)."""
        if im is None:
            z = complex(re)
            re, im = z.real, z.imag
        return self._re.contains(re) and self._im.contains(im)

    def contains_box(self, other):
        return (self._re.contains_interval(other._re) and
                self._im.contains_interval(other._im))

    def __add__(self, other):
        other = _coerce_box(other)
        return ComplexBox(self._re + other._re, self._im + other._im)

    __radd__ = __add__

    def __neg__(self):
        return ComplexBox(-self._re, -self._im)

    def __sub__(self, other):
        other = _coerce_box(other)
        return ComplexBox(self._re - other._re, self._im - other._im)

    def __rsub__(self, other):
        return _coerce_box(other) - self

    def __mul__(self, other):
        other = _coerce_box(other)
        re = self._re * other._re - self._im * other._im
        im = self._re * other._im + self._im * other._re
        return ComplexBox(re, im)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce_box(other)
        den = other._re.square() + other._im.square()
        if den.lo <= 0.0 <= den.hi:
            raise DomainError("division by a complex box containing 0")
        re = (self._re * other._re + self._im * other._im) / den
        im = (self._im * other._re - self._re * other._im) / den
        return ComplexBox(re, im)

    def __rtruediv__(self, other):
        return _coerce_box(other) / self

    def mag2(self):
        """Enclosure of |z|^2."""
        return self._re.square() + self._im.square()

    def intersect(self, other):
        re = self._re.intersect(other._re)
        im = self._im.intersect(other._im)
        if re is None or im is None:
            return None
        return ComplexBox(re, im)

    def widened(self, ulps=1):
        return ComplexBox(self._re.widened(ulps), self._im.widened(ulps))

    def __eq__(self, other):
        raise TypeError("complex boxes have no equality; compare "
                        "component endpoints")

    __hash__ = None

    def __repr__(self):
        return "ComplexBox(%r, %r)" % (self._re, self._im)


def _coerce_box(x):
    if isinstance(x, ComplexBox):
        return x
    if isinstance(x, RealInterval):
        return ComplexBox(x, RealInterval(0.0, 0.0))
    if isinstance(x, (int, float)):
        return ComplexBox(RealInterval(x, x), RealInterval(0.0, 0.0))
    if isinstance(x, complex):
        return ComplexBox.point(x)
    raise TypeError("cannot mix ComplexBox with %r" % type(x).__name__)
