"""Interval enclosures of pi, arctangent, and the logarithm.

These are internal building blocks for certifying the logarithmic form of
the gluing equations. Everything here is assembled from the interval
primitives +, -, *, /, sqrt via argument-reduction identities:

* atan by three angle halvings t -> t / (1 + sqrt(1 + t^2)) followed by
  the alternating Maclaurin series with its tail bound;
* pi by Machin's formula 16*atan(1/5) - 4*atan(1/239);
* log by frexp normalization into [1/2, 1) and the atanh series
  log m = 2*atanh((m-1)/(m+1)) with a geometric tail bound;
* the complex log of a box in the open upper half plane as
  log|z| + i*arg z with arg z = pi/2 - atan(re/im), which keeps the
  argument inside (0, pi) without any branch bookkeeping.
"""

import math

from .errors import DomainError
from .interval import ComplexBox, RealInterval

_TERM_EPS = 1e-20
_SERIES_CAP = 64


def _mag_hi(iv):
    return max(abs(iv.lo), abs(iv.hi))


def _atan_small(t):
    """Alternating series for atan on an interval inside [0, 0.5)."""
    u2 = t.square()
    s = t
    pw = t
    sign = -1
    for k in range(1, _SERIES_CAP):
        pw = pw * u2
        term = pw / (2 * k + 1)
        s = s + term if sign > 0 else s - term
        sign = -sign
        if _mag_hi(term) < _TERM_EPS:
            break
    tail = pw * u2 / (2 * k + 3)
    m = _mag_hi(tail)
    return s + RealInterval(-m, m)


def atan_point(x):
    """Enclosure of atan of one float."""
    if math.isnan(x):
        raise DomainError("atan of NaN")
    if x < 0:
        return -atan_point(-x)
    if x == 0.0:
        return RealInterval(0.0, 0.0)
    if math.isinf(x):
        return half_pi()
    t = RealInterval.point(x)
    for _ in range(3):
        t = t / ((t.square() + 1.0).sqrt() + 1.0)
    return _atan_small(t) * 8


def atan_interval(iv):
    """Enclosure of atan over an interval (monotone, endpoint-wise)."""
    lo = atan_point(iv.lo)
    hi = atan_point(iv.hi)
    return RealInterval(lo.lo, hi.hi)


_PI = None


def pi_interval():
    """Cached enclosure of pi."""
    global _PI
    if _PI is None:
        a5 = atan_interval(1.0 / RealInterval.point(5.0))
        a239 = atan_interval(1.0 / RealInterval.point(239.0))
        _PI = a5 * 16 - a239 * 4
    return _PI


def half_pi():
    return pi_interval() * 0.5


_LOG2 = None


def _log2_interval():
    """Cached enclosure of log 2 = 2*atanh(1/3)."""
    global _LOG2
    if _LOG2 is None:
        u = 1.0 / RealInterval.point(3.0)
        _LOG2 = _atanh_series(u) * 2
    return _LOG2


def _atanh_series(u):
    """Series u + u^3/3 + ... for an interval with |u| <= 0.4, plus a
    geometric tail bound."""
    u2 = u.square()
    s = u
    pw = u
    for k in range(1, _SERIES_CAP):
        pw = pw * u2
        term = pw / (2 * k + 1)
        s = s + term
        if _mag_hi(term) < _TERM_EPS:
            break
    tail_hi = (_mag_hi(pw * u2) / (2 * k + 3)) / (1.0 - _mag_hi(u2))
    return s + RealInterval(-tail_hi, tail_hi)


def log_point(x):
    """Enclosure of log of one positive float."""
    if math.isnan(x) or x <= 0.0:
        raise DomainError("log of %r" % x)
    if x == 1.0:
        return RealInterval(0.0, 0.0)
    if math.isinf(x):
        return RealInterval(math.inf, math.inf)
    m, e = math.frexp(x)
    mi = RealInterval.point(m)
    u = (mi - 1.0) / (mi + 1.0)
    return _atanh_series(u) * 2 + _log2_interval() * e


def log_interval(iv):
    """Enclosure of log over a positive interval."""
    if iv.lo <= 0.0:
        raise DomainError(
            "log of interval reaching %r" % iv.lo)
    lo = log_point(iv.lo)
    hi = log_point(iv.hi)
    return RealInterval(lo.lo, hi.hi)


def arg_box(z):
    """Enclosure of arg z for a box in the open upper half plane;
    always a subinterval of (0, pi)."""
    if not z.im.lo > 0.0:
        raise DomainError(
            "arg requires strictly positive imaginary part, got %r" % z.im)
    t = z.re / z.im
    return half_pi() - atan_interval(t)


def log_box(z):
    """Enclosure of the principal log of a box in the open upper half
    plane: log|z| + i*arg z."""
    mag2 = z.mag2()
    return ComplexBox(log_interval(mag2) * 0.5, arg_box(z))
