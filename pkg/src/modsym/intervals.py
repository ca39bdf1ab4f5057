"""Small helpers around mpmath's outward-rounded interval context.

Every caller builds its own ``MPIntervalContext`` so precision settings never
leak between threads.
"""

from __future__ import annotations

from fractions import Fraction

from mpmath.ctx_iv import MPIntervalContext


def context(precision: int) -> MPIntervalContext:
    ctx = MPIntervalContext()
    ctx.prec = precision
    return ctx


def _raw_to_fraction(raw) -> Fraction:
    sign, man, exp, bc = raw
    if not man:
        if bc:
            raise ArithmeticError("interval endpoint is not finite")
        return Fraction(0)
    man = int(man)
    v = Fraction(man << exp) if exp >= 0 else Fraction(man, 1 << -exp)
    return -v if sign else v


def bounds(x) -> tuple[Fraction, Fraction]:
    """Exact rational endpoints of an interval."""
    lo, hi = x._mpi_
    return _raw_to_fraction(lo), _raw_to_fraction(hi)


def from_rational(ctx: MPIntervalContext, q) -> object:
    q = Fraction(q)
    return ctx.mpf(q.numerator) / ctx.mpf(q.denominator)


def hull(ctx: MPIntervalContext, lo: Fraction, hi: Fraction):
    """Smallest representable interval containing ``[lo, hi]``."""
    a = from_rational(ctx, lo)
    b = from_rational(ctx, hi)
    return ctx.mpf([a.a, b.b])


def contains(x, q) -> bool:
    lo, hi = bounds(x)
    return lo <= Fraction(q) <= hi


def width(x) -> Fraction:
    lo, hi = bounds(x)
    return hi - lo


def midpoint(x) -> float:
    lo, hi = bounds(x)
    return float((lo + hi) / 2)


def floor_certified(x) -> int | None:
    """``floor`` of every point of ``x`` if they agree, else ``None``."""
    lo, hi = bounds(x)
    a, b = lo.__floor__(), hi.__floor__()
    return a if a == b else None
