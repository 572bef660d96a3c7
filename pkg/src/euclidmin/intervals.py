"""Thin layer over mpmath's interval context.

Every interval here has exact dyadic endpoints (mpmath ``mpf`` values) and is
produced by outward-rounded arithmetic, so enclosures are certified.  One
context object is created per working precision and never mutated afterwards,
which keeps the helpers safe to call from several threads.
"""

from __future__ import annotations

import math
import os
from fractions import Fraction
from functools import lru_cache

from mpmath.ctx_iv import MPIntervalContext
from mpmath.libmp import to_float, to_rational

DEFAULT_PRECISION = 128
MAX_PRECISION = 8192


class PrecisionError(ArithmeticError):
    """Raised when refinement cannot reach a requested width within budget."""


def default_precision() -> int:
    raw = os.environ.get("EM_PRECISION_BITS")
    if not raw:
        return DEFAULT_PRECISION
    try:
        bits = int(raw)
    except ValueError as exc:
        raise ValueError(f"EM_PRECISION_BITS must be an integer, got {raw!r}") from exc
    if bits < 53:
        raise ValueError("EM_PRECISION_BITS must be at least 53")
    return bits


@lru_cache(maxsize=None)
def context(prec: int) -> MPIntervalContext:
    ctx = MPIntervalContext()
    ctx.prec = prec
    return ctx


def from_fraction(ctx, q) -> object:
    q = Fraction(q)
    if q.denominator == 1:
        return ctx.mpf(q.numerator)
    return ctx.mpf(q.numerator) / q.denominator


def is_complex(x) -> bool:
    return hasattr(x, "imag") and not hasattr(x, "_mpi_")


def lower(x) -> Fraction:
    p, q = to_rational(x._mpi_[0])
    return Fraction(int(p), int(q))


def upper(x) -> Fraction:
    p, q = to_rational(x._mpi_[1])
    return Fraction(int(p), int(q))


def lower_float(x) -> float:
    return to_float(x._mpi_[0], rnd="f")


def upper_float(x) -> float:
    return to_float(x._mpi_[1], rnd="c")


def mid_float(x) -> float:
    return 0.5 * (lower_float(x) + upper_float(x))


def width(x) -> Fraction:
    if is_complex(x):
        return max(width(x.real), width(x.imag))
    return upper(x) - lower(x)


def contains(x, q) -> bool:
    """Exact membership of the rational ``q`` in the real interval ``x``."""
    q = Fraction(q)
    return lower(x) <= q <= upper(x)


def intersects(x, y) -> bool:
    return lower(x) <= upper(y) and lower(y) <= upper(x)


def hull(ctx, xs):
    lo = min(lower(x) for x in xs)
    hi = max(upper(x) for x in xs)
    return ctx.mpf([from_fraction(ctx, lo).a, from_fraction(ctx, hi).b])


def abs2(ctx, z):
    """|z|^2 for a real or complex interval, never negative."""
    if is_complex(z):
        return z.real ** 2 + z.imag ** 2
    return z ** 2


def modulus(ctx, z):
    if is_complex(z):
        return ctx.sqrt(abs2(ctx, z))
    return abs(z)


def certainly_positive(x) -> bool:
    return lower(x) > 0


def certainly_nonzero(x) -> bool:
    if is_complex(x):
        return certainly_nonzero(x.real) or certainly_nonzero(x.imag)
    return lower(x) > 0 or upper(x) < 0


def float_up(value: float) -> float:
    """Next float above ``value``; used when a float must stay an upper bound."""
    return math.nextafter(value, math.inf)
