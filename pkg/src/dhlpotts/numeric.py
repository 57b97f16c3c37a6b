"""Arbitrary-precision complex values, the point at infinity, and error types.

Every scalar routine in the package takes a ``prec`` argument (binary
precision in bits) and does its arithmetic in a private mpmath context of
that precision, so no global mpmath state is touched.
"""

from __future__ import annotations

import math
import os
from fractions import Fraction
from functools import lru_cache
from numbers import Number

import mpmath

DEFAULT_PREC = 53


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class PrecisionError(ArithmeticError):
    """Result not attainable at the requested working precision."""


class ResourceError(RuntimeError):
    """Request exceeds a configured size cap."""


class DivisibilityError(ArithmeticError):
    """An exact polynomial division left a remainder."""


class ConvergenceError(RuntimeError):
    """An iterative method did not converge.

    ``partial`` carries whatever the method had when it gave up.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class BracketError(RuntimeError):
    """No sign change was found for a root-bracketing search."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class _Infinity:
    """The point at infinity of the extended complex plane."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"

    def __reduce__(self):
        return (_Infinity, ())

    def __abs__(self):
        return math.inf


INFINITY = _Infinity()


def is_infinity(z) -> bool:
    return z is INFINITY


@lru_cache(maxsize=None)
def context(prec: int = DEFAULT_PREC) -> mpmath.ctx_mp.MPContext:
    """Return a dedicated mpmath context fixed at ``prec`` bits.

    Contexts are cached and never mutated after creation.
    """
    if prec < 2:
        raise DomainError(f"precision must be at least 2 bits, got {prec}")
    ctx = mpmath.MPContext()
    ctx.prec = prec
    return ctx


def env_precision(default: int) -> int:
    """Honour the DHL_PRECISION_BITS override, if set."""
    raw = os.environ.get("DHL_PRECISION_BITS")
    return int(raw) if raw else default


def to_mp(ctx, x):
    """Convert ``x`` into ``ctx`` exactly where possible.

    Fractions are divided at the context precision; complex, float, int and
    mpmath values pass through ``ctx.convert``. NaN is rejected.
    """
    if x is INFINITY:
        return x
    if isinstance(x, Fraction):
        val = ctx.mpf(x.numerator) / x.denominator
    elif isinstance(x, (str,)):
        val = ctx.convert(Fraction(x)) if "/" in x else ctx.convert(x)
    else:
        val = ctx.convert(x)
    if ctx.isnan(val):
        raise DomainError("NaN is not a valid complex value")
    return val


def is_zero(ctx, x) -> bool:
    return x is not INFINITY and x == 0


def as_complex(x) -> complex:
    if x is INFINITY:
        return complex(math.inf, 0.0)
    return complex(x)


def parse_rational(text) -> Fraction:
    """Parse "p/q" or a decimal literal into an exact Fraction."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, float):
        return Fraction(text)
    s = str(text).strip()
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"not a rational number: {text!r}") from exc


def real_number(x) -> bool:
    if isinstance(x, (Fraction, int, float)):
        return True
    if isinstance(x, complex):
        return False
    if isinstance(x, Number) and not hasattr(x, "imag"):
        return True
    return getattr(x, "imag", 0) == 0
