"""The renormalization map of the diamond hierarchical lattice.

    F_q(v) = v^2 (2q + 4v + v^2) / (q + 2v)^2
    r_q(y) = [(q + y^2 - 1) / (q + 2(y - 1))]^2,    y = v + 1

plus its fixed points, critical points and the orbit classifier used for
region diagrams.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numba

from .numeric import (
    DEFAULT_PREC,
    INFINITY,
    DomainError,
    context,
    to_mp,
)

__all__ = [
    "Kind",
    "ClassifierOptions",
    "OrbitClassification",
    "FixedPointSet",
    "apply_map",
    "apply_map_y",
    "map_derivative",
    "iterate_map",
    "fixed_points",
    "vc",
    "critical_points",
    "classify_orbit",
    "sign_factorization",
]


class Kind(enum.IntEnum):
    TO_ZERO = 0
    TO_INFINITY = 1
    CYCLE = 2
    UNDECIDED = 3


# internal status of the double-precision kernel: result overflowed
_OVERFLOW = 4


@dataclass(frozen=True)
class ClassifierOptions:
    max_iter: int = 500
    escape_radius: float = 100.0
    zero_radius: float = 1e-8
    zero_hits: int = 3
    cycle_tol: float = 1e-9
    max_period: int = 64
    prec: int = DEFAULT_PREC

    def __post_init__(self):
        if self.max_iter < 1 or self.max_period < 1 or self.zero_hits < 1:
            raise DomainError("max_iter, max_period and zero_hits must be positive")


RENDER_OPTIONS = ClassifierOptions()
SOLVER_OPTIONS = ClassifierOptions(max_iter=100_000)


@dataclass(frozen=True)
class OrbitClassification:
    kind: Kind
    iterations_used: int
    period: int | None = None
    representative: object = None

    def __post_init__(self):
        if self.kind is Kind.CYCLE and (self.period is None or self.period < 1):
            raise ValueError("a cycle needs a positive period")


@dataclass(frozen=True)
class FixedPointSet:
    q: object
    v_c: object
    v_minus: object
    v_plus: object
    discriminant: object
    v_zero: int = 0
    v_infinity: object = field(default=INFINITY)

    @property
    def finite(self):
        return [self.v_zero, self.v_c, self.v_minus, self.v_plus]

    @property
    def real_pair(self) -> bool:
        return self.discriminant >= 0


def _param(ctx, q):
    if q is INFINITY:
        raise DomainError("q must be finite")
    q = to_mp(ctx, q)
    if q == 0:
        raise DomainError("q = 0 is excluded: the degree of F_q drops from 4 to 2")
    return q


def apply_map(q, v, prec: int = DEFAULT_PREC):
    """Evaluate F_q(v); ``v = -q/2`` and ``v = INFINITY`` map to INFINITY."""
    ctx = context(prec)
    q = _param(ctx, q)
    if v is INFINITY:
        return INFINITY
    v = to_mp(ctx, v)
    d = q + 2 * v
    if d == 0:
        return INFINITY
    return (v / d) ** 2 * (2 * q + 4 * v + v * v)


def apply_map_y(q, y, prec: int = DEFAULT_PREC):
    """Evaluate r_q(y), the map conjugate to F_q under y = v + 1."""
    ctx = context(prec)
    q = _param(ctx, q)
    if y is INFINITY:
        return INFINITY
    y = to_mp(ctx, y)
    d = q + 2 * (y - 1)
    if d == 0:
        return INFINITY
    return ((q + y * y - 1) / d) ** 2


def map_derivative(q, v, prec: int = DEFAULT_PREC):
    """dF_q/dv = 4v(v+q)(v^2+2v+q) / (q+2v)^3."""
    ctx = context(prec)
    q = _param(ctx, q)
    if v is INFINITY:
        raise DomainError("derivative at infinity needs a chart; not provided")
    v = to_mp(ctx, v)
    d = q + 2 * v
    if d == 0:
        raise DomainError("v = -q/2 is a pole of F_q")
    return 4 * v * (v + q) * (v * v + 2 * v + q) / d**3


def iterate_map(q, v, m: int, prec: int = DEFAULT_PREC):
    """F_q^m(v), propagating INFINITY."""
    for _ in range(m):
        v = apply_map(q, v, prec)
        if v is INFINITY:
            return INFINITY
    return v if m else to_mp(context(prec), v)


def sign_factorization(q, v, prec: int = DEFAULT_PREC):
    """Split F_q(v) = f1 * f2 with f1 = (v/(q+2v))^2 >= 0 and f2 = 2q+4v+v^2.

    At the pole v = -q/2 (v != 0) f1 is INFINITY; f2 is still returned since
    its sign is what the factorization is used for.
    """
    ctx = context(prec)
    q = to_mp(ctx, q)
    v = to_mp(ctx, v)
    if ctx.im(q) != 0 or ctx.im(v) != 0:
        raise DomainError("sign factorization is defined for real q and v")
    d = q + 2 * v
    f2 = 2 * q + 4 * v + v * v
    if d == 0:
        if v == 0:
            raise DomainError("q = v = 0 leaves F_q undefined")
        return INFINITY, f2
    return (v / d) ** 2, f2


def _real_param(ctx, q):
    q = _param(ctx, q)
    if ctx.im(q) != 0:
        raise DomainError("fixed points are tabulated for real q only")
    return ctx.re(q)


def _cardano(ctx, q):
    # S = (q^2 + sqrt(R_c))^(1/3), R_c = q^3 (q - 32/27); principal branches.
    rc = q**3 * (q - ctx.mpf(32) / 27)
    s = ctx.cbrt(q * q + ctx.sqrt(rc))
    a = s / ctx.cbrt(2)
    b = ctx.cbrt(2) ** 4 * q / (3 * s)
    return a, b


def vc(q, prec: int = DEFAULT_PREC):
    """v_c(q) = 2^{-1/3} S + 2^{4/3} q / (3S), the positive fixed point (real q)."""
    ctx = context(prec)
    q = _real_param(ctx, q)
    a, b = _cardano(ctx, q)
    return _polish(ctx, q, ctx.re(a + b))


def _polish(ctx, q, v):
    # Newton on q^2 + 2qv - v^3; v_c is a simple root, while the closed form
    # loses half its digits where R_c rounds near zero
    for _ in range(2):
        d = 2 * q - 3 * v * v
        if d == 0:
            break
        v -= (q * q + 2 * q * v - v**3) / d
    return v


def fixed_points(q, prec: int = DEFAULT_PREC) -> FixedPointSet:
    """All fixed points of F_q for real q != 0.

    The finite non-zero ones solve q^2 + 2qv - v^3 = 0.  For 0 < q <= 32/27
    the two non-positive roots are real and returned with v_minus <= v_plus;
    otherwise they are a complex-conjugate pair (v_plus has positive
    imaginary part).
    """
    ctx = context(prec)
    q = _real_param(ctx, q)
    a, b = _cardano(ctx, q)
    v_c = _polish(ctx, q, ctx.re(a + b))
    disc = -(q**3) * (27 * q - 32)
    half = -(a + b) / 2
    rot = ctx.mpc(0, ctx.sqrt(3) / 2) * (a - b)
    r1, r2 = half + rot, half - rot
    if disc >= 0:
        lo, hi = sorted((ctx.re(r1), ctx.re(r2)))
        v_minus, v_plus = lo, hi
    else:
        # conjugate pair; fix the sign of the imaginary part deterministically
        z = ctx.mpc(ctx.re(r1), abs(ctx.im(r1)))
        v_plus, v_minus = z, ctx.conj(z)
    return FixedPointSet(q=q, v_c=v_c, v_minus=v_minus, v_plus=v_plus, discriminant=disc)


def critical_points(q, prec: int = DEFAULT_PREC):
    """[0, -q, -1 + sqrt(1-q), -1 - sqrt(1-q)]."""
    ctx = context(prec)
    q = _param(ctx, q)
    r = ctx.sqrt(1 - q)
    return [ctx.mpf(0), -q, -1 + r, -1 - r]


# ---------------------------------------------------------------------------
# orbit classification


@numba.njit(cache=True, nogil=True)
def _step_c128(q, v):
    d = q + 2.0 * v
    t = v / d
    return t * t * (2.0 * q + 4.0 * v + v * v)


@numba.njit(cache=True, nogil=True)
def _min_period_c128(q, rep, lam, tol):
    for d in range(1, lam + 1):
        if lam % d:
            continue
        z = rep
        ok = True
        for _ in range(d):
            if q + 2.0 * z == 0:
                ok = False
                break
            z = _step_c128(q, z)
        if ok and abs(z - rep) <= tol:
            return d
    return lam


@numba.njit(cache=True, nogil=True)
def classify_c128(q, v, max_iter, escape_radius, zero_radius, zero_hits, tol, p_max):
    """Double-precision orbit classifier; returns (kind, period, iters, rep).

    kind 4 flags a non-finite intermediate (caller retries at higher precision).
    """
    radius = max(escape_radius, 10.0 * abs(q))
    zero_run = 0
    tortoise = v
    power = 1
    lam = 0
    for it in range(1, max_iter + 1):
        if q + 2.0 * v == 0:
            return 1, 0, it, v
        v = _step_c128(q, v)
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            return 4, 0, it, v
        av = abs(v)
        if av > radius:
            return 1, 0, it, v
        if av < zero_radius:
            zero_run += 1
            if zero_run >= zero_hits:
                return 0, 0, it, v
        else:
            zero_run = 0
        lam += 1
        if abs(v - tortoise) <= tol:
            period = _min_period_c128(q, v, lam, tol)
            if av < zero_radius:
                return 0, 0, it, v
            return 2, period, it, v
        if lam == power:
            tortoise = v
            lam = 0
            if power < p_max:
                power *= 2
    return 3, 0, max_iter, v


def _classify_mp(q, v, opts: ClassifierOptions, prec: int):
    ctx = context(prec)
    if v is INFINITY:
        return OrbitClassification(Kind.TO_INFINITY, 0)
    radius = max(ctx.mpf(opts.escape_radius), 10 * abs(q))
    tol = opts.cycle_tol
    zero_run = 0
    tortoise = v
    power, lam = 1, 0
    for it in range(1, opts.max_iter + 1):
        v = apply_map(q, v, prec)
        if v is INFINITY or abs(v) > radius:
            return OrbitClassification(Kind.TO_INFINITY, it)
        if not ctx.isfinite(v):
            return None
        av = abs(v)
        if av < opts.zero_radius:
            zero_run += 1
            if zero_run >= opts.zero_hits:
                return OrbitClassification(Kind.TO_ZERO, it)
        else:
            zero_run = 0
        lam += 1
        if abs(v - tortoise) <= tol:
            if av < opts.zero_radius:
                return OrbitClassification(Kind.TO_ZERO, it)
            period = _min_period_mp(q, v, lam, tol, prec)
            return OrbitClassification(Kind.CYCLE, it, period, v)
        if lam == power:
            tortoise, lam = v, 0
            if power < opts.max_period:
                power *= 2
    return OrbitClassification(Kind.UNDECIDED, opts.max_iter)


def _min_period_mp(q, rep, lam, tol, prec):
    for d in range(1, lam + 1):
        if lam % d:
            continue
        z = iterate_map(q, rep, d, prec)
        if z is not INFINITY and abs(z - rep) <= tol:
            return d
    return lam


def classify_orbit(q, v0, opts: ClassifierOptions = RENDER_OPTIONS) -> OrbitClassification:
    """Classify the orbit of ``v0`` under F_q.

    Decision rules, applied after every iterate v:
      |v| > max(escape_radius, 10|q|)       -> TO_INFINITY
      |v| < zero_radius, zero_hits in a row -> TO_ZERO
      Brent cycle match within cycle_tol    -> CYCLE (minimal period <= max_period),
                                               or TO_ZERO when the cycle is at 0
      max_iter exhausted                    -> UNDECIDED
    At 53 bits the compiled double-precision kernel runs; a non-finite
    intermediate triggers one retry at doubled precision, then UNDECIDED.
    """
    prec = opts.prec
    ctx = context(prec)
    q = _param(ctx, q)
    if v0 is INFINITY:
        return OrbitClassification(Kind.TO_INFINITY, 0)
    v0 = to_mp(ctx, v0)
    if prec == 53:
        kind, period, iters, rep = classify_c128(
            complex(q), complex(v0), opts.max_iter, opts.escape_radius,
            opts.zero_radius, opts.zero_hits, opts.cycle_tol, opts.max_period,
        )
        if kind != _OVERFLOW:
            return _from_kernel(kind, period, iters, rep)
        retry = _classify_mp(q, v0, opts, 2 * prec)
    else:
        retry = _classify_mp(q, v0, opts, prec)
        if retry is None:
            retry = _classify_mp(q, v0, opts, 2 * prec)
    return retry if retry is not None else OrbitClassification(Kind.UNDECIDED, opts.max_iter)


def _from_kernel(kind, period, iters, rep) -> OrbitClassification:
    kind = Kind(int(kind))
    if kind is Kind.CYCLE:
        return OrbitClassification(kind, int(iters), int(period), complex(rep))
    return OrbitClassification(kind, int(iters))


def classify_retry(q, v0, opts: ClassifierOptions) -> OrbitClassification:
    """Doubled-precision reclassification used by the renderer for overflowed pixels."""
    ctx = context(2 * opts.prec)
    res = _classify_mp(to_mp(ctx, q), to_mp(ctx, v0), opts, 2 * opts.prec)
    return res if res is not None else OrbitClassification(Kind.UNDECIDED, opts.max_iter)
