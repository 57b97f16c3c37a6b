"""Specialisation of Z to one variable and high-precision root finding.

Roots come from Aberth-Ehrlich iteration in MPFR/MPC arithmetic (gmpy2),
started from Newton-polygon radii so that the many orders of magnitude in
the D_4 coefficients do not stall the first sweeps.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2

from .numeric import INFINITY, ConvergenceError, DomainError, PrecisionError, context, to_mp
from .poly import BivarPoly, UnivarPoly
from .rgdyn import iterate_map

__all__ = [
    "UnivarPoly",
    "RootSet",
    "MAX_SWEEPS",
    "default_precision",
    "residual_target",
    "specialize_v",
    "specialize_q",
    "find_roots",
    "eval_poly",
    "vieta_errors",
    "conjugate_pairing_error",
    "dynamical_residuals",
]

MAX_SWEEPS = 1000
_MAX_AUTO_PREC = 4096
_GOLDEN_ANGLE = math.pi * (3 - math.sqrt(5))


def default_precision(degree: int) -> int:
    if degree <= 64:
        return 256
    if degree <= 300:
        return 512
    return 1024


def residual_target(precision_bits: int) -> float:
    """Largest acceptable backward error at a given precision.

    1e-20 once the precision can deliver it; below ~80 bits the target is
    relaxed to 2^(10-prec) so double-precision runs remain usable.
    """
    return max(1e-20, 2.0 ** (10 - precision_bits))


@dataclass
class RootSet:
    roots: list
    residuals: list
    precision_bits: int
    converged: list = field(default_factory=list)

    def __len__(self):
        return len(self.roots)

    def as_complex(self) -> list[complex]:
        return [complex(z) for z in self.roots]

    def to_csv(self, path=None, comments: dict | None = None) -> str:
        buf = io.StringIO()
        for key, value in (comments or {}).items():
            buf.write(f"# {key}: {value}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["re", "im", "residual"])
        ctx = context(self.precision_bits)
        order = sorted(range(len(self.roots)), key=lambda k: (self.roots[k].real, self.roots[k].imag))
        for k in order:
            z = self.roots[k]
            writer.writerow([
                ctx.nstr(z.real, 25),
                ctx.nstr(z.imag, 25),
                f"{float(self.residuals[k]):.6e}",
            ])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text


def specialize_v(p: BivarPoly, v0) -> UnivarPoly:
    """Z(q, v0) as a polynomial in q."""
    return p.specialize(1, Fraction(v0))


def specialize_q(p: BivarPoly, q0) -> UnivarPoly:
    """Z(q0, v) as a polynomial in v."""
    return p.specialize(0, Fraction(q0))


def _log_abs(c: Fraction) -> float:
    c = abs(Fraction(c))
    return math.log(c.numerator) - math.log(c.denominator)


def _initial_guesses(coeffs: list[Fraction]) -> list[complex]:
    """Starting points on the Newton-polygon circles of ``coeffs``."""
    n = len(coeffs) - 1
    pts = [(k, _log_abs(c)) for k, c in enumerate(coeffs) if c != 0]
    hull: list[tuple[int, float]] = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) >= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    guesses = []
    for seg, ((k0, y0), (k1, y1)) in enumerate(zip(hull, hull[1:])):
        span = k1 - k0
        log_r = (y0 - y1) / span
        offset = seg * _GOLDEN_ANGLE + 2 * math.pi * k0 / n + 0.4
        for j in range(span):
            theta = offset + 2 * math.pi * j / span
            guesses.append((log_r, theta))
    return guesses


def _to_mpfr(c: Fraction):
    return gmpy2.mpfr(c.numerator) / c.denominator


def _gmp_to_mp(ctx, z):
    def conv(x):
        if x == 0:
            return ctx.mpf(0)
        man, exp = x.as_mantissa_exp()
        return ctx.mpf((int(man), int(exp)))

    return ctx.mpc(conv(z.real), conv(z.imag))


def _aberth(coeffs: list[Fraction], prec: int):
    """Roots of a polynomial with nonzero constant term.

    A root is converged when its Newton-Aberth step falls below
    2^(-prec/2) relative to max(1, |z|), or when its backward error has
    reached rounding level, whichever comes first.

    Returns (roots as gmpy2 mpc, converged flags, sweeps used, largest
    relative step of the final sweep).
    """
    n = len(coeffs) - 1
    lead = Fraction(coeffs[-1])
    with gmpy2.context(precision=prec, real_prec=prec, imag_prec=prec):
        mon = [_to_mpfr(Fraction(c) / lead) for c in coeffs]
        z = [
            gmpy2.exp(gmpy2.mpfr(lr)) * gmpy2.mpc(gmpy2.cos(gmpy2.mpfr(th)), gmpy2.sin(gmpy2.mpfr(th)))
            for lr, th in _initial_guesses(coeffs)
        ]
        tol = gmpy2.mpfr(2) ** (-(prec // 2))
        done = [False] * n
        rev = mon[::-1]
        absrev = [abs(c) for c in rev]
        noise = 8 * n * gmpy2.mpfr(2) ** (-prec)
        noisy = [False] * n
        zero = gmpy2.mpc(0)
        polishing = False
        sweeps = 0
        while True:
            sweeps += 1
            active = range(n) if polishing else [i for i in range(n) if not done[i]]
            steps = {}
            # Jacobi style: every correction in a sweep sees the same iterate
            for i in active:
                zi = z[i]
                az = abs(zi)
                p = rev[0]
                dp = zero
                mag = absrev[0]
                for c, ac in zip(rev[1:], absrev[1:]):
                    dp = dp * zi + p
                    p = p * zi + c
                    mag = mag * az + ac
                if abs(p) <= noise * mag:
                    # backward error at rounding level: further steps are noise
                    noisy[i] = True
                if p == 0:
                    steps[i] = zero
                    continue
                s = zero
                for j in range(n):
                    if j != i:
                        d = zi - z[j]
                        if d != 0:
                            s += 1 / d
                if dp == 0:
                    steps[i] = -1 / s if s != 0 else gmpy2.mpc(tol)
                else:
                    ratio = p / dp
                    steps[i] = ratio / (1 - ratio * s)
            rel_steps = []
            for i, w in steps.items():
                z[i] = z[i] - w
                rel = abs(w) / max(gmpy2.mpfr(1), abs(z[i]))
                rel_steps.append(rel)
                if noisy[i] or rel <= tol:
                    done[i] = True
            if polishing or sweeps >= MAX_SWEEPS:
                return z, done, sweeps, float(max(rel_steps, default=0))
            # one extra full sweep once every step is below tolerance
            polishing = all(done)


def _backward_error(coeffs: list[Fraction], z, ctx):
    val = ctx.mpf(0)
    mag = ctx.mpf(0)
    az = abs(z)
    for c in reversed(coeffs):
        cm = to_mp(ctx, Fraction(c))
        val = val * z + cm
        mag = mag * az + abs(cm)
    return abs(val) / mag if mag else ctx.mpf(0)


def find_roots(p: UnivarPoly, precision_bits: int | None = None) -> RootSet:
    """All complex roots of ``p`` with backward-error residuals.

    The exact root 0 is split off first.  The residual of a root z is
    |p(z)| / sum |a_i| |z|^i evaluated at the working precision.

    With ``precision_bits=None`` the working precision starts from
    :func:`default_precision` and doubles (up to 4096 bits) while the final
    correction step shows the roots resolved to worse than 2^(-prec/8),
    which happens for tight clusters.
    """
    if p.degree < 1:
        raise DomainError("polynomial must have degree at least 1")
    if precision_bits is not None:
        return _find_roots_at(p, precision_bits)[0]
    prec = default_precision(p.degree)
    while True:
        rs, last_step = _find_roots_at(p, prec)
        if last_step <= 2.0 ** (-prec / 8) or prec >= _MAX_AUTO_PREC:
            return rs
        prec *= 2


def _find_roots_at(p: UnivarPoly, prec: int):
    if prec < 53:
        raise DomainError(f"precision must be at least 53 bits, got {prec}")
    ctx = context(prec)
    k0 = p.multiplicity_at_zero()
    rest = [Fraction(c) for c in p.coeffs[k0:]]
    roots = [ctx.mpc(0)] * k0
    residuals = [ctx.mpf(0)] * k0
    flags = [True] * k0
    last_step = 0.0
    if len(rest) > 1:
        found, done, _, last_step = _aberth(rest, prec)
        coeffs = [Fraction(c) for c in p.coeffs]
        for z, ok in zip(found, done):
            zm = _gmp_to_mp(ctx, z)
            roots.append(zm)
            residuals.append(_backward_error(coeffs, zm, ctx))
            flags.append(ok)
    order = sorted(range(len(roots)), key=lambda k: (roots[k].real, roots[k].imag))
    result = RootSet(
        roots=[roots[k] for k in order],
        residuals=[residuals[k] for k in order],
        precision_bits=prec,
        converged=[flags[k] for k in order],
    )
    if not all(result.converged):
        bad = result.converged.count(False)
        raise ConvergenceError(f"{bad} roots unconverged after {MAX_SWEEPS} sweeps", partial=result)
    target = residual_target(prec)
    worst = max(result.residuals, default=0)
    if worst > target:
        raise PrecisionError(f"worst residual {float(worst):.3e} exceeds {target:.1e} at {prec} bits")
    return result, last_step


def eval_poly(p: UnivarPoly, z, prec: int = 53):
    """Horner evaluation returning (value, running error bound).

    The bound follows the classical running-error analysis of Horner's
    rule, widened by a factor covering complex multiplication.
    """
    ctx = context(prec)
    z = to_mp(ctx, z)
    if not p.coeffs:
        return ctx.mpf(0), ctx.mpf(0)
    u = ctx.ldexp(1, -prec)
    az = abs(z)
    y = to_mp(ctx, Fraction(p.coeffs[-1]))
    mu = abs(y) / 2
    for c in reversed(p.coeffs[:-1]):
        y = y * z + to_mp(ctx, Fraction(c))
        mu = mu * az + abs(y)
    bound = 4 * u * (2 * mu - abs(y))
    return y, max(bound, ctx.mpf(0))


def vieta_errors(p: UnivarPoly, rs: RootSet) -> tuple[float, float]:
    """Relative errors of the root sum and product against the coefficients."""
    ctx = context(rs.precision_bits)
    n = p.degree
    an = to_mp(ctx, Fraction(p.coeffs[-1]))
    want_sum = -to_mp(ctx, Fraction(p.coeffs[-2])) / an
    want_prod = (-1) ** n * to_mp(ctx, Fraction(p.coeffs[0])) / an
    got_sum = ctx.fsum(rs.roots)
    got_prod = ctx.fprod(rs.roots)

    def rel(a, b):
        scale = max(abs(b), 1) if b == 0 else abs(b)
        return float(abs(a - b) / scale)

    return rel(got_sum, want_sum), rel(got_prod, want_prod)


def conjugate_pairing_error(rs: RootSet) -> float:
    """Largest distance from a root to its matched conjugate partner."""
    pts = rs.as_complex()
    unused = list(range(len(pts)))
    worst = 0.0
    while unused:
        i = unused.pop(0)
        target = pts[i].conjugate()
        best = min(unused + [i], key=lambda j: abs(pts[j] - target))
        worst = max(worst, abs(pts[best] - target) / max(1.0, abs(target)))
        if best != i:
            unused.remove(best)
    return worst


def dynamical_residuals(rs: RootSet, m: int, fixed, plane: str = "q", prec: int | None = None) -> list[float]:
    """|F^m + q| / (1 + |q|) at each nonzero root.

    ``plane="q"``: roots are q values and ``fixed`` is v0.
    ``plane="v"``: roots are v values and ``fixed`` is q0.
    """
    prec = prec or rs.precision_bits
    ctx = context(prec)
    out = []
    for z in rs.roots:
        if z == 0:
            continue
        if plane == "q":
            q, v = z, fixed
        elif plane == "v":
            q, v = fixed, z
        else:
            raise DomainError(f"unknown plane {plane!r}")
        fm = iterate_map(q, v, m, prec)
        qm = to_mp(ctx, q)
        if fm is INFINITY:
            out.append(math.inf)
            continue
        out.append(float(abs(fm + qm) / (1 + abs(qm))))
    return out


# ---------------------------------------------------------------------------
# exact real-root counting (Descartes rule with bisection)


def _taylor_shift1(c: list[int]) -> list[int]:
    """Coefficients of p(x + 1)."""
    c = list(c)
    n = len(c) - 1
    for i in range(n):
        for k in range(n - 1, i - 1, -1):
            c[k] += c[k + 1]
    return c


def _sign_changes(c) -> int:
    signs = [x > 0 for x in c if x != 0]
    return sum(a != b for a, b in zip(signs, signs[1:]))


def _primitive(c: list[int]) -> list[int]:
    g = math.gcd(*c)
    return [x // g for x in c] if g > 1 else c


def _strip_zero_root(c: list[int]) -> list[int]:
    k = 0
    while k < len(c) - 1 and c[k] == 0:
        k += 1
    return c[k:]


def _roots_unit(c: list[int], depth: int = 0) -> int:
    """Real roots of sum c_k x^k in the open interval (0, 1)."""
    c = _strip_zero_root(c)
    n = len(c) - 1
    if n < 1:
        return 0
    v = _sign_changes(_taylor_shift1(c[::-1]))
    if v <= 1:
        return v
    if depth > 400:
        raise PrecisionError("root isolation did not terminate; polynomial may have a multiple root")
    left = _primitive([ck << (n - k) for k, ck in enumerate(c)])
    right = _taylor_shift1(left)
    mid = 1 if right[0] == 0 else 0
    return _roots_unit(left, depth + 1) + _roots_unit(right, depth + 1) + mid


def _integer_coeffs(coeffs) -> list[int]:
    den = 1
    for c in coeffs:
        den = math.lcm(den, Fraction(c).denominator)
    return _primitive([int(Fraction(c) * den) for c in coeffs])


def _shifted_scaled(coeffs, lo: Fraction, width: Fraction) -> list[int]:
    """Integer coefficients of p(lo + width * x), up to a positive factor."""
    c = [Fraction(x) for x in coeffs]
    n = len(c) - 1
    for i in range(n):
        for k in range(n - 1, i - 1, -1):
            c[k] += lo * c[k + 1]
    scaled = [ck * width**k for k, ck in enumerate(c)]
    return _integer_coeffs(scaled)


def count_real_roots(p: UnivarPoly, lo=None, hi=None) -> int:
    """Exact number of real roots of ``p`` in the open interval (lo, hi).

    ``None`` bounds mean infinity.  Roots are counted with multiplicity only
    when they are simple; the bisection refuses to terminate on a repeated
    real root and raises PrecisionError instead.
    """
    if p.degree < 1:
        raise DomainError("polynomial must have degree at least 1")
    coeffs = [Fraction(c) for c in p.coeffs]
    if lo is None or hi is None:
        bound = 1 + max(abs(c / coeffs[-1]) for c in coeffs[:-1])
        b = Fraction(2) ** math.ceil(math.log2(bound) + 1)
        lo = -b if lo is None else Fraction(lo)
        hi = b if hi is None else Fraction(hi)
    lo, hi = Fraction(lo), Fraction(hi)
    if not lo < hi:
        raise DomainError("need lo < hi")
    return _roots_unit(_shifted_scaled(coeffs, lo, hi - lo))
