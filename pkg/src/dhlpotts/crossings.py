"""Real-axis crossings of the q-plane zero locus.

Closed forms cover the outer crossings; the inner sequence q_k, where the
orbit of v0 lands on the ferromagnetic fixed point after k steps, is found
by scanning and bisection because g_k(q) = F_q^k(v0) - v_c(q) has poles.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass
from fractions import Fraction

from .numeric import INFINITY, BracketError, DomainError, PrecisionError, context, to_mp
from .rgdyn import apply_map, iterate_map, vc

__all__ = [
    "CrossingKind",
    "CrossingRecord",
    "MIN_PREC",
    "qc_afm",
    "q_pm_fm",
    "q_infinity",
    "q1_exact",
    "prefixed_solutions",
    "crossing_sequence",
    "critical_temperature",
    "sequence_csv",
    "summary_json",
]

MIN_PREC = 113
_LANDING_TOL = 1e-10
_MAX_GRID = 2**14
_START_GRID = 64


class CrossingKind(enum.Enum):
    THM_FORMULA = "ThmFormula"
    LANDS_ON_VC = "LandsOnVc"


@dataclass(frozen=True)
class CrossingRecord:
    k: int
    q_k: object
    residual: float
    kind: CrossingKind


def _check_afm(v0) -> None:
    if not (-1 <= v0 < 0):
        raise DomainError(f"v0 must lie in [-1, 0), got {v0}")


def _prec(prec: int, v0=None, power: float = 0.5) -> int:
    """Working precision, with guard bits when |v0| is small.

    Relative to q, the pole gap q + 2 v0 shrinks like |v0|^power at the
    closed-form values and must stay resolved.
    """
    prec = max(prec, MIN_PREC)
    if v0 is not None and 0 < abs(float(v0)) < 1:
        prec += int(-math.log2(abs(float(v0))) * power) + 8
    return prec


def _gap(a, b):
    if a is INFINITY or b is INFINITY:
        raise PrecisionError("pole of F_q hit at the working precision")
    return abs(a - b)


def qc_afm(v0, prec: int = MIN_PREC):
    """Rightmost real crossing (-2 - sqrt(-v0)) v0 for -1 <= v0 < 0.

    The value is checked to send v0 onto v_c in one step.
    """
    _check_afm(v0)
    ctx = context(_prec(prec, v0))
    v = to_mp(ctx, Fraction(v0) if isinstance(v0, (int, Fraction)) else v0)
    q = (-2 - ctx.sqrt(-v)) * v
    gap = _gap(apply_map(q, v, ctx.prec), vc(q, ctx.prec))
    if gap > _LANDING_TOL:
        raise PrecisionError(f"F_q(v0) misses v_c by {float(gap):.3e}")
    return q


def q_pm_fm(v0, prec: int = MIN_PREC):
    """The two real crossings (-1 -/+ sqrt(1+v0)) v0 for v0 > 0.

    At both values v0 itself is the ferromagnetic fixed point.
    """
    if not v0 > 0:
        raise DomainError(f"v0 must be positive, got {v0}")
    ctx = context(_prec(prec, v0, 1.0))
    v = to_mp(ctx, Fraction(v0) if isinstance(v0, (int, Fraction)) else v0)
    root = ctx.sqrt(1 + v)
    pair = ((-1 - root) * v, (-1 + root) * v)
    for q in pair:
        gap = _gap(apply_map(q, v, ctx.prec), v)
        if gap > _LANDING_TOL * max(1, abs(v)):
            raise PrecisionError(f"v0 is not fixed by F_q at q = {q}: off by {float(gap):.3e}")
    return pair


def q_infinity(v0, prec: int = MIN_PREC):
    """Limit of the crossing sequence: 32/27 up to v0 = -8/9, then the FM-type formula."""
    _check_afm(v0)
    ctx = context(_prec(prec))
    if v0 <= Fraction(-8, 9):
        return ctx.mpf(32) / 27
    v = to_mp(ctx, Fraction(v0) if isinstance(v0, (int, Fraction)) else v0)
    return (-1 - ctx.sqrt(1 + v)) * v


def q1_exact(prec: int = MIN_PREC):
    """Real root of q^3 - 5q^2 + 11q - 9 in radicals."""
    ctx = context(_prec(prec))
    s = ctx.cbrt(1 + 3 * ctx.sqrt(57))
    q = -s / 3 + ctx.mpf(8) / (3 * s) + ctx.mpf(5) / 3
    resid = abs(((q - 5) * q + 11) * q - 9)
    if resid > 1e-14:
        raise PrecisionError(f"cubic residual {float(resid):.3e}")
    return q


def prefixed_solutions(prec: int = MIN_PREC) -> list:
    """The real q with F_q^2(-1) = F_q(-1)."""
    ctx = context(_prec(prec))
    sols = [ctx.mpf(1), ctx.mpf(3) / 2, q1_exact(ctx.prec), ctx.mpf(3)]
    for q in sols:
        one = apply_map(q, -1, ctx.prec)
        two = apply_map(q, one, ctx.prec)
        if abs(two - one) > _LANDING_TOL:
            raise PrecisionError(f"q = {q} does not satisfy the prefixed equation")
    return sols


def _g(ctx, q, v0, k):
    fk = iterate_map(q, v0, k, ctx.prec)
    if fk is INFINITY:
        return None
    return fk - vc(q, ctx.prec)


def _bisect(ctx, v0, k, lo, glo, hi, ghi):
    width_tol = ctx.ldexp(abs(hi) + abs(lo), -(ctx.prec - 16))
    while hi - lo > width_tol:
        mid = (lo + hi) / 2
        gm = _g(ctx, mid, v0, k)
        if gm is None:
            return None
        if gm == 0:
            return mid
        if (gm < 0) == (glo < 0):
            lo, glo = mid, gm
        else:
            hi, ghi = mid, gm
    return lo if abs(glo) <= abs(ghi) else hi


def _next_crossing(ctx, v0, k, lo, hi):
    """Largest root of g_k in (lo, hi), scanning outward from hi."""
    span = hi - lo
    # distances from hi, geometric from span*1e-12 up to span*(1 - 1e-9)
    d_min = span * ctx.mpf("1e-12")
    d_max = span * (1 - ctx.mpf("1e-9"))
    ratio_log = ctx.log(d_max / d_min)
    n = _START_GRID
    while n <= _MAX_GRID:
        prev = None
        for j in range(n + 1):
            q = hi - d_min * ctx.exp(ratio_log * j / n)
            gq = _g(ctx, q, v0, k)
            if gq is None:
                prev = None
                continue
            if prev is not None:
                pq, pg = prev
                if (gq < 0) != (pg < 0) or gq == 0:
                    root = _bisect(ctx, v0, k, q, gq, pq, pg)
                    if root is not None:
                        resid = _g(ctx, root, v0, k)
                        if resid is not None and abs(resid) <= _LANDING_TOL:
                            return root, abs(resid)
                    # otherwise a pole: keep scanning
            prev = (q, gq)
        n *= 2
    return None


def crossing_sequence(v0, k_max: int, prec: int = MIN_PREC) -> list[CrossingRecord]:
    """q_0 = q_c(v0), then for k >= 1 the largest q_k < q_{k-1} with F^k(v0) = v_c.

    Raises BracketError carrying the records found so far if a step finds
    no admissible sign change at the finest scan.
    """
    _check_afm(v0)
    if not 1 <= k_max <= 16:
        raise DomainError(f"k_max must lie in 1..16, got {k_max}")
    ctx = context(_prec(prec))
    v = to_mp(ctx, Fraction(v0) if isinstance(v0, (int, Fraction)) else v0)
    q0 = qc_afm(v0, ctx.prec)
    records = [CrossingRecord(0, q0, float(abs(apply_map(q0, v, ctx.prec) - vc(q0, ctx.prec))), CrossingKind.THM_FORMULA)]
    lo = q_infinity(v0, ctx.prec)
    hi = q0
    for k in range(1, k_max + 1):
        found = _next_crossing(ctx, v, k, lo, hi)
        if found is None:
            raise BracketError(f"no crossing found for k = {k} in ({lo}, {hi})", partial=records)
        q, resid = found
        records.append(CrossingRecord(k, q, float(resid), CrossingKind.LANDS_ON_VC))
        hi = q
    return records


def critical_temperature(q, J_over_kB=1.0, prec: int = 53):
    """k_B T_c / J for the ferromagnet: J / ln(1 + v_c(q))."""
    if q < Fraction(32, 27):
        raise DomainError(f"q must be at least 32/27, got {q}")
    if not J_over_kB > 0:
        raise DomainError("J/k_B must be positive")
    ctx = context(prec)
    v = vc(q, prec)
    if v <= 0:
        raise DomainError(f"v_c({q}) = {v} is not positive")
    return to_mp(ctx, J_over_kB) / ctx.log(1 + v)


def _fmt(x, digits=12) -> str:
    ctx = context(MIN_PREC)
    return ctx.nstr(ctx.mpf(x), digits)


def sequence_csv(records: list[CrossingRecord], comments: dict | None = None) -> str:
    buf = io.StringIO()
    for key, value in (comments or {}).items():
        buf.write(f"# {key}: {value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["k", "q_k", "residual"])
    for r in records:
        writer.writerow([r.k, _fmt(r.q_k), f"{r.residual:.3e}"])
    return buf.getvalue()


def summary_json(v0, records: list[CrossingRecord], meta: dict | None = None) -> str:
    """JSON summary of a sequence together with the closed-form values for v0."""
    out = {
        "v0": float(v0),
        "sequence": [
            {"k": r.k, "q_k": _fmt(r.q_k), "residual": r.residual, "kind": r.kind.value} for r in records
        ],
    }
    if -1 <= v0 < 0:
        out["qc_afm"] = _fmt(qc_afm(v0))
        out["q_infinity"] = _fmt(q_infinity(v0))
    elif v0 > 0:
        out["q_pm_fm"] = [_fmt(x) for x in q_pm_fm(v0)]
    if meta:
        out["meta"] = meta
    return json.dumps(out, indent=2)
