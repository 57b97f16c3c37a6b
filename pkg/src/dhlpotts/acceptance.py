"""The acceptance suite, shared by ``dhl verify`` and the test suite.

Each criterion returns a :class:`CriterionResult` with the measured values
and wall time; a criterion passes only if its check holds and it finished
inside its time budget.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from . import crossings, locus, partition, polyalg, rgdyn

__all__ = ["CriterionResult", "CRITERIA", "GROUPS", "run", "run_all"]


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float
    budget: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number:2d} {self.name}: {self.detail} ({self.seconds:.1f}s / {self.budget:.0f}s)"


def _printed_tol(text: str) -> float:
    """Half a unit in the last printed decimal place."""
    decimals = len(text.split(".")[1]) if "." in text else 0
    return 0.5 * 10.0 ** (-decimals)


# ---------------------------------------------------------------------------


def golden_polynomials():
    q, v = partition._Q, partition._V
    z0 = q * (q + v)
    z1 = q * (q**3 + 4 * q**2 * v + 6 * q * v**2 + 4 * v**3 + v**4)
    p1 = polyalg.UnivarPoly([0, -3, 6, -4, 1])
    checks = {
        "Z(D_0)": partition.dhl_partition(0) == z0,
        "Z(D_1)": partition.dhl_partition(1) == z1,
        "P(D_1)": partition.chromatic(1) == p1,
    }
    return all(checks.values()), ", ".join(f"{k} {'exact' if ok else 'MISMATCH'}" for k, ok in checks.items())


def oracle_equivalence():
    parts = []
    ok = True
    for m in (0, 1, 2):
        edges, n = partition.dhl_edges(m)
        same = partition.brute_force_partition(edges, n) == partition.dhl_partition(m)
        ok &= same
        parts.append(f"D_{m} {'match' if same else 'MISMATCH'} ({2 ** len(edges)} subgraphs)")
    circ = partition.circuit_partition(4) == partition.dhl_partition(1)
    ok &= circ
    parts.append(f"C_4 = D_1 {'yes' if circ else 'NO'}")
    return ok, ", ".join(parts)


def rg_identity(samples: int = 100, seed: int = 2024):
    rng = random.Random(seed)
    bad = 0
    for m in range(4):
        zm, zn = partition.dhl_partition(m), partition.dhl_partition(m + 1)
        count = 0
        while count < samples:
            q = Fraction(rng.randint(-60, 60), rng.randint(1, 20))
            v = Fraction(rng.randint(-60, 60), rng.randint(1, 20))
            if q == 0 or q + 2 * v == 0:
                continue
            vp = v * v * (2 * q + 4 * v + v * v) / (q + 2 * v) ** 2
            if zn.evaluate(q, v) != zm.evaluate(q, vp) * (q + 2 * v) ** (2 ** (2 * m + 1)):
                bad += 1
            count += 1
    return bad == 0, f"{4 * samples} exact evaluations, {bad} mismatches"


PUBLISHED_VC = {1: "1.6180", Fraction(32, 27): "1.7778", 2: "2.3830", 3: "3", 4: "3.5386", 5: "4.0261", 16: "8"}


def critical_couplings():
    worst = 0.0
    for q, text in PUBLISHED_VC.items():
        got = float(rgdyn.vc(q))
        worst = max(worst, abs(got - float(text)))
    return worst < 5e-5, f"max |v_c - table| = {worst:.2e} (tolerance 5e-5)"


PUBLISHED_QK = [
    "3", "1.6388969195", "1.4097005138", "1.3232009243", "1.2798668287",
    "1.2546493642", "1.2385319865", "1.2275429153", "1.2196860382", "1.2138598416",
]


def crossing_values():
    recs = crossings.crossing_sequence(-1, 9)
    worst = max(abs(float(r.q_k) - float(t)) for r, t in zip(recs, PUBLISHED_QK))
    ok = len(recs) == 10 and worst <= 1e-8
    return ok, f"max |q_k - table| = {worst:.2e} over k=0..9 (tolerance 1e-8)"


def transition_values():
    afm = {-1: "3", -0.8: "2.316", -0.5: "1.354", -0.2: "0.4894"}
    fm = {1: ("-2.414", "0.4142"), 2: ("-5.464", "1.464"), 4: ("-12.944", "4.944"), 99: ("-1089", "891")}
    ok = True
    worst = 0.0
    for v0, text in afm.items():
        err = abs(float(crossings.qc_afm(v0)) - float(text))
        ok &= err <= _printed_tol(text)
        worst = max(worst, err)
    for v0, pair in fm.items():
        got = crossings.q_pm_fm(v0)
        for g, text in zip(got, pair):
            err = abs(float(g) - float(text))
            ok &= err <= _printed_tol(text)
            worst = max(worst, err)
    exact = crossings.q_pm_fm(99)
    ok &= exact[0] == -1089 and exact[1] == 891
    return ok, f"all within printed digits (max deviation {worst:.1e}); v0=99 gives ({float(exact[0]):g}, {float(exact[1]):g})"


def zero_dynamics():
    z4 = partition.dhl_partition(4)
    ok = True
    parts = []
    p = partition.reduced(polyalg.specialize_v(z4, -1))
    rs = polyalg.find_roots(p, 512)
    worst = max(polyalg.dynamical_residuals(rs, 4, -1, "q"))
    ok &= len(rs) == 171 and worst <= 1e-6
    parts.append(f"q-plane v0=-1: {len(rs)} roots, worst {worst:.1e}")
    for q0 in (100, -100, 1000):
        rs = polyalg.find_roots(polyalg.specialize_q(z4, q0), 512)
        worst = max(polyalg.dynamical_residuals(rs, 4, q0, "v"))
        ok &= len(rs) == 256 and worst <= 1e-6
        parts.append(f"v-plane q0={q0}: {len(rs)} roots, worst {worst:.1e}")
    return ok, "; ".join(parts)


def chromatic_structure():
    ok = True
    parts = []
    for m in range(5):
        p = partition.chromatic(m)
        n = partition.graph_stats(m).n
        real_total = polyalg.count_real_roots(p)
        simple_01 = p.evaluate(0) == 0 and p.evaluate(1) == 0
        gap = polyalg.count_real_roots(p, 1, Fraction(32, 27)) + (p.evaluate(Fraction(32, 27)) == 0)
        at2 = p.evaluate(2) == 2
        at3 = p.evaluate(3) == 2 * 3 ** (n // 2)
        good = real_total == 2 and simple_01 and gap == 0 and at2 and at3
        ok &= good
        parts.append(f"m={m}:{'ok' if good else 'FAIL'}")
    w = partition.w_per_site(4, 3)
    rel = abs(w - math.sqrt(3)) / math.sqrt(3)
    ok &= rel <= 0.01
    return ok, " ".join(parts) + f"; |P(D_4,3)|^(1/172) = {w:.5f} ({100 * rel:.2f}% from sqrt 3)"


def map_property_suites(seed: int = 7):
    rng = random.Random(seed)
    failures = {}
    # the interval [-1, inf) is invariant and F+1 is a perfect square
    bad = 0
    for _ in range(2000):
        q = rng.uniform(-10, 10)
        v = -1 + rng.expovariate(0.3)
        if q == 0 or abs(q + 2 * v) < 1e-9:
            continue
        f = complex(rgdyn.apply_map(q, v))
        y = v + 1
        sq = ((q + y * y - 1) / (q + 2 * y - 2)) ** 2
        if f.real < -1 - 1e-12 or abs(f.real + 1 - sq) > 1e-12 * max(1.0, abs(sq)):
            bad += 1
    failures["invariant interval"] = bad
    # repelling ferromagnetic fixed point
    bad = 0
    for _ in range(1000):
        q = rng.uniform(-10, 10) or 1.0
        vc = rgdyn.vc(q)
        if not rgdyn.map_derivative(q, vc).real > 1:
            bad += 1
    failures["F'(v_c) > 1"] = bad
    # FM dichotomy on a 200 x 200 lattice
    bad = 0
    opts = rgdyn.SOLVER_OPTIONS
    for i in range(200):
        q = -10 + 20 * (i + 0.5) / 200
        vc = float(rgdyn.vc(q))
        for j in range(200):
            v0 = 10 * (j + 0.5) / 200 * max(1.0, vc)
            if abs(v0 - vc) < 1e-6:
                continue
            kind = rgdyn.classify_orbit(q, v0, opts).kind
            want = rgdyn.Kind.TO_ZERO if v0 < vc else rgdyn.Kind.TO_INFINITY
            bad += kind is not want
    failures["FM dichotomy"] = bad
    # monotone AFM orbits for q < 0
    bad = 0
    for _ in range(500):
        q = -rng.uniform(0.01, 10)
        v = -rng.uniform(0.0, 1.0) or -1.0
        prev = v
        for _ in range(60):
            nxt = float(complex(rgdyn.apply_map(q, prev)).real)
            if not (prev < nxt <= 0) and not (prev == nxt == 0):
                bad += 1
                break
            prev = nxt
            if prev == 0:
                break
    failures["monotone AFM orbit"] = bad
    ok = not any(failures.values())
    return ok, ", ".join(f"{k}: {v} failures" for k, v in failures.items())


def _axis_row(v0, key, width):
    re_min, re_max, _, _ = locus.PRESET_WINDOWS[key]
    span = (re_max - re_min) / width
    return locus.render_q_plane(v0, locus.GridSpec(re_min, re_max, -span / 2, span / 2, width, 1))


def _contains(brackets, x):
    return any(a <= x <= b for a, b in brackets)


def region_diagrams():
    ok = True
    parts = []
    grids = {}
    for v0, key in ((-1, "q:-1"), (1, "q:1"), (99, "q:99")):
        spec = locus.GridSpec(*locus.PRESET_WINDOWS[key], 800, 800)
        one = locus.render_q_plane(v0, spec, threads=1)
        many = locus.render_q_plane(v0, spec, threads=4)
        same = bool((one.kind == many.kind).all() and (one.iters == many.iters).all() and (one.period == many.period).all())
        ok &= same
        grids[v0] = one
        parts.append(f"v0={v0} deterministic={same}")
    # transitions along the real axis, using the 800-pixel row centered on Im = 0
    br = locus.extract_real_axis_crossings(_axis_row(-1, "q:-1", 800))
    dx = 4.5 / 800
    q1 = float(crossings.q1_exact())
    cluster = [b for b in br if 32 / 27 - dx <= b[0] and b[1] <= 1.26]
    afm_ok = _contains(br, 0.0) and _contains(br, q1) and _contains(br, 3.0) and len(cluster) >= 3
    ok &= afm_ok
    parts.append(f"v0=-1 brackets hit 0, q1, 3 and {len(cluster)} near 32/27: {afm_ok}")
    for v0, key in ((1, "q:1"), (99, "q:99")):
        br = locus.extract_real_axis_crossings(_axis_row(v0, key, 800))
        qm, qp = (float(x) for x in crossings.q_pm_fm(v0))
        fm_ok = len(br) == 2 and _contains(br[:1], qm) and _contains(br[1:], qp)
        ok &= fm_ok
        parts.append(f"v0={v0} two brackets at q-/q+: {fm_ok}")
    z4 = partition.dhl_partition(4)
    for v0 in (-1, 1):
        rs = polyalg.find_roots(partition.reduced(polyalg.specialize_v(z4, v0)))
        frac = locus.boundary_coherence(grids[v0], rs.as_complex(), 2.0)
        ok &= frac >= 0.9
        parts.append(f"v0={v0} roots near boundary/black {100 * frac:.1f}%")
    return ok, "; ".join(parts)


def asymptotics():
    qp = float(crossings.q_pm_fm(10**4)[1])
    ratio = qp / 1e6
    ok = 0.98 <= ratio <= 1.0
    # positive real v-plane crossing for q0 = 100 from a rendered row
    width = 4000
    span = 50 / width
    grid = locus.render_v_plane(100, locus.GridSpec(0.0, 50.0, -span / 2, span / 2, width, 1))
    br = locus.extract_real_axis_crossings(grid)
    positive = [b for b in br if b[0] > 0]
    target = 100 ** (2 / 3)
    if positive:
        v_cross = sum(positive[0]) / 2
        rel = abs(v_cross - target) / target
        ok &= rel <= 0.15
        tail = f"v-plane crossing {v_cross:.3f} vs 100^(2/3) = {target:.3f} ({100 * rel:.1f}%)"
    else:
        ok = False
        tail = "no positive v-plane crossing found"
    return ok, f"q_+(1e4)/1e6 = {ratio:.5f}; " + tail


CRITERIA: dict[int, tuple[str, Callable, float]] = {
    1: ("exact golden polynomials", golden_polynomials, 1),
    2: ("brute-force oracle equivalence", oracle_equivalence, 30),
    3: ("RG identity", rg_identity, 60),
    4: ("critical couplings v_c", critical_couplings, 1),
    5: ("crossing sequence q_k", crossing_values, 60),
    6: ("transition formulas", transition_values, 1),
    7: ("zero/dynamics equivalence", zero_dynamics, 600),
    8: ("chromatic structure", chromatic_structure, 60),
    9: ("map property suites", map_property_suites, 120),
    10: ("region diagram consistency", region_diagrams, 300),
    11: ("asymptotic scaling", asymptotics, 60),
}

GROUPS = {
    "exact": [1, 2, 3],
    "oracle": [2],
    "tables": [4, 5],
    "transitions": [6, 11],
    "zeros": [7],
    "chromatic": [8],
    "properties": [9],
    "render": [10],
    "all": list(CRITERIA),
}


def run(number: int) -> CriterionResult:
    name, fn, budget = CRITERIA[number]
    start = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # a crash is a failed criterion, reported as such
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    elapsed = time.perf_counter() - start
    if elapsed > budget:
        detail += "; over time budget"
    return CriterionResult(number, name, bool(ok) and elapsed <= budget, detail, elapsed, budget)


def run_all(numbers=None, echo: bool = False) -> list[CriterionResult]:
    results = []
    for n in numbers or list(CRITERIA):
        res = run(n)
        if echo:
            print(res.line(), flush=True)
        results.append(res)
    return results
