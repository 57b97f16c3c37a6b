import itertools
import math
import random
import warnings
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from dhlpotts.numeric import DivisibilityError, DomainError, ResourceError
from dhlpotts.partition import (
    MAX_BRUTE_FORCE_EDGES,
    brute_force_partition,
    chromatic,
    circuit_partition,
    circuit_q_crossings,
    closure,
    dhl_edges,
    dhl_partition,
    dhl_weights,
    edge_weights,
    graph_stats,
    parallel,
    potts_from_tutte,
    reduced,
    series,
    tutte_from_potts,
    w_per_site,
)
from dhlpotts.poly import BivarPoly, UnivarPoly

Q, V = BivarPoly.var(0), BivarPoly.var(1)
ONE = BivarPoly.const(1)
rationals = st.builds(Fraction, st.integers(-60, 60).filter(bool), st.integers(1, 9))


def cycle_edges(n):
    return [(i, (i + 1) % n) for i in range(n)]


# ---- composition ----

def test_edge_and_closure():
    w = edge_weights()
    assert (w.same, w.diff) == (ONE + V, ONE)
    assert closure(w) == Q * (Q + V)
    assert closure(w).specialize(1, 0) == UnivarPoly([0, 0, 1])


def test_series_of_two_edges():
    w = series(edge_weights(), edge_weights())
    assert w.same == (ONE + V) ** 2 + (Q - 1)
    assert w.diff == 2 * (ONE + V) + (Q - 2)
    assert w.same.specialize(1, 0) == w.diff.specialize(1, 0) == UnivarPoly([0, 1])
    assert closure(w) == brute_force_partition([(0, 1), (1, 2)], 3)


def test_parallel_of_two_edges():
    w = parallel(edge_weights(), edge_weights())
    assert closure(w) == Q * (ONE + V) ** 2 + Q * (Q - 1)
    assert closure(w) == brute_force_partition([(0, 1), (0, 1)], 2)
    ident = type(w)(ONE, ONE)
    assert parallel(w, ident) == w


def test_level_one_is_four_cycle():
    s = series(edge_weights(), edge_weights())
    z = closure(parallel(s, s))
    assert z == (Q + V) ** 4 + (Q - 1) * V**4
    assert z == dhl_partition(1)
    assert z == circuit_partition(4)
    assert z == brute_force_partition(cycle_edges(4), 4)


def test_low_levels_closed_form():
    assert dhl_partition(0) == Q * Q + Q * V
    assert dhl_partition(1) == Q * (Q**3 + 4 * Q**2 * V + 6 * Q * V**2 + 4 * V**3 + V**4)


@pytest.mark.parametrize("m", [0, 1, 2])
def test_matches_spanning_subgraph_sum(m):
    edges, n = dhl_edges(m)
    assert dhl_partition(m) == brute_force_partition(edges, n)


def test_brute_force_edge_cases():
    assert brute_force_partition([], 5) == Q**5
    with pytest.raises(ResourceError):
        brute_force_partition([(0, 1)] * (MAX_BRUTE_FORCE_EDGES + 1), 2)


@pytest.mark.parametrize("m", range(5))
def test_degrees_and_positivity(m):
    z = dhl_partition(m)
    st_ = graph_stats(m)
    assert (z.deg_q, z.deg_v) == (st_.n, st_.e)
    assert all(c > 0 and c.denominator == 1 for _, c in z.items())
    if m <= 3:
        for q, v in itertools.product([Fraction(1, 3), 1, 5], [Fraction(1, 7), 2]):
            assert z.evaluate(Fraction(q), Fraction(v)) > 0


def test_level_cap():
    with pytest.raises(ResourceError):
        dhl_partition(5)
    with pytest.raises(ResourceError):
        chromatic(6)


@pytest.mark.parametrize("m", [0, 1, 2, 3])
def test_rg_identity(m):
    rng = random.Random(1000 + m)
    z, z_next = dhl_partition(m), dhl_partition(m + 1)
    power = 2 ** (2 * m + 1)
    for _ in range(100 if m < 3 else 25):
        q = Fraction(rng.randint(-30, 30), rng.randint(1, 9))
        v = Fraction(rng.randint(-30, 30), rng.randint(1, 9))
        if q == 0 or q + 2 * v == 0:
            continue
        vp = v * v * (2 * q + 4 * v + v * v) / (q + 2 * v) ** 2
        assert z_next.evaluate(q, v) == z.evaluate(q, vp) * (q + 2 * v) ** power


def _ry(q, y):
    return ((q + y * y - 1) / (q + 2 * (y - 1))) ** 2


@settings(max_examples=100)
@given(rationals, rationals, st.integers(0, 3))
def test_terminal_ratio_follows_orbit(q, y, m):
    w = dhl_weights(m)
    v = y - 1
    diff = w.diff.evaluate(q, v)
    orbit = y
    for _ in range(m):
        d = q + 2 * (orbit - 1)
        assume(d != 0)
        orbit = _ry(q, orbit)
    assume(diff != 0)
    assert w.same.evaluate(q, v) / diff == orbit


# ---- chromatic ----

def test_chromatic_low_levels():
    assert chromatic(0) == UnivarPoly([0, -1, 1])
    assert chromatic(1) == UnivarPoly([0, -1, 1]) * UnivarPoly([3, -3, 1])


@pytest.mark.parametrize("m", range(5))
def test_chromatic_at_two_and_three(m):
    p = chromatic(m)
    n = graph_stats(m).n
    assert p(2) == 2
    assert p(3) == 2 * 3 ** (n // 2)


def test_chromatic_local_extrema_on_one_two():
    p = chromatic(2)
    xs = [Fraction(1000 + i, 1000) for i in range(1001)]
    ys = [p(x) for x in xs]
    ext = [(xs[i], ys[i]) for i in range(1, 1000) if (ys[i] - ys[i - 1]) * (ys[i + 1] - ys[i]) < 0]
    (x_max, y_max), (x_min, y_min) = ext
    assert y_max > y_min > 0
    assert abs(x_max - Fraction(11, 10)) < Fraction(1, 100) and float(y_max) == pytest.approx(0.041, rel=0.05)
    assert abs(x_min - Fraction(136, 100)) < Fraction(1, 100) and float(y_min) == pytest.approx(0.0080, rel=0.05)


def test_reduced():
    assert reduced(Q * (Q + V)) == Q + V
    assert reduced(chromatic(1)) == UnivarPoly([-1, 1]) * UnivarPoly([3, -3, 1])
    assert reduced(Q**7) == Q**6
    with pytest.raises(DivisibilityError):
        reduced(Q + V)
    with pytest.raises(DivisibilityError):
        reduced(UnivarPoly([1, 1]))


# ---- Tutte ----

def _tutte_brute(edges, n):
    """Rank-generating sum over all edge subsets."""
    x, y = BivarPoly.var(0, ("x", "y")), BivarPoly.var(1, ("x", "y"))
    one = BivarPoly.const(1, ("x", "y"))

    def rank(subset):
        parent = list(range(n))

        def find(a):
            while parent[a] != a:
                a = parent[a]
            return a

        r = 0
        for i in subset:
            a, b = find(edges[i][0]), find(edges[i][1])
            if a != b:
                parent[a] = b
                r += 1
        return r

    full = rank(range(len(edges)))
    out = BivarPoly({}, ("x", "y"))
    for mask in range(1 << len(edges)):
        sub = [i for i in range(len(edges)) if mask >> i & 1]
        r = rank(sub)
        out = out + (x - one) ** (full - r) * (y - one) ** (len(sub) - r)
    return out


def test_tutte_examples():
    x, y = BivarPoly.var(0, ("x", "y")), BivarPoly.var(1, ("x", "y"))
    assert tutte_from_potts(dhl_partition(0), 2) == x
    t4 = tutte_from_potts(circuit_partition(4), 4)
    assert t4 == x**3 + x**2 + x + y
    assert t4 == _tutte_brute(cycle_edges(4), 4)


@pytest.mark.parametrize("m", [0, 1, 2, 3])
def test_tutte_round_trip(m):
    z = dhl_partition(m)
    n = graph_stats(m).n
    t = tutte_from_potts(z, n)
    assert all(c > 0 for _, c in t.items())
    assert potts_from_tutte(t, n) == z


def test_tutte_small_graph_oracle():
    edges = [(0, 1), (1, 2), (2, 0), (2, 3), (3, 0)]
    z = brute_force_partition(edges, 4)
    assert tutte_from_potts(z, 4) == _tutte_brute(edges, 4)


def test_tutte_rejects_non_potts():
    with pytest.raises(DivisibilityError):
        tutte_from_potts(Q + V, 2)


# ---- circuits ----

def test_circuit():
    tri = circuit_partition(3)
    assert tri.specialize(1, -1) == UnivarPoly.from_roots([0, 1, 2])
    assert tri == brute_force_partition(cycle_edges(3), 3)
    assert circuit_partition(9).specialize(1, 0) == UnivarPoly([0] * 9 + [1])
    with pytest.raises(DomainError):
        circuit_partition(2)


def test_circuit_crossings():
    assert circuit_q_crossings(-1) == (0, 2)
    assert circuit_q_crossings(1) == (0, -2)
    assert circuit_q_crossings(Fraction(3, 7))[1] == Fraction(-6, 7)
    with pytest.raises(DomainError):
        circuit_q_crossings(0)


@pytest.mark.parametrize("v0", [-1, Fraction(-1, 2), 2])
def test_circuit_locus_crosses_axis_at_minus_two_v(v0):
    # |q+v| = |v| on the locus; at q = -2v both sides have equal modulus
    q = -2 * Fraction(v0)
    assert abs(q + v0) == abs(Fraction(v0))


def _log_abs(x: Fraction) -> float:
    return math.log(abs(x.numerator)) - math.log(x.denominator)


def test_order_of_limits_gap():
    q, v = Fraction(1, 10**9), Fraction(-1)
    z64 = circuit_partition(64)
    assert z64.evaluate(Fraction(0), v) == 0
    w64 = math.exp(_log_abs(z64.evaluate(q, v)) / 64)
    assert w64 > 0.75
    # at fixed small q the root climbs towards |q + v| as the circuit grows
    ws = [math.exp(_log_abs((q + v) ** n + (q - 1) * v**n) / n) for n in (64, 256, 1024, 4096, 16384)]
    assert ws[0] == w64
    assert ws == sorted(ws)
    assert abs(ws[-1] - (1 - 1e-9)) < 1e-3


# ---- statistics ----

def test_graph_stats():
    s4 = graph_stats(4)
    assert (s4.n, s4.e) == (172, 256)
    assert s4.delta_eff == Fraction(3) / (1 + Fraction(1, 128))
    assert float(s4.delta_eff) == pytest.approx(2.98, abs=0.005)
    s0 = graph_stats(0)
    assert (s0.n, s0.e, s0.delta_eff) == (2, 1, 1)
    assert s0.hausdorff_dim == 2
    for m in range(8):
        s = graph_stats(m)
        assert s.n == 2 * (4**m + 2) // 3 and s.e == 4**m and s.delta_eff == Fraction(2 * s.e, s.n)
    with pytest.raises(DomainError):
        graph_stats(-1)


def test_edge_list_shape():
    for m in range(4):
        edges, n = dhl_edges(m)
        s = graph_stats(m)
        assert len(edges) == s.e and n == s.n
        deg = [0] * n
        for a, b in edges:
            deg[a] += 1
            deg[b] += 1
        assert deg[0] == deg[1] == 2**m


def test_w_per_site():
    assert w_per_site(4, 3) == pytest.approx(3 ** (86 / 172) * 2 ** (1 / 172), rel=1e-12)
    ws = [w_per_site(m, 3) for m in range(5)]
    assert all(abs(b - math.sqrt(3)) < abs(a - math.sqrt(3)) for a, b in zip(ws, ws[1:]))
    assert w_per_site(3, 2) == pytest.approx(2 ** (1 / graph_stats(3).n))
    assert w_per_site(2, 0) == 0
    assert w_per_site(2, Fraction(1, 2)) > 0


def test_large_level_needs_flag():
    # the flag route only warns; building D_5 itself is left to the CLI smoke test
    from dhlpotts.partition import _check_level

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        _check_level(5, True)
    assert any(issubclass(w.category, ResourceWarning) for w in caught)
    with pytest.raises(ResourceError):
        _check_level(6, True)
