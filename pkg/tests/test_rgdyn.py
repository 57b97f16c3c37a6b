import math

import mpmath
import pytest
from fractions import Fraction
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from dhlpotts.numeric import INFINITY, DomainError, context
from dhlpotts.rgdyn import (
    ClassifierOptions,
    Kind,
    apply_map,
    apply_map_y,
    classify_orbit,
    critical_points,
    fixed_points,
    iterate_map,
    map_derivative,
    sign_factorization,
    vc,
)

reals = st.floats(-50, 50, allow_nan=False)
nonzero_q = reals.filter(lambda q: abs(q) > 1e-3)


def close(a, b, rel=1e-12):
    return abs(complex(a) - complex(b)) <= rel * max(1.0, abs(complex(b)))


# ---- apply_map ----

def test_zero_is_fixed():
    for q in (1, -3, 2.5, 1 + 2j):
        assert apply_map(q, 0) == 0


def test_map_examples():
    assert apply_map(1, -1) == -1
    assert close(apply_map(3, -1), 3)
    assert close(apply_map(0.5, -1 + math.sqrt(0.5)), -1)


def test_pole_and_infinity():
    assert apply_map(2, -1) is INFINITY
    assert apply_map(2, INFINITY) is INFINITY
    assert iterate_map(2, -1, 3) is INFINITY


def test_q_zero_and_nan_rejected():
    with pytest.raises(DomainError):
        apply_map(0, 1)
    with pytest.raises((DomainError, ValueError)):
        apply_map(1, float("nan"))


def test_map_y_examples():
    assert apply_map_y(2.7, 1) == 1
    assert close(apply_map_y(3, 0), 4)
    assert close(apply_map_y(2, 2), 25 / 16)
    assert close(apply_map_y(2, 2), apply_map(2, 1) + 1)


@settings(max_examples=300)
@given(nonzero_q, reals, reals, reals)
def test_conjugacy(qr, qi, vr, vi):
    q, v = complex(qr, qi / 10), complex(vr, vi)
    assume(abs(q + 2 * v) > 1e-3)
    assert close(apply_map_y(q, v + 1), apply_map(q, v) + 1)


# ---- derivative and critical points ----

def test_derivative_examples():
    assert map_derivative(4, 0) == 0
    assert map_derivative(3, 3) > 1
    ctx = context(113)
    h = ctx.mpf("1e-8")
    fd = (apply_map(2, 1 + h, 113) - apply_map(2, 1 - h, 113)) / (2 * h)
    d = map_derivative(2, 1, 113)
    assert abs(fd - d) <= 1e-6 * abs(d)


def test_derivative_pole():
    with pytest.raises(DomainError):
        map_derivative(2, -1)


@settings(max_examples=100)
@given(nonzero_q, reals)
def test_derivative_matches_difference(q, v):
    assume(abs(q + 2 * v) > 0.1)
    ctx = context(113)
    h = ctx.mpf("1e-12")
    fd = (apply_map(q, ctx.mpf(v) + h, 113) - apply_map(q, ctx.mpf(v) - h, 113)) / (2 * h)
    d = map_derivative(q, v, 113)
    assert abs(fd - d) <= 1e-6 * max(1, abs(d))


def test_critical_points():
    assert [complex(c) for c in critical_points(1)] == [0, -1, -1, -1]
    got = [complex(c) for c in critical_points(0.75)]
    assert got == pytest.approx([0, -0.75, -0.5, -1.5])
    for c in critical_points(0.75)[1:]:
        if abs(0.75 + 2 * c) > 0:
            assert abs(map_derivative(0.75, c)) < 1e-12


@given(nonzero_q)
def test_critical_values_hit_minus_one(q):
    for c in critical_points(q)[2:]:
        assume(abs(q + 2 * c) > 1e-6)
        assert close(apply_map(q, c), -1, 1e-9)


# ---- sign factorization ----

def test_sign_factorization():
    f1, f2 = sign_factorization(2, -1)
    assert f1 is INFINITY and f2 == 1
    _, f2 = sign_factorization(1, -1)
    assert f2 == -1
    assert sign_factorization(5, 0) == (0, 10)


@given(nonzero_q, reals)
def test_sign_factorization_product(q, v):
    assume(abs(q + 2 * v) > 1e-3)
    f1, f2 = sign_factorization(q, v)
    assert f1 >= 0
    assert close(f1 * f2, apply_map(q, v), 1e-12)


# ---- fixed points ----

def test_fixed_points_q1():
    fp = fixed_points(1)
    got = sorted(float(x) for x in (fp.v_c, fp.v_minus, fp.v_plus))
    assert got == pytest.approx([-1, (1 - math.sqrt(5)) / 2, (1 + math.sqrt(5)) / 2], abs=1e-14)
    assert fp.v_minus < fp.v_plus < 0 < fp.v_c


def test_fixed_points_double_root():
    ctx = context(113)
    fp = fixed_points(Fraction(32, 27), 113)
    assert abs(fp.v_c - ctx.mpf(16) / 9) < 1e-30
    assert abs(fp.v_minus + ctx.mpf(8) / 9) < 1e-12
    assert abs(fp.v_plus + ctx.mpf(8) / 9) < 1e-12
    assert fp.discriminant == 0


def test_fixed_points_complex_pair():
    fp = fixed_points(3)
    assert close(fp.v_c, 3)
    assert close(fp.v_plus, complex(-1.5, math.sqrt(3) / 2))
    assert close(fp.v_minus, complex(-1.5, -math.sqrt(3) / 2))
    assert close(fixed_points(16).v_c, 8)


def test_fixed_points_q0_rejected():
    with pytest.raises(DomainError):
        fixed_points(0)


@settings(max_examples=300)
@given(nonzero_q)
def test_fixed_point_residuals(q):
    fp = fixed_points(q)
    for f in fp.finite:
        assert abs(apply_map(q, f) - f) <= 1e-10 * (1 + abs(f)) ** 2
    assert fp.discriminant == -(mpmath.mpf(q) ** 3) * (27 * mpmath.mpf(q) - 32)


@settings(max_examples=300)
@given(nonzero_q)
def test_discriminant_casework(q):
    fp = fixed_points(q)
    roots = [fp.v_c, fp.v_minus, fp.v_plus]
    n_real = sum(1 for r in roots if mpmath.im(r) == 0)
    assert n_real == (3 if fp.discriminant > 0 else 1)
    if 0 < q < 32 / 27:
        assert fp.v_minus < fp.v_plus < 0 < fp.v_c


@settings(max_examples=1000)
@given(st.floats(-10, 10).filter(lambda q: abs(q) > 1e-9))
def test_vc_is_repelling(q):
    assert map_derivative(q, fixed_points(q).v_c) > 1


def test_vc_table_values():
    # a few entries cross-checked against the defining cubic by numerical root finding
    for q in (2, 5, 10, 100):
        ref = max(mpmath.polyroots([-1, 0, 2 * q, q * q]), key=lambda r: mpmath.re(r))
        assert close(vc(q), mpmath.re(ref), 1e-13)


# ---- interval invariance ----

@settings(max_examples=500)
@given(nonzero_q, st.floats(-1, 100))
def test_minus_one_to_infinity_invariant(q, v):
    assume(abs(q + 2 * v) > 1e-6)
    f = apply_map(q, v)
    assert f >= -1 - 1e-12
    y = v + 1
    square = ((q + y * y - 1) / (q + 2 * y - 2)) ** 2
    assert close(f + 1, square, 1e-12)


# ---- orbit classification ----

def test_classify_examples():
    assert classify_orbit(5, 1).kind is Kind.TO_ZERO
    assert classify_orbit(5, 5).kind is Kind.TO_INFINITY
    res = classify_orbit(0.5, -1)
    assert res.kind is Kind.CYCLE and res.period == 1
    assert close(res.representative, fixed_points(0.5).v_minus, 1e-8)
    assert classify_orbit(-2, -0.5).kind is Kind.TO_ZERO


def test_classify_exact_pole_escapes():
    assert classify_orbit(2, -1).kind is Kind.TO_INFINITY


def test_cycle_representative_is_periodic():
    opts = ClassifierOptions()
    for q, v0 in [(0.5, -1), (1.3, -1), (1.2 + 0.05j, -1)]:
        res = classify_orbit(q, v0, opts)
        if res.kind is Kind.CYCLE:
            back = iterate_map(q, res.representative, res.period)
            assert abs(back - res.representative) <= 10 * opts.cycle_tol


def test_undecided_when_budget_is_tiny():
    res = classify_orbit(0.5, -1, ClassifierOptions(max_iter=1))
    assert res.kind is Kind.UNDECIDED


def test_high_precision_path_agrees():
    mp = ClassifierOptions(prec=113)
    for q, v0 in [(5, 1), (5, 5), (0.5, -1), (-2, -0.5)]:
        assert classify_orbit(q, v0, mp).kind is classify_orbit(q, v0).kind


@settings(max_examples=200)
@given(st.floats(-20, -0.01), st.floats(-1, -1e-3))
def test_afm_orbit_increases_to_zero(q, v0):
    v = mpmath.mpf(v0)
    for _ in range(30):
        nxt = apply_map(q, v)
        assert v < nxt <= 0 or (nxt == 0 == v)
        v = nxt
        if v == 0 or v > -1e-200:
            break
    assert classify_orbit(q, v0).kind is Kind.TO_ZERO


def test_fm_dichotomy_lattice():
    qs = [0.25 + 0.5 * i for i in range(40)]
    vs = [0.05 + 0.25 * j for j in range(40)]
    for q in qs:
        c = float(vc(q))
        for v0 in vs:
            if abs(v0 - c) < 1e-6:
                continue
            expect = Kind.TO_ZERO if v0 < c else Kind.TO_INFINITY
            assert classify_orbit(q, v0).kind is expect, (q, v0)
