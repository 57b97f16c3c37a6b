from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dhlpotts.numeric import DivisibilityError
from dhlpotts.poly import BivarPoly, UnivarPoly, kronecker_mul

big_ints = st.integers(-(10**40), 10**40)
fracs = st.fractions(max_denominator=50).filter(lambda f: abs(f) < 100)


def schoolbook(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


@settings(max_examples=200)
@given(st.lists(big_ints, min_size=1, max_size=40), st.lists(big_ints, min_size=1, max_size=40))
def test_kronecker_matches_schoolbook(a, b):
    assert kronecker_mul(a, b) == schoolbook(a, b)


def test_kronecker_all_negative_and_zeros():
    a = [-(2**70), 0, 0, -1] * 5
    b = [0, 3, -(2**65), 0] * 4
    assert kronecker_mul(a, b) == schoolbook(a, b)


def bivar(draw_terms):
    return BivarPoly({k: v for k, v in draw_terms.items()})


bivars = st.dictionaries(
    st.tuples(st.integers(0, 6), st.integers(0, 6)), st.fractions(max_denominator=9), max_size=12
).map(bivar)


@settings(max_examples=100)
@given(bivars, bivars, fracs, fracs)
def test_bivar_ring_laws_by_evaluation(a, b, x, y):
    assert (a * b).evaluate(x, y) == a.evaluate(x, y) * b.evaluate(x, y)
    assert (a + b).evaluate(x, y) == a.evaluate(x, y) + b.evaluate(x, y)
    assert (a - b).evaluate(x, y) == a.evaluate(x, y) - b.evaluate(x, y)


@settings(max_examples=100)
@given(bivars)
def test_bivar_json_round_trip(a):
    assert BivarPoly.from_json(a.to_json()) == a


def test_no_zero_terms_stored():
    q, v = BivarPoly.var(0), BivarPoly.var(1)
    p = (q + v) - v
    assert p.terms == {(1, 0): 1}
    assert not (q - q)


def test_json_canonical_form():
    q, v = BivarPoly.var(0), BivarPoly.var(1)
    p = q * q + q * v * Fraction(3, 2)
    assert p.to_json() == '{"var_order":["q","v"],"terms":[[1,1,"3/2"],[2,0,"1/1"]]}'


def test_specialize_and_degrees():
    q, v = BivarPoly.var(0), BivarPoly.var(1)
    p = (q + v) ** 3
    assert p.deg_q == 3 and p.deg_v == 3
    assert p.specialize(1, -1) == UnivarPoly([-1, 3, -3, 1])
    assert p.specialize(0, 2) == UnivarPoly([8, 12, 6, 1], "v")


def test_shift_q():
    q, v = BivarPoly.var(0), BivarPoly.var(1)
    assert (q * (q + v)).shift_q(1) == q + v
    with pytest.raises(DivisibilityError):
        (q + v).shift_q(1)


def test_evaluate_non_rational_inputs():
    q, v = BivarPoly.var(0), BivarPoly.var(1)
    p = q * q + q * v
    assert p.evaluate(1.5, 2.0) == pytest.approx(5.25)
    assert p.evaluate(1j, 1) == pytest.approx(-1 + 1j)


@settings(max_examples=100)
@given(st.lists(fracs, min_size=1, max_size=8), fracs)
def test_from_roots_vanishes(roots, x):
    p = UnivarPoly.from_roots(roots)
    assert p.degree == len(roots)
    for r in roots:
        assert p(r) == 0
        p.divide_linear(r)
    expect = Fraction(1)
    for r in roots:
        expect *= x - r
    assert p(x) == expect


def test_univar_basics():
    p = UnivarPoly([0, 0, 3, 1])
    assert p.multiplicity_at_zero() == 2
    assert p.shift_var(2) == UnivarPoly([3, 1])
    assert p.derivative() == UnivarPoly([0, 6, 3])
    with pytest.raises(DivisibilityError):
        p.shift_var(3)
    with pytest.raises(DivisibilityError):
        UnivarPoly([1, 1]).divide_linear(1)
    assert UnivarPoly.from_json(p.to_json()) == p
