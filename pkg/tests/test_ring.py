from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hfsurg.ring import (
    NEG_INF,
    POS_INF,
    BiPolynomial,
    ExtendedInt,
    RingError,
    TruncatedSeries,
    bipoly_expand_u2,
    bipoly_from_u2_expansion,
    extended,
    series_inverse,
    series_is_unit,
    series_mul,
    series_valuation,
)

N = 8


def s(*exps: int, n: int = N) -> TruncatedSeries:
    return TruncatedSeries.from_exponents(exps, n)


def test_square_of_one_plus_u():
    assert series_mul(s(0, 1), s(0, 1)) == s(0, 2)


def test_top_power_times_u_vanishes():
    assert series_mul(s(N - 1), s(1)) == TruncatedSeries.zero(N)


def test_geometric_series_inverse():
    assert series_mul(s(0, 1), s(*range(N))) == TruncatedSeries.one(N)


def test_units_and_valuations():
    assert series_is_unit(s(0, 3)) and series_valuation(s(0, 3)) == 0
    assert not series_is_unit(s(2)) and series_valuation(s(2)) == 2
    zero = TruncatedSeries.zero(N)
    assert not series_is_unit(zero) and series_valuation(zero) == N


def test_mismatched_orders_rejected():
    with pytest.raises(RingError):
        series_mul(s(0, n=4), s(0, n=5))


def test_inverse_of_non_unit_rejected():
    with pytest.raises(RingError):
        series_inverse(s(1))


def test_expand_u2_examples():
    u1u2 = BiPolynomial(frozenset({(1, 1)}), 4)
    assert bipoly_expand_u2(u1u2) == [s(n=4), s(1, n=4), s(n=4), s(n=4)]
    u1_plus_u2 = BiPolynomial(frozenset({(1, 0), (0, 1)}), 4)
    assert bipoly_expand_u2(u1_plus_u2)[:2] == [s(1, n=4), s(0, n=4)]
    assert all(not x for x in bipoly_expand_u2(BiPolynomial(frozenset(), 4)))


def test_bipoly_rejects_out_of_range_terms():
    with pytest.raises(RingError):
        BiPolynomial(frozenset({(4, 0)}), 4)


def test_extended_arithmetic():
    assert POS_INF + 3 == POS_INF
    assert NEG_INF - 3 == NEG_INF
    assert ExtendedInt(2) - 5 == ExtendedInt(-3)
    assert 0 * POS_INF == POS_INF
    assert -1 * POS_INF == NEG_INF
    assert NEG_INF < ExtendedInt(-100) < ExtendedInt(100) < POS_INF
    with pytest.raises(RingError):
        POS_INF + NEG_INF
    with pytest.raises(RingError):
        int(NEG_INF)


def test_extended_tokens():
    assert extended("inf") == POS_INF
    assert extended("+inf") == POS_INF
    assert extended("-inf") == NEG_INF
    assert extended("1/2") == ExtendedInt(Fraction(1, 2))
    assert ExtendedInt(Fraction(4, 2)).value == 2


series = st.integers(min_value=0, max_value=(1 << N) - 1).map(lambda c: TruncatedSeries(c, N))


@given(series, series, series)
def test_ring_axioms(a, b, c):
    assert series_mul(series_mul(a, b), c) == series_mul(a, series_mul(b, c))
    assert series_mul(a, b + c) == series_mul(a, b) + series_mul(a, c)
    assert series_mul(a, b) == series_mul(b, a)


@given(series, series)
def test_zero_product_needs_large_valuations(a, b):
    if not series_mul(a, b):
        assert series_valuation(a) + series_valuation(b) >= N


@given(series)
def test_units_are_invertible(a):
    if series_is_unit(a):
        assert series_mul(a, series_inverse(a)) == TruncatedSeries.one(N)


terms = st.frozensets(st.tuples(st.integers(0, 5), st.integers(0, 5)), max_size=10)


@given(terms, terms, terms)
def test_bipoly_axioms(x, y, z):
    a, b, c = (BiPolynomial(t, 6) for t in (x, y, z))
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert bipoly_from_u2_expansion(bipoly_expand_u2(a)) == a
