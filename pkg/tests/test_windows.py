"""Exact window polynomials, root isolation and the certified bounds."""

import io
import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from appendix_data import Q_DEVELOPED, Q_FACTORED, WINDOW_BOUNDS
from btob.windows import (
    PrecisionBudget,
    RationalPoly,
    _count_roots,
    _round_fraction,
    lower_bound,
    q_poly,
    trace_poly,
    upper_bound,
    window_table,
    windows_csv,
)

rationals = st.fractions(
    min_value=Fraction(-50), max_value=Fraction(50), max_denominator=64
)
small_polys = st.lists(rationals, min_size=0, max_size=6).map(RationalPoly)


@given(small_polys, small_polys, rationals)
def test_poly_ring_axioms_under_evaluation(p, q, x):
    assert (p + q)(x) == p(x) + q(x)
    assert (p * q)(x) == p(x) * q(x)
    assert (p - q)(x) == p(x) - q(x)


@given(small_polys, small_polys)
def test_poly_divmod_reconstructs(p, q):
    if not q:
        return
    quo, rem = divmod(p, q)
    assert quo * q + rem == p
    assert rem.degree() < q.degree() or not rem


def test_poly_reversal_is_coefficient_flip():
    p = RationalPoly([1, 2, 3])
    assert p.reversed().coeffs == (3, 2, 1)
    assert p.reversed(4).coeffs == (0, 0, 3, 2, 1)
    with pytest.raises(ValueError):
        p.reversed(1)


def test_trace_poly_degree_and_rational_values():
    for n in range(1, 11):
        assert trace_poly(n).degree() == 2 * n
    # P_1 = (r-1)^2 / 4, finite rational at r = 1
    assert trace_poly(1)(Fraction(1)) == 0
    assert isinstance(q_poly(3)(Fraction(1)), Fraction)


def test_q_poly_matches_reference_coefficients_exactly():
    for n in range(1, 11):
        assert list(q_poly(n).coeffs) == Q_DEVELOPED[n]


def test_q_poly_coefficients_are_palindromic():
    for n in range(1, 11):
        cs = q_poly(n).coeffs
        assert cs == cs[::-1]


def test_q_poly_factor_checks():
    for n in range(1, 11):
        square, cofactor, prefactor = Q_FACTORED[n]
        if square == "r+1":
            factor = RationalPoly([1, 2, 1])
        else:  # (r^2 - 1)^2
            factor = RationalPoly([1, 0, -2, 0, 1])
        quo, rem = divmod(q_poly(n), factor)
        assert not rem
        want = RationalPoly([Fraction(c, prefactor) for c in cofactor])
        assert quo == want


def test_q1_root_in_unit_interval_is_the_kink_value():
    # Q_1 = (1/16)(r+1)^2 (r^2 - 6r + 1): single root 3 - 2*sqrt(2) in (0, 1)
    quo, rem = divmod(q_poly(1), RationalPoly([1, 2, 1]))
    assert not rem and quo == RationalPoly([Fraction(1, 16), Fraction(-6, 16), Fraction(1, 16)])
    root = 3 - 2 * math.sqrt(2)
    assert abs(q_poly(1)(Fraction(root).limit_denominator(10**12))) < 1e-10


def test_count_roots_is_exact_on_known_polynomials():
    poly = [1, -7, 12]  # 12x^2 - 7x + 1 (index = degree): roots 1/4 and 1/3
    assert _count_roots(poly, Fraction(0), Fraction(1)) == 2
    assert _count_roots(poly, Fraction(5, 16), Fraction(1)) == 1
    assert _count_roots(poly, Fraction(1, 2), Fraction(1)) == 0


def test_round_fraction_half_even():
    assert _round_fraction(Fraction(1, 8), 2) == "0.12"
    assert _round_fraction(Fraction(3, 8), 2) == "0.38"
    assert _round_fraction(Fraction(25, 1000), 2) == "0.02"
    assert _round_fraction(Fraction(35, 1000), 2) == "0.04"
    assert _round_fraction(Fraction(-1, 8), 2) == "-0.12"
    assert _round_fraction(Fraction(123456, 100000), 3) == "1.235"


def test_lower_bounds_small_n():
    assert lower_bound(1) == WINDOW_BOUNDS[1][0]
    assert lower_bound(2) == WINDOW_BOUNDS[2][0]
    assert lower_bound(3) == WINDOW_BOUNDS[3][0]


def test_upper_bounds_small_n():
    assert upper_bound(1) == "not defined"
    assert upper_bound(2) == WINDOW_BOUNDS[2][1]  # = 3 - 2*sqrt(2)
    assert upper_bound(3) == WINDOW_BOUNDS[3][1]  # = 5 - 2*sqrt(6)
    assert float(upper_bound(2)) == pytest.approx(3 - 2 * math.sqrt(2), abs=5e-13)
    assert float(upper_bound(3)) == pytest.approx(5 - 2 * math.sqrt(6), abs=5e-13)


def test_bounds_lie_inside_the_accumulation_interval():
    base = 7 - 4 * math.sqrt(3)
    top = 3 - 2 * math.sqrt(2)
    for n in range(1, 13):
        low = float(lower_bound(n))
        assert base < low <= top + 5e-13


def test_window_table_monotone_and_csv_roundtrip():
    rows = window_table(6)
    assert [w.n for w in rows] == list(range(1, 7))
    lows = [float(w.lower) for w in rows]
    assert all(a > b for a, b in zip(lows, lows[1:]))
    for w in rows[1:]:
        assert float(w.lower) < float(w.upper)
    buf = io.StringIO()
    windows_csv(rows, buf)
    lines = buf.getvalue().strip().split("\n")
    assert lines[0] == "n,lower,upper"
    assert lines[1] == f"1,{rows[0].lower},not defined"
    assert len(lines) == 7


def test_precision_budget_validation():
    with pytest.raises(ValueError):
        PrecisionBudget(working=15, target=12)
    b = PrecisionBudget(working=40, target=20)
    assert upper_bound(2, b) == "0.17157287525380990240"


def test_higher_precision_lower_bound():
    b = PrecisionBudget(working=64, target=20)
    # 3 - 2*sqrt(2) to 20 decimals
    assert lower_bound(1, b) == "0.17157287525380990240"
