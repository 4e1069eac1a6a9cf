import math

import numpy as np
import pytest

from fractions import Fraction
from hypothesis import assume, given, settings, strategies as st

from BIZ.RationalCurve import g_curve, poles_and_roots, region_bounds, intersect_with_fk, \
                              intersections_in_region, intersections_up_to, sample_curves, \
                              check_curve_ordering
from BIZ.ZeroTable import nth_zero, zeros_up_to
from BIZ.util import DomainError, PoleError

orders = st.fractions(min_value=Fraction(-9, 10), max_value=10, max_denominator=40)
radii = st.fractions(min_value=Fraction(1, 10), max_value=30, max_denominator=40)


def printed_g(m, k, r):
    """ G_{k,m}(r) for m = 2..7, written out by hand; None at a pole. """
    s = r * r
    c = 2 * (k + 1)
    if m == 2:
        return c
    if m == 3:
        num, den = s, 2 * (k + 2)
    elif m == 4:
        num, den = 2 * (k + 3) * s, 4 * (k + 2) * (k + 3) - s
    elif m == 5:
        num = (4 * (k + 3) * (k + 4) - s) * s
        den = 4 * (k + 3) * (2 * (k + 2) * (k + 4) - s)
    elif m == 6:
        num = 4 * (k + 4) * (2 * (k + 3) * (k + 5) - s) * s
        den = 16 * (k + 5) * (k + 4) * (k + 3) * (k + 2) - 12 * (k + 3) * (k + 4) * s + s * s
    else:
        num = (16 * (k + 6) * (k + 5) * (k + 4) * (k + 3) - 12 * (k + 5) * (k + 4) * s
               + s * s) * s
        den = 2 * (k + 4) * (16 * (k + 6) * (k + 5) * (k + 3) * (k + 2)
                             - 16 * (k + 5) * (k + 3) * s + 3 * s * s)
    if den == 0:
        return None
    return c - num / den


@given(k=orders, r=radii)
@settings(max_examples=50, deadline=None)
def test_closed_forms(k, r):
    for m in range(2, 8):
        expected = printed_g(m, k, r)
        assume(expected is not None)
        assert g_curve(k, m).evaluate_exact(r) == expected


def test_g3_at_k_two():
    curve = g_curve(2, 3)
    assert curve.expression() == "6 - r^2/8"
    assert curve.root_forms == ["4*sqrt(3)"]
    assert abs(curve.roots[0] - 4 * math.sqrt(3)) < 1e-12
    assert curve.poles == []
    assert curve.infinity_behavior == "diverges"
    assert curve.infinity_sign == -1


def test_g4_at_k_two():
    curve = g_curve(2, 4)
    poles, roots = poles_and_roots(curve)
    assert abs(poles[0] - 4 * math.sqrt(5)) < 1e-12
    assert abs(roots[0] - math.sqrt(30)) < 1e-12
    assert curve.pole_forms == ["4*sqrt(5)"]
    assert curve.root_forms == ["sqrt(30)"]
    assert curve.expression() == "6 - 10*r^2/(80 - r^2)"
    assert curve.infinity_behavior == "constant"
    assert curve.constant == Fraction(16)
    with pytest.raises(PoleError):
        curve.evaluate_s(80)
    assert math.isnan(curve.evaluate(4 * math.sqrt(5)))


def test_g2_is_constant():
    curve = g_curve(0, 2)
    assert curve.expression() == "2"
    assert curve.poles == [] and curve.roots == []
    assert curve.constant == Fraction(2)
    desc = curve.describe()
    assert desc["constant"] == "2"
    assert desc["poles"] == []


def test_float_order_is_taken_exactly():
    assert g_curve(0.5, 4).k == Fraction(1, 2)


@pytest.mark.parametrize("m", [1, 0])
def test_bad_index(m):
    with pytest.raises(DomainError):
        g_curve(2, m)


@pytest.mark.parametrize("k", [Fraction(1, 2), 2])
def test_parity_rule(k):
    for m in range(2, 16):
        curve = g_curve(k, m)
        ell = m - 1
        assert curve.asymptote_count <= (ell - 1) // 2
        if ell % 2 == 0:
            assert curve.infinity_behavior == "diverges"
            assert abs(curve.evaluate(1e4)) > 10 * abs(curve.evaluate(1e3))
        else:
            assert curve.infinity_behavior == "constant"
            c = float(curve.constant)
            assert abs(curve.evaluate(1e4) - c) <= 1e-3 * max(1.0, abs(c))


@pytest.mark.parametrize("k", [Fraction(-1, 2), 0, Fraction(7, 3), 5])
def test_thresholds_are_roots_and_poles(k):
    assert abs(g_curve(k, 3).roots[0] - 2 * math.sqrt((k + 1) * (k + 2))) < 1e-12
    assert abs(g_curve(k, 4).roots[0] - math.sqrt(2 * (k + 1) * (k + 3))) < 1e-12
    assert abs(g_curve(k, 4).poles[0] - 2 * math.sqrt((k + 2) * (k + 3))) < 1e-12


def test_region_bounds():
    assert region_bounds(2, 0) == (0.0, nth_zero(3, 1))
    assert region_bounds(2, 1) == (nth_zero(3, 1), nth_zero(3, 2))


@pytest.mark.parametrize("m,n,order,index", [(2, 1, 4, 1), (3, 1, 5, 1),
                                             (4, 2, 6, 1), (3, 2, 5, 2)])
def test_intersections_at_k_two(m, n, order, index):
    hit = intersect_with_fk(2, g_curve(2, m), n)
    assert hit is not None
    assert abs(hit.r_star - nth_zero(order, index)) <= 1e-6
    assert hit.predicted_zero_identity == (Fraction(order), index)
    assert hit.region == n and hit.branch_index == n + 1
    assert hit.residual <= 1e-6


def test_no_intersection_when_pole_in_region():
    ## r_3 = 4 sqrt(5) lies in (j_{3,1}, j_{3,2})
    assert intersect_with_fk(2, g_curve(2, 4), 1) is None


def test_first_region_is_empty():
    assert intersections_in_region(2, g_curve(2, 3), 0) == []


def check_converse(k, m, n_regions):
    r_max = nth_zero(float(k) + 1, n_regions + 1)
    hits = intersections_up_to(k, m, r_max)
    expected = zeros_up_to(float(k) + m, r_max)
    assert [h.predicted_zero_identity for h in hits] == \
        [(Fraction(k) + m, z.n) for z in expected]
    for hit, zero in zip(hits, expected):
        assert abs(hit.r_star - zero.value) <= 1e-6


@pytest.mark.parametrize("m", [2, 3, 4])
def test_intersections_are_zeros(m):
    check_converse(2, m, 4)


@pytest.mark.slow
@pytest.mark.parametrize("k", [0, Fraction(1, 2), 2, 5])
@pytest.mark.parametrize("m", [2, 3, 4, 5, 6, 7])
def test_intersections_are_zeros_dense(k, m):
    check_converse(k, m, 10)


def test_sample_curves_blank_at_poles():
    r = np.linspace(0.05, 12, 240)
    df = sample_curves(2, r)
    assert list(df.columns) == ["r", "F_k", "G_k_2", "G_k_3", "G_k_4"]
    half = 0.5 * (r[1] - r[0])
    fk_poles = zeros_up_to(3, 12).values
    blank = df.loc[df["F_k"].isna(), "r"]
    assert len(blank) >= len(fk_poles)
    for x in blank:
        assert min(abs(x - p) for p in fk_poles) < half
    g4_pole = g_curve(2, 4).poles[0]
    assert df.loc[(df["r"] - g4_pole).abs() < half, "G_k_4"].isna().all()
    assert not df["G_k_3"].isna().any()


def test_sample_curves_bad_grid():
    with pytest.raises(DomainError):
        sample_curves(2, [1.0, 0.5, 2.0])


@pytest.mark.parametrize("k", [Fraction(-1, 2), 0, 2, 5])
def test_curve_ordering(k):
    df, holds = check_curve_ordering(k, 50)
    assert holds
    assert set(df["regime"]) == {"below_r_hat", "r_hat_to_r_k", "r_k_to_r_k1", "above_r_k1"}
