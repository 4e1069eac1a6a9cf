import json
import math

import pytest

from fractions import Fraction
from hypothesis import given, settings, strategies as st

from BIZ.interlacing import compute_thresholds, corrupted_thresholds, label_str, classify, \
                            interlaced_sequence, verify_theorem, default_k_grid
from BIZ.RationalCurve import g_curve, intersect_with_fk
from BIZ.ZeroTable import nth_zero
from BIZ.util import BoundaryError, DomainError

K2_ZEROS = {(0, 1): 5.1356, (1, 1): 6.3802, (2, 1): 7.5883, (0, 2): 8.4172,
            (3, 1): 8.7715, (1, 2): 9.7610, (4, 1): 9.9361, (2, 2): 11.0647,
            (0, 3): 11.6198, (3, 2): 12.3386}


def test_thresholds_at_k_two():
    th = compute_thresholds(2)
    assert th.exact_squares == (48, 30, 80)
    assert abs(th.r_k - 4 * math.sqrt(3)) < 1e-14
    assert abs(th.r_hat_k - math.sqrt(30)) < 1e-14
    assert abs(th.r_k_plus_1 - 4 * math.sqrt(5)) < 1e-14


@given(k=st.fractions(min_value=Fraction(-99, 100), max_value=100, max_denominator=100))
@settings(max_examples=50, deadline=None)
def test_thresholds_are_ordered(k):
    th = compute_thresholds(k)
    assert th.r_hat_k < th.r_k < th.r_k_plus_1


def test_float_thresholds():
    th = compute_thresholds(0.25)
    assert th.exact_squares is None
    assert abs(th.r_k - 2 * math.sqrt(1.25 * 2.25)) < 1e-14


def test_corrupted_thresholds():
    assert corrupted_thresholds(2).r_k == 1.5 * compute_thresholds(2).r_k


def test_label_str():
    assert label_str(2, (4, 1)) == "j_{6,1}"
    assert label_str(Fraction(1, 2), (1, 3)) == "j_{3/2,3}"


def test_reference_zeros_at_k_two():
    for (offset, n), value in K2_ZEROS.items():
        assert abs(nth_zero(2 + offset, n) - value) < 1e-4


def test_classify_k_two_first_cell():
    case = classify(2, 1)
    assert (case.case_234, case.case_5) == ("B", "IV")
    assert case.pole_in_branch
    assert case.predicted_ordering() == [(1, 1), (2, 1), (0, 2), (3, 1), (1, 2), (4, 1), (2, 2)]
    assert str(case) == "<BIZ.InterlacingCase k=2 n=1: B/IV (pole in branch)>"
    doc = case.to_dict()
    assert doc["predicted_ordering"][5] == "j_{6,1}"
    assert ["r_k", "j_{k,n+1}", ">"] in doc["deciding_comparisons"]


def test_k_two_ordering_matches_reference_zeros():
    labels = classify(2, 1).predicted_ordering()
    values = [K2_ZEROS[label] for label in labels[:-1]]
    assert values == sorted(values)


def test_classify_later_cells():
    for n in range(2, 6):
        case = classify(2, n)
        assert (case.case_234, case.case_5, case.pole_in_branch) == ("B", "IV", False)
    case = classify(0, 20)
    assert (case.case_234, case.case_5, case.pole_in_branch) == ("B", "IV", False)


def test_classify_case_two():
    ## r_hat_10 < j_{10,2} < r_10
    case = classify(10, 1)
    assert (case.case_234, case.case_5) == ("A", "II")
    assert case.predicted_ordering() == [(1, 1), (2, 1), (3, 1), (0, 2), (4, 1), (1, 2), (2, 2)]


def test_classify_too_close():
    with pytest.raises(BoundaryError):
        classify(2, 1, tol=5.0)


@pytest.mark.parametrize("k,n", [(-1, 1), (2, 0)])
def test_classify_bad_arguments(k, n):
    with pytest.raises(DomainError):
        classify(k, n)


def test_sequence_k_two():
    entries = interlaced_sequence(2, 4, nth_zero(5, 2))
    assert [e.label for e in entries] == [(0, 1), (1, 1), (2, 1), (0, 2), (3, 1), (1, 2),
                                          (4, 1), (2, 2), (0, 3), (3, 2)]
    assert not any(e.tie for e in entries)
    assert entries[6].order == 6


def test_sequence_alternates_for_two_orders():
    entries = interlaced_sequence(0, 1, 12.0)
    offsets = [e.label[0] for e in entries]
    assert [e.label for e in entries[:6]] == [(0, 1), (1, 1), (0, 2), (1, 2), (0, 3), (1, 3)]
    assert offsets == [i % 2 for i in range(len(offsets))]


def test_sequence_empty_below_first_zero():
    assert interlaced_sequence(2, 1, 5.0) == []


@pytest.mark.parametrize("ell_max", [0, 5, 2.0])
def test_sequence_bad_ell_max(ell_max):
    with pytest.raises(DomainError):
        interlaced_sequence(2, ell_max, 10.0)


def test_verify_k_two():
    report = verify_theorem([2], 8)
    assert report.all_agree
    assert report.agree_count == 8 and report.skipped_count == 0
    assert all(rec.contained for rec in report.records)
    ## j_{6,1} sits between j_{3,2} and j_{4,2}
    assert report.records[0].observed_k4_interval == ((1, 2), (2, 2))


def test_k_two_pattern_holds_beyond_first_cell():
    for n in range(1, 7):
        chain = [nth_zero(3, n + 1), nth_zero(6, n), nth_zero(4, n + 1),
                 nth_zero(2, n + 2), nth_zero(5, n + 1), nth_zero(3, n + 2)]
        assert chain == sorted(chain)


def test_verify_half_order():
    report = verify_theorem([Fraction(1, 2)], 3)
    assert report.all_agree


def test_corrupted_thresholds_are_caught():
    report = verify_theorem([2], 3, thresholds=corrupted_thresholds)
    assert not report.all_agree
    assert report.disagree_count > 0


def test_report_outputs():
    report = verify_theorem([0, 2], 2)
    df = report.summary()
    assert list(df.columns) == ["k", "cells", "agree", "disagree", "skipped"]
    assert list(df["k"]) == ["0", "2"]
    doc = json.loads(report.to_json())
    assert doc["counts"]["cells"] == 4
    assert doc["records"][2]["predicted"][0] == "j_{3,1}"


def test_default_grid():
    grid = default_k_grid()
    assert len(grid) == 50
    assert min(grid) > -0.9
    assert abs(max(grid) - 10.0) < 1e-12


@pytest.mark.slow
def test_full_sweep():
    report = verify_theorem(default_k_grid(), 15)
    assert report.all_agree
    assert report.skipped_count <= 7
    assert all(rec.contained for rec in report.records if not rec.skipped)


def _check_g4_exclusivity(k, n_max):
    """ pole_in_branch holds exactly when G_{k,4} misses F_k in the cell. """
    curve = g_curve(k, 4)
    checked = 0
    for n in range(1, n_max + 1):
        try:
            case = classify(k, n)
            hit = intersect_with_fk(k, curve, n)
        except BoundaryError:
            continue
        checked += 1
        assert case.pole_in_branch == (hit is None), (k, n)
        if hit is not None:
            assert abs(hit.r_star - nth_zero(float(k) + 4, n)) <= 1e-6
    return checked


@pytest.mark.parametrize("k", default_k_grid()[::7] + [Fraction(1, 2), 2])
def test_pole_in_branch_iff_no_g4_intersection(k):
    assert _check_g4_exclusivity(k, 6) >= 5


@pytest.mark.slow
def test_pole_in_branch_iff_no_g4_intersection_full_grid():
    for k in default_k_grid():
        _check_g4_exclusivity(k, 15)
