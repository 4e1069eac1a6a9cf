import math

import mpmath
import numpy as np
import pytest

from fractions import Fraction
from scipy import special

from BIZ.branches import eval_fk, eval_fk_derivative, sample_fk, branch_domain, branch, \
                         branch_summary, check_decreasing_bound
from BIZ.ZeroTable import nth_zero
from BIZ.util import DomainError, PoleError, SamplingError, to_mpf


@pytest.mark.parametrize("k", [-0.5, 0, 2, 7.5])
@pytest.mark.parametrize("r", [0.4, 3.0, 11.3, 27.0])
def test_fk_matches_scipy(k, r):
    ref = r * special.jv(k, r) / special.jv(k + 1, r)
    res = eval_fk(k, r)
    assert not res.pole
    assert abs(res.value - ref) <= 1e-9 * max(1.0, abs(ref))


@pytest.mark.parametrize("k", [0, 2])
def test_fk_vanishes_at_zeros_of_jk(k):
    for n in (1, 2, 3):
        assert abs(eval_fk(k, nth_zero(k, n)).value) <= 1e-12


def test_fk_pole_at_zero_of_next_order():
    res = eval_fk(0, special.jn_zeros(1, 1)[0])
    assert res.pole
    assert math.isnan(res.value)
    with pytest.raises(PoleError):
        eval_fk_derivative(0, special.jn_zeros(1, 1)[0])


@pytest.mark.parametrize("k", [-0.5, 0, 2])
def test_first_branch_stays_below_limit(k):
    hi = nth_zero(k + 1, 1)
    rs = np.linspace(0.05, hi - 1e-3, 50)
    vals = sample_fk(k, rs)
    assert np.all(vals < 2 * (k + 1))
    assert np.all(np.diff(vals) < 0)


def test_fk_near_origin():
    ## 2(k+1) - r^2/(2(k+2)) to leading order
    assert abs(eval_fk(2, 1e-3).value - (6 - 1e-6 / 8)) < 1e-12


def test_branch_domains():
    assert branch_domain(2, 1) == (0.0, nth_zero(3, 1))
    assert branch_domain(2, 2) == (nth_zero(3, 1), nth_zero(3, 2))
    br = branch(2, 2)
    assert br.domain[0] < br.root < br.domain[1]
    assert br.root == nth_zero(2, 2)
    assert br.limit_at_zero is None
    assert branch(2, 1).limit_at_zero == 6.0


def test_branch_summary():
    df = branch_summary(0, 4)
    assert list(df["n"]) == [1, 2, 3, 4]
    assert df["left_limit"].iloc[0] == 2.0
    assert np.isinf(df["left_limit"].iloc[1:]).all()
    assert (df["domain_lo"] < df["root"]).all() and (df["root"] < df["domain_hi"]).all()


@pytest.mark.parametrize("k", [-0.5, 0, 2, 10])
def test_decreasing_bound_first_two_branches(k):
    first = (0.05, nth_zero(k + 1, 1) - 1e-3)
    second = (nth_zero(k + 1, 1) + 1e-3, nth_zero(k + 1, 2) - 1e-3)
    for interval in (first, second):
        report = check_decreasing_bound(k, interval, 200)
        assert report.passed
        assert report.max_margin < 0
        assert report.max_fd_rel_error < 1e-6
        assert len(report.data) == 200


@pytest.mark.slow
@pytest.mark.parametrize("k", [-0.5, 0, 2, 10])
def test_decreasing_bound_dense(k):
    report = check_decreasing_bound(k, (0.05, nth_zero(k + 1, 1) - 1e-3), 10000)
    assert report.passed
    assert report.max_fd_rel_error < 1e-6


def test_decreasing_bound_rejects_pole():
    with pytest.raises(SamplingError):
        check_decreasing_bound(0, (1.0, 5.0), 10)
    with pytest.raises(DomainError):
        check_decreasing_bound(0, (3.0, 1.0), 10)


@pytest.mark.parametrize("k", [-0.5, 0, 2, 10])
def test_limit_at_origin(k):
    assert abs(eval_fk(k, 1e-8).value - 2 * (k + 1)) <= 1e-6


@pytest.mark.parametrize("k", [0, 2])
def test_sign_of_approach(k):
    for n in (1, 2, 3):
        pole = nth_zero(k + 1, n)
        assert eval_fk(k, pole - 1e-4).value < -1e3
        assert eval_fk(k, pole + 1e-4).value > 1e3


def test_one_root_per_branch():
    for n in range(1, 5):
        lo, hi = branch_domain(2, n)
        rs = np.linspace(lo + 1e-3, hi - 1e-3, 400)
        vals = sample_fk(2, rs)
        assert np.sum(np.diff(np.sign(vals)) != 0) == 1
        assert abs(eval_fk(2, nth_zero(2, n)).value) <= 1e-8


@pytest.mark.parametrize("k,interval", [(2, (0.5, 6.0)), (0, (0.5, 3.5))])
def test_documented_decreasing_bound(k, interval):
    report = check_decreasing_bound(k, interval, 500)
    assert report.passed
    assert report.max_fd_rel_error < 1e-6


def test_documented_domains():
    assert abs(branch_domain(2, 1)[1] - 6.3802) < 1e-4
    assert abs(branch_domain(2, 2)[1] - 9.7610) < 1e-4
    assert abs(branch_domain(0, 1)[1] - 3.8317) < 1e-4
    assert eval_fk(2, nth_zero(3, 1)).pole


@pytest.mark.parametrize("k", [0, Fraction(1, 2), 2])
def test_fk_working_precision(k):
    for r in (0.15, 3.0, 11.3):
        res = eval_fk(k, r, dps=40)
        assert isinstance(res.value, mpmath.mpf)
        assert not res.pole
        with mpmath.workdps(40):
            kk = to_mpf(k)
            ref = r * mpmath.besselj(kk, r) / mpmath.besselj(kk + 1, r)
            assert abs(res.value - ref) <= mpmath.mpf(10)**-35 * abs(ref)
        assert abs(float(res.value) - eval_fk(k, r).value) <= 1e-10 * abs(float(res.value))


@pytest.mark.parametrize("gap", [1e-3, 1.5e-3, 2e-3])
def test_decreasing_bound_near_next_pole(gap):
    ## the finite difference stencil must stay clear of the pole just above hi
    report = check_decreasing_bound(0, (0.5, nth_zero(1, 1) - gap), 50)
    assert np.all(np.isfinite(report.data["finite_difference"]))
    assert report.max_fd_rel_error < 1e-6
    assert report.passed
