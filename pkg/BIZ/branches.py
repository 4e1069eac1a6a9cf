""" The ratio curve F_k(r) = r J_k(r)/J_{k+1}(r) and its branches. """

import logging
import math

import mpmath
import numpy as np
import pandas as pd

from collections import namedtuple

from .bessel import POLE_FACTOR, EvalResult, eval_j, eval_j_many, on_pole, _ratio_cf
from .ZeroTable import nth_zero, zeros_up_to
from .util import DomainError, PoleError, SamplingError, check_index, check_order, \
                  check_radius, to_mpf

LOGGER = logging.getLogger(__name__)

## Required clearance between a monotonicity interval and any pole of F_k
POLE_CLEARANCE = 1e-4

## Analytic and finite difference F_k' must agree to this relative error
FD_TOL = 1e-6

FkValue = namedtuple("FkValue", ["value", "pole"])
FkValue.__doc__ = """ F_k(r), or pole=True (and value nan) at a zero of J_{k+1}. """

Branch = namedtuple("Branch", ["n", "domain", "root", "limit_at_zero"])
Branch.__doc__ = """
The n-th branch phi_n of F_k: domain (j_{k+1,n-1}, j_{k+1,n}) with
j_{k+1,0} = 0, root j_{k,n}. limit_at_zero is 2(k+1) for n = 1 and None
otherwise.
"""

DecreasingReport = namedtuple("DecreasingReport", ["k", "interval", "samples",
                                                   "max_margin", "max_fd_rel_error",
                                                   "passed", "data"])


def eval_fk(k, r, dps=None):
    """
    F_k(r) = r J_k(r)/J_{k+1}(r), evaluated as 2(k+1) - r J_{k+2}(r)/J_{k+1}(r)
    with the ratio taken from its continued fraction. That form is smooth at
    the zeros of J_k, where F_k vanishes.

    With `dps` set, F_k is instead computed as r J_k/J_{k+1} with mpmath at
    that many decimal digits and the value is an mpf. Forms built on F_k,
    such as a_ell, cancel many digits near r = 0 and near the poles and need
    this path.

    :param int dps: Optional mpmath working precision.
    :return: FkValue
    """
    check_order(k)
    check_radius(r, positive=True)
    if dps is not None:
        return _eval_fk_mp(k, r, int(dps))
    kp1 = float(k) + 1.0
    if on_pole(kp1, r, eval_j(kp1, r)):
        return FkValue(float("nan"), True)
    return FkValue(2.0 * kp1 - float(r) * _ratio_cf(kp1, float(r)), False)


def _eval_fk_mp(k, r, dps):
    with mpmath.workdps(dps):
        kk, rr = to_mpf(k), to_mpf(r)
        jk1 = mpmath.besselj(kk + 1, rr)
        ## a zero of J_{k+1} to within the working precision
        if abs(jk1) <= POLE_FACTOR * mpmath.eps:
            return FkValue(mpmath.nan, True)
        ## the mpf keeps its working precision after the context exits
        return FkValue(rr * mpmath.besselj(kk, rr) / jk1, False)


def eval_fk_derivative(k, r):
    """
    F_k'(r) = r (J_k J_{k+2} - J_{k+1}^2) / J_{k+1}^2

    :raises PoleError: at a zero of J_{k+1}.
    """
    check_order(k)
    check_radius(r, positive=True)
    vals, errs = eval_j_many(k, r, 2)
    jk, jk1, jk2 = vals
    if on_pole(float(k) + 1.0, r, EvalResult(jk1, errs[1])):
        raise PoleError(FK_POLE.format(k, r))
    return float(r) * (jk * jk2 - jk1 * jk1) / (jk1 * jk1)


def sample_fk(k, r_values):
    """ F_k on an array of radii, nan at poles. """
    return np.array([eval_fk(k, r).value for r in r_values])


def branch_domain(k, n):
    """
    Domain (j_{k+1,n-1}, j_{k+1,n}) of the branch phi_n, with j_{k+1,0} = 0.

    :return: (lo, hi)
    """
    check_order(k)
    check_index(n)
    kp1 = float(k) + 1.0
    lo = 0.0 if n == 1 else nth_zero(kp1, n - 1)
    return (lo, nth_zero(kp1, n))


def branch(k, n):
    """ The Branch record for phi_n. """
    domain = branch_domain(k, n)
    root = nth_zero(k, n)
    limit = 2.0 * (float(k) + 1.0) if n == 1 else None
    return Branch(n, domain, root, limit)


def branch_summary(k, n_max):
    """
    One row per branch: its domain, root and the limits of F_k at the two
    ends of the domain (2(k+1) or +inf on the left, -inf on the right).

    :return: pandas.DataFrame
    """
    check_index(n_max, name="n_max")
    rows = []
    for n in range(1, n_max + 1):
        br = branch(k, n)
        left = br.limit_at_zero if n == 1 else math.inf
        rows.append((n, br.domain[0], br.domain[1], br.root, left, -math.inf))
    return pd.DataFrame(rows, columns=["n", "domain_lo", "domain_hi", "root",
                                       "left_limit", "right_limit"])


def _fd_derivative(k, r, h):
    """ Five point central difference of F_k. """
    f = lambda x: eval_fk(k, x).value
    return (-f(r + 2*h) + 8*f(r + h) - 8*f(r - h) + f(r - 2*h)) / (12.0 * h)


def check_decreasing_bound(k, interval, samples):
    """
    Check F_k'(r) < -r/(k+2) on `samples` evenly spaced points of
    `interval`. The analytic derivative is cross-checked against a five point
    finite difference at every sample.

    :param k: Order, k > -1.
    :param tuple interval: (lo, hi) inside a single branch domain, at least
        1e-4 away from every zero of J_{k+1}.
    :param int samples: Number of sample points, >= 2.
    :return: DecreasingReport, passed iff the largest margin
        F_k'(r) + r/(k+2) is negative and the finite difference agrees to
        1e-6 everywhere. A non finite difference counts as an infinite error.
    """
    check_order(k)
    check_index(samples, name="samples", minimum=2)
    lo, hi = float(interval[0]), float(interval[1])
    if not 0 < lo < hi:
        raise DomainError(BAD_INTERVAL.format(interval))

    kp1 = float(k) + 1.0
    poles = zeros_up_to(kp1, hi + POLE_CLEARANCE).values
    ## the step size near the right end depends on the first pole above hi
    poles = poles + [nth_zero(kp1, len(poles) + 1)]
    for pole in poles:
        if lo - POLE_CLEARANCE <= pole <= hi + POLE_CLEARANCE:
            raise SamplingError(TOUCHES_POLE.format(interval, pole))

    rs = np.linspace(lo, hi, samples)
    analytic = np.array([eval_fk_derivative(k, r) for r in rs])
    margins = analytic + rs / (float(k) + 2.0)

    fds = []
    for r in rs:
        dist = min([abs(r - p) for p in poles] + [r])
        h = min(1e-3, 0.005 * dist)
        fds.append(_fd_derivative(k, r, h))
    fds = np.array(fds)
    rel = np.abs(fds - analytic) / np.abs(analytic)
    fd_error = float(rel.max()) if np.all(np.isfinite(rel)) else math.inf

    data = pd.DataFrame({"r": rs, "derivative": analytic,
                         "finite_difference": fds, "margin": margins})
    max_margin = float(margins.max())
    report = DecreasingReport(k, (lo, hi), samples, max_margin, fd_error,
                              bool(max_margin < 0 and fd_error <= FD_TOL), data)
    LOGGER.info("decreasing bound k=%s on %s: max margin %s, fd error %s",
                k, interval, report.max_margin, report.max_fd_rel_error)
    return report


## Error messages
FK_POLE = """\
    F_k' undefined at a zero of J_{{k+1}} (k = {}, r = {})"""

BAD_INTERVAL = """\
    Interval must satisfy 0 < lo < hi (got {})"""

TOUCHES_POLE = """\
    Interval {} comes within 1e-4 of the pole of F_k at r = {}"""
