""" Evaluation of J_k(r), dJ_k/dr and J_{k+1}(r)/J_k(r) for real k > -1. """

import functools
import logging
import math

import numpy as np
import pandas as pd

from collections import namedtuple
from scipy.special import gammaln

from .util import DomainError, PoleError, ConvergenceError, check_order, check_radius

LOGGER = logging.getLogger(__name__)

EPS = np.finfo(float).eps

## Above this many orders of magnitude the backward sweep is rescaled
_RESCALE = 1e250

## Pole threshold, in units of the evaluation error bound
POLE_FACTOR = 10.0

EvalResult = namedtuple("EvalResult", ["value", "abs_error_bound"])
EvalResult.__doc__ = """ A value together with an estimate of its absolute error. """


def method_for(k, r, extra=0):
    """
    Name of the evaluation scheme used for orders k..k+extra at radius r.

    * "series": ascending power series, for r <= 6 or r^2 <= 4(k+1)
    * "hankel": large argument expansion, for r > 50 + (k+extra)^2
    * "miller": backward recurrence with Neumann normalization otherwise
    """
    if r <= 6.0 or r * r <= 4.0 * (k + 1.0):
        return "series"
    if r > 50.0 + (k + extra)**2:
        return "hankel"
    return "miller"


def _series(nu, r):
    """ J_nu(r) from the power series, summed with fsum. """
    half = 0.5 * r
    ## log of the leading term (r/2)^nu / Gamma(nu+1)
    term = math.exp(nu * math.log(half) - gammaln(nu + 1.0))
    terms = [term]
    biggest = abs(term)
    x = -half * half
    m = 0
    while True:
        m += 1
        term *= x / (m * (m + nu))
        terms.append(term)
        biggest = max(biggest, abs(term))
        if m > half and abs(term) < EPS * 1e-3 * biggest:
            break
        if m > 500:
            raise ConvergenceError("series for J_{}({}) did not converge".format(nu, r))
    value = math.fsum(terms)
    envelope = math.fsum(abs(t) for t in terms)
    return value, 4 * EPS * envelope + EPS * abs(value)


def _hankel(nu, r):
    """ J_nu(r) from the Hankel asymptotic expansion, valid for r >> nu^2. """
    mu = 4.0 * nu * nu
    pterms, qterms = [], []
    term = 1.0
    j = 0
    last = 1.0
    while True:
        if j % 2 == 0:
            pterms.append(term * (-1)**(j // 2))
        else:
            qterms.append(term * (-1)**(j // 2))
        j += 1
        nxt = term * (mu - (2 * j - 1)**2) / (8.0 * j * r)
        if abs(nxt) >= abs(term) or abs(nxt) < EPS * 1e-3:
            last = abs(nxt)
            break
        term = nxt
    chi = r - (0.5 * nu + 0.25) * math.pi
    amp = math.sqrt(2.0 / (math.pi * r))
    pp = math.fsum(pterms)
    qq = math.fsum(qterms)
    value = amp * (pp * math.cos(chi) - qq * math.sin(chi))
    return value, amp * (last + 4 * EPS * r)


def _miller(nu0, top, r):
    """
    J_{nu0+j}(r) for j = 0..top by backward recurrence from a start index
    well above max(top, r), normalized with the Neumann series
    (r/2)^nu0 = sum_m (nu0+2m) Gamma(nu0+m)/m! J_{nu0+2m}(r). Requires
    -1 < nu0 < 1.

    :return: (values, relative error estimate)
    """
    big = max(top, r, 1.0)
    start = int(big) + 20 + int(math.sqrt(40.0 * big))
    start += start % 2
    vals = np.zeros(start + 2)
    vals[start] = 1e-30
    for j in range(start, 0, -1):
        vals[j - 1] = 2.0 * (nu0 + j) / r * vals[j] - vals[j + 1]
        if abs(vals[j - 1]) > _RESCALE:
            vals[j - 1:] /= _RESCALE

    m = np.arange(1, start // 2 + 1)
    coef = (nu0 + 2 * m) * np.exp(gammaln(nu0 + m) - gammaln(m + 1.0))
    terms = [math.exp(gammaln(nu0 + 1.0)) * vals[0]]
    terms.extend(coef * vals[2 * m])
    norm = math.fsum(terms)
    scale = math.exp(nu0 * math.log(0.5 * r)) / norm
    return vals[:top + 1] * scale, 8 * EPS * math.sqrt(start)


@functools.lru_cache(maxsize=65536)
def _block(k, r, extra):
    """
    Values and error bounds for J_{k+i}(r), i = 0..extra, from a single
    evaluation scheme. k and r are floats, r > 0.
    """
    method = method_for(k, r, extra)
    if method == "series":
        res = [_series(k + i, r) for i in range(extra + 1)]
        vals = np.array([x[0] for x in res])
        errs = np.array([x[1] for x in res])
    elif method == "hankel":
        res = [_hankel(k + i, r) for i in range(extra + 1)]
        vals = np.array([x[0] for x in res])
        errs = np.array([x[1] for x in res])
    else:
        if k < 0:
            nu0, base = k, 0
        else:
            base = int(math.floor(k))
            nu0 = k - base
        allvals, rel = _miller(nu0, base + extra, r)
        vals = allvals[base:]
        envelope = math.sqrt(2.0 / (math.pi * r))
        errs = rel * np.maximum(np.abs(vals),
                                [envelope if k + i < r else 0.0 for i in range(extra + 1)])
    LOGGER.debug("J block k=%s r=%s extra=%s via %s", k, r, extra, method)
    return vals, errs


def eval_j_many(k, r, extra):
    """
    J_k(r), ..., J_{k+extra}(r) from one evaluation.

    :param k: Order, k > -1.
    :param float r: Radius, r > 0.
    :param int extra: Number of orders above k.
    :return: (numpy array of values, numpy array of error bounds)
    """
    check_order(k)
    check_radius(r, positive=True)
    vals, errs = _block(float(k), float(r), int(extra))
    return vals.copy(), errs.copy()


def eval_j(k, r):
    """
    Bessel function of the first kind J_k(r).

    :param k: Order, any real k > -1 (int, float or Fraction).
    :param float r: Radius, r >= 0.
    :return: EvalResult(value, abs_error_bound)
    """
    check_order(k)
    check_radius(r)
    if r == 0:
        if k == 0:
            return EvalResult(1.0, 0.0)
        if k > 0:
            return EvalResult(0.0, 0.0)
        raise DomainError(UNBOUNDED_AT_ORIGIN.format(k))
    vals, errs = _block(float(k), float(r), 0)
    return EvalResult(float(vals[0]), float(errs[0]))


def eval_j_derivative(k, r):
    """
    dJ_k/dr computed as (J_{k-1} - J_{k+1})/2. When k-1 <= -1 the lower
    neighbour is eliminated with J_{k-1} = (2k/r) J_k - J_{k+1}, which gives
    (k/r) J_k - J_{k+1}.

    :return: EvalResult(value, abs_error_bound)
    """
    check_order(k)
    check_radius(r, positive=True)
    k, r = float(k), float(r)
    if k - 1 > -1:
        vals, errs = _block(k - 1, r, 2)
        value = 0.5 * (vals[0] - vals[2])
        err = 0.5 * (errs[0] + errs[2]) + EPS * abs(value)
    else:
        vals, errs = _block(k, r, 1)
        value = (k / r) * vals[0] - vals[1]
        err = abs(k / r) * errs[0] + errs[1] + EPS * abs(value)
    return EvalResult(value, err)


def lentz(a, b, tol=4 * EPS, n_min=0, n_max=100000, tiny=1e-300):
    """
    Compute the continued fraction b(0) + a(1)/(b(1) + a(2)/(b(2) + ...))
    with the modified Lentz method.

    :param callable a: Partial numerators, called with n >= 1.
    :param callable b: Partial denominators, called with n >= 0.
    :param float tol: Stop once the last correction factor is within tol
        of 1 (and at least n_min terms were used). Values below a few ulps
        never trigger.
    :return: (value, estimated relative error, iterations)
    """
    f = b(0)
    if f == 0:
        f = tiny
    C = f
    D = 0.0
    n = 1
    while n <= n_max:
        D = b(n) + a(n) * D
        if D == 0:
            D = tiny
        C = b(n) + a(n) / C
        if C == 0:
            C = tiny
        D = 1.0 / D
        Delta = C * D
        f *= Delta
        if n >= n_min and abs(Delta - 1.0) < tol:
            return f, abs(Delta - 1.0), n
        n += 1
    raise ConvergenceError(NO_CF_CONVERGENCE.format(n_max))


def _ratio_cf(nu, r):
    """ J_{nu+1}(r)/J_nu(r) = 1/(b1 - 1/(b2 - 1/(b3 - ...))), b_j = 2(nu+j)/r """
    value, _, its = lentz(a=lambda n: 1.0 if n == 1 else -1.0,
                          b=lambda n: 0.0 if n == 0 else 2.0 * (nu + n) / r,
                          tol=4 * EPS,
                          n_min=int(r) + 2,
                          n_max=int(4 * r) + 10000)
    return value


def on_pole(k, r, jres):
    """
    True when r should be treated as a zero of J_k: |J_k(r)| is within
    POLE_FACTOR error bounds of zero. No zero of J_k lies at or below
    2 sqrt(k+1), so radii there never qualify.

    :param EvalResult jres: eval_j(k, r)
    """
    if r * r <= 4.0 * (float(k) + 1.0):
        return False
    return abs(jres.value) <= POLE_FACTOR * jres.abs_error_bound


def eval_ratio(k, r):
    """
    J_{k+1}(r)/J_k(r), from a continued fraction so there is no cancellation
    even where both functions are tiny.

    :raises PoleError: if |J_k(r)| is within its error bound of zero.
    """
    check_order(k)
    check_radius(r, positive=True)
    jk = eval_j(k, r)
    if on_pole(k, r, jk):
        raise PoleError(RATIO_POLE.format(k, r, jk.value))
    return _ratio_cf(float(k), float(r))


def turan_margin(k, r):
    """
    J_k^2 - J_{k-1} J_{k+1} - J_k^2/(k+1), which is positive for k > 0.
    """
    check_order(k)
    if not k > 0:
        raise DomainError(TURAN_ORDER.format(k))
    check_radius(r, positive=True)
    vals, _ = _block(float(k) - 1.0, float(r), 2)
    jm, j0, jp = vals
    k = float(k)
    return j0 * j0 - jm * jp - j0 * j0 / (k + 1.0)


def check_turan(k_values, r_values):
    """
    Evaluate the Turan margin on the product grid of orders and radii.

    :return: (pandas.DataFrame with columns k, r, margin; minimum margin)
    """
    rows = [(float(k), float(r), turan_margin(k, r))
            for k in k_values for r in r_values]
    df = pd.DataFrame(rows, columns=["k", "r", "margin"])
    return df, float(df["margin"].min())


## Error messages
UNBOUNDED_AT_ORIGIN = """\
    J_k(0) is unbounded for -1 < k < 0 (k = {})"""

RATIO_POLE = """\
    J_{{k+1}}/J_k undefined at k = {}, r = {}: J_k(r) = {} is below its error bound"""

NO_CF_CONVERGENCE = """\
    Continued fraction did not converge in {} terms"""

TURAN_ORDER = """\
    The Turan margin needs k > 0 so that J_{{k-1}} is defined (k = {})"""
