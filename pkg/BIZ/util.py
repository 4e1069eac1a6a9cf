import logging
import math
import numbers
import os
import sys
import warnings

import mpmath
import numpy as np

from fractions import Fraction

LOGGER = logging.getLogger(__name__)

## Largest denominator allowed when a decimal order is converted to a rational
MAX_DENOMINATOR = 10**6


## Custom exception classes
class BIZError(Exception):
    """ General BIZ exception """
    def __init__(self, *args, **kwargs):
        Exception.__init__(self, *args, **kwargs)


class DomainError(BIZError, ValueError):
    """ An argument lies outside the domain of the operation. """


class ConvergenceError(BIZError):
    """ An iteration or scan ran out of budget before certifying a result. """


class PoleError(BIZError):
    """ The requested quantity is undefined at this point (division by a zero
    of a Bessel function or of a polynomial). """


class BoundaryError(BIZError):
    """ A deciding comparison is too close to call at the working tolerance. """


class SamplingError(BIZError):
    """ A sampling interval touches a pole. """


def detect_cpus():
    """
    Detects the number of CPUs on a system. This is better than asking
    ipyparallel since ipp has to wait for Engines to spin up.
    """
    # Linux, Unix and MacOS:
    if hasattr(os, "sysconf"):
        if "SC_NPROCESSORS_ONLN" in os.sysconf_names:
            ncpus = os.sysconf("SC_NPROCESSORS_ONLN")
            if isinstance(ncpus, int) and ncpus > 0:
                return ncpus
    # Windows:
    if "NUMBER_OF_PROCESSORS" in os.environ:
        ncpus = int(os.environ["NUMBER_OF_PROCESSORS"])
        if ncpus > 0:
            return ncpus
    return 1 # Default


def progressbar(total, finished, msg=""):
    """ prints a progress bar to stderr """
    progress = 100*(finished / float(total))
    hashes = '#'*int(progress/5.)
    nohash = ' '*int(20-len(hashes))
    print("\r  [{}] {:>3}% {} ".format(hashes+nohash, int(progress), msg),
          end="", file=sys.stderr)
    sys.stderr.flush()


def is_exact(value):
    """ True for ints and Fractions (anything that is a numbers.Rational). """
    return isinstance(value, numbers.Rational) and not isinstance(value, bool)


def to_mpf(value):
    """ value as an mpmath.mpf at the current working precision; rationals exactly. """
    if is_exact(value):
        value = Fraction(value)
        return mpmath.mpf(value.numerator) / value.denominator
    return mpmath.mpf(value)


def check_order(k):
    """
    Validate a Bessel order. Orders must be finite and strictly greater
    than -1.

    :param k: int, Fraction, float or mpmath.mpf.
    :return: k, unchanged.
    """
    try:
        finite = math.isfinite(float(k))
    except (TypeError, ValueError):
        raise DomainError(BAD_ORDER.format(k))
    if not finite or k <= -1:
        raise DomainError(BAD_ORDER.format(k))
    return k


def check_radius(r, positive=False):
    """ Validate a radius. Radii are finite and >= 0 (> 0 if `positive`). """
    try:
        rr = float(r)
    except (TypeError, ValueError):
        raise DomainError(BAD_RADIUS.format(r))
    if not math.isfinite(rr) or rr < 0 or (positive and rr == 0):
        raise DomainError(BAD_RADIUS.format(r))
    return r


def check_index(n, name="n", minimum=1):
    """ Validate a 1-based index (or any integer with a lower bound). """
    if isinstance(n, bool) or not isinstance(n, numbers.Integral) or n < minimum:
        raise DomainError(BAD_INDEX.format(name, minimum, n))
    return int(n)


def parse_order(value, quiet=False):
    """
    Turn a user supplied order into an exact rational when possible.

    Strings of the form "p/q" and integer strings become exact Fractions.
    Decimal strings are converted to the nearest rational with denominator
    at most 10^6, and a notice is printed (unless `quiet`) and logged. Ints
    and Fractions are returned as Fractions; floats go through the same
    decimal conversion as decimal strings.

    :param value: str, int, float or Fraction.
    :param bool quiet: Suppress the conversion notice on stderr.
    :return: A Fraction strictly greater than -1.
    """
    if is_exact(value):
        order = Fraction(value)
    else:
        text = str(value).strip()
        try:
            if "/" in text:
                order = Fraction(text)
            else:
                try:
                    order = Fraction(int(text))
                except ValueError:
                    decimal = float(text)
                    if not math.isfinite(decimal):
                        raise DomainError(BAD_ORDER.format(value))
                    order = Fraction(text).limit_denominator(MAX_DENOMINATOR)
                    msg = DECIMAL_ORDER.format(text, order)
                    LOGGER.warning(msg)
                    if not quiet:
                        print(msg, file=sys.stderr)
        except (ValueError, ZeroDivisionError):
            raise DomainError(BAD_ORDER.format(value))
    return check_order(order)


def fmt_order(k):
    """ Render an order for labels: 2, 5/2, 0.25, ... """
    if is_exact(k):
        k = Fraction(k)
        return str(k.numerator) if k.denominator == 1 else str(k)
    return "{:.12g}".format(float(k))


def sign(value):
    """ -1, 0 or 1 """
    return int(np.sign(value))


def newton_bisect(func, x1, x2, x0=None, tol=1e-14, maxit=100):
    """
    Using a combination of Newton-Raphson and bisection, find the root of a
    function func bracketed between x1 and x2. The root will be refined until
    its accuracy is known within +/-tol.

    :param callable func: Returns (f, df) at x.
    :param float x1: Bracket end.
    :param float x2: Other bracket end, sign of f must differ from x1.
    :param float x0: Optional starting guess inside the bracket, the
        midpoint is used otherwise.
    :return: (root, number of function evaluations)
    """
    f1, _ = func(x1)
    f2, _ = func(x2)
    if f1 == 0:
        return x1, 2
    if f2 == 0:
        return x2, 2
    if sign(f1) == sign(f2):
        raise ConvergenceError(NO_SIGN_CHANGE.format(x1, x2, f1, f2))

    ## Orient so that f(xlo) < 0
    if f1 < 0:
        xlo, xhi = x1, x2
    else:
        xlo, xhi = x2, x1

    if x0 is None or not min(x1, x2) < x0 < max(x1, x2):
        x0 = 0.5 * (x1 + x2)
    x = x0
    dxold = abs(x2 - x1)
    dx = dxold
    f, df = func(x)
    nevals = 3

    for _ in range(maxit):
        if f == 0:
            return x, nevals
        ## Bisect if Newton out of range or not decreasing fast enough
        if (((x - xhi) * df - f) * ((x - xlo) * df - f) >= 0.0 or
                abs(2.0 * f) > abs(dxold * df)):
            dxold = dx
            dx = 0.5 * (xhi - xlo)
            x = xlo + dx
            if xlo == x:
                return x, nevals
        else:
            dxold = dx
            dx = f / df
            temp = x
            x = x - dx
            if temp == x:
                return x, nevals
        if abs(dx) < tol:
            return x, nevals
        f, df = func(x)
        nevals += 1
        if f < 0.0:
            xlo = x
        else:
            xhi = x

    raise ConvergenceError(NO_CONVERGENCE.format(maxit, x, f))


def set_params(data, param, newvalue, quiet=True):
    """
    Set a parameter to a new value through the object's _paramschecker.
    Raises DomainError if the key is unknown or the value is rejected.

    :param data: Any object with a paramsdict and a _paramschecker.
    :param str param: The name of the parameter, e.g. "k".
    :param newvalue: The new value, usually a string from the command line.
    """
    LOGGER.debug("set param: {} {} = {}".format(data, param, newvalue))
    if not param in list(data.paramsdict.keys()):
        raise DomainError("Parameter key not recognized: {}".format(param))
    try:
        data._paramschecker(param, newvalue, quiet)
    except Exception as inst:
        raise DomainError(BAD_PARAMETER.format(param, str(inst).strip(), newvalue))
    return data


def warn(msg):
    """ Emit a numerical warning to both the warnings machinery and the log. """
    LOGGER.warning(msg)
    warnings.warn(msg, RuntimeWarning, stacklevel=3)


## Error messages
BAD_ORDER = """\
    order must exceed -1 (got {})"""

BAD_RADIUS = """\
    radius must be a finite non-negative number (got {})"""

BAD_INDEX = """\
    {} must be an integer >= {} (got {})"""

BAD_PARAMETER = """\
    Error setting parameter '{}'
    {}
    You entered: {}
    """

DECIMAL_ORDER = """\
    Note: decimal order {} converted to the rational {}"""

NO_SIGN_CHANGE = """\
    No sign change on bracket ({}, {}): f = ({}, {})"""

NO_CONVERGENCE = """\
    Root refinement did not converge in {} iterations (x = {}, f = {})"""
