import functools
import json
import logging

import mpmath
import sympy

from fractions import Fraction
from sympy import Poly, QQ, Rational
from sympy.polys.domains import RealField

from .util import DomainError, check_index, check_order, fmt_order, is_exact, to_mpf

LOGGER = logging.getLogger(__name__)

## Working precision (decimal digits) for orders that are not rational
INEXACT_DPS = 50

S = sympy.Symbol("s")


class YLinearForm(object):
    """
    The quantity a_ell(y, r) = r^ell J_{k+1+ell}(r)/J_{k+1}(r), with
    y = F_k(r), written in the form

        a_ell = P(s) [2(k+1) - y] - Q(s) s,        s = r^2.

    For rational k the coefficients of P and Q are exact rationals (sympy
    polynomials over QQ). For any other k they are 50 digit floats.

    :param k: The order, Fraction/int (exact) or float/mpf.
    :param int ell: ell >= 1.
    :param sympy.Poly P: Polynomial in s.
    :param sympy.Poly Q: Polynomial in s.
    """

    def __init__(self, k, ell, P, Q):
        self.k = k
        self.ell = ell
        self.P = P
        self.Q = Q
        self.exact = is_exact(k)

    def __str__(self):
        return "<BIZ.YLinearForm k={} ell={}: P={}, Q={}>"\
               .format(fmt_order(self.k), self.ell,
                       self.P.as_expr(), self.Q.as_expr())

    def __eq__(self, other):
        return isinstance(other, YLinearForm) and self.k == other.k \
            and self.ell == other.ell and self.P == other.P and self.Q == other.Q

    def __hash__(self):
        return hash((self.k, self.ell, tuple(self.P.all_coeffs())))

    @property
    def p_coeffs(self):
        """ Coefficients of P in ascending powers of s. """
        return _ascending(self.P, self.exact)

    @property
    def q_coeffs(self):
        """ Coefficients of Q in ascending powers of s. """
        return _ascending(self.Q, self.exact)

    def to_dict(self):
        """
        Canonical JSON-ready shape: exact rationals as numerator/denominator
        strings, coefficients in ascending powers of s.
        """
        if not self.exact:
            raise DomainError(NOT_EXACT.format(self.k))
        k = Fraction(self.k)
        return {
            "k": _frac_dict(k),
            "ell": self.ell,
            "P": [_frac_dict(c) for c in self.p_coeffs],
            "Q": [_frac_dict(c) for c in self.q_coeffs],
        }

    def to_json(self, indent=4):
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data):
        """ Inverse of to_dict. """
        k = _dict_frac(data["k"])
        P = _poly_from([_dict_frac(c) for c in data["P"]], QQ)
        Q = _poly_from([_dict_frac(c) for c in data["Q"]], QQ)
        return cls(k, int(data["ell"]), P, Q)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _frac_dict(value):
    value = Fraction(value)
    return {"numerator": str(value.numerator),
            "denominator": str(value.denominator)}


def _dict_frac(data):
    return Fraction(int(data["numerator"]), int(data["denominator"]))


def _ascending(poly, exact):
    coeffs = list(reversed(poly.all_coeffs()))
    if exact:
        return [Fraction(int(c.p), int(c.q)) for c in map(Rational, coeffs)]
    with mpmath.workdps(INEXACT_DPS):
        return [mpmath.mpf(str(c)) for c in coeffs]


def _poly_from(ascending, domain):
    """ Poly in s from coefficients in ascending powers. """
    coeffs = [Rational(c.numerator, c.denominator) if isinstance(c, Fraction) else c
              for c in ascending]
    if not coeffs:
        coeffs = [0]
    return Poly(list(reversed(coeffs)), S, domain=domain)


def _domain_and_order(k):
    """ The coefficient domain and the order as an element of it. """
    if is_exact(k):
        k = Fraction(k)
        return QQ, Rational(k.numerator, k.denominator)
    dom = RealField(dps=INEXACT_DPS)
    return dom, sympy.Float(str(k) if isinstance(k, mpmath.mpf) else repr(float(k)),
                            INEXACT_DPS)


@functools.lru_cache(maxsize=None)
def _forms(k, ell):
    """ [(P_1, Q_1), ..., (P_ell, Q_ell)] for one order. """
    dom, kk = _domain_and_order(k)
    one = Poly(1, S, domain=dom)
    zero = Poly(0, S, domain=dom)
    s = Poly(S, S, domain=dom)
    ## a_1 = 2(k+1) - y, and a_2 = 2(k+2) a_1 - s a_0 with a_0 = 1
    forms = [(one, zero), (Poly(2 * (kk + 2), S, domain=dom), one)]
    for j in range(1, ell - 1):
        (p0, q0), (p1, q1) = forms[j - 1], forms[j]
        c = Poly(2 * (kk + 2 + j), S, domain=dom)
        forms.append((c * p1 - s * p0, c * q1 - s * q0))
    return forms[:ell]


def compute_al(k, ell):
    """
    Build a_ell as a YLinearForm from the recurrence
    a_{j+2} = 2(k+2+j) a_{j+1} - s a_j, a_0 = 1, a_1 = 2(k+1) - y.

    a_0 does not fit the y-linear template, so the run starts from
    (P_1, Q_1) = (1, 0) and (P_2, Q_2) = (2(k+2), 1), which is a_2 worked
    out from a_0 and a_1 directly.

    :param k: Order > -1. Ints and Fractions give exact coefficients.
    :param int ell: ell >= 1.
    :return: YLinearForm
    """
    check_order(k)
    check_index(ell, name="ell")
    key = Fraction(k) if is_exact(k) else k
    P, Q = _forms(key, ell)[ell - 1]
    return YLinearForm(key, ell, P, Q)


def _horner(coeffs, x):
    acc = 0 * x
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def eval_al(form, y, r):
    """
    a_ell(y, r) = P(r^2) (2(k+1) - y) - Q(r^2) r^2.

    Exact when the form and both inputs are exact (ints / Fractions): the
    result is a Fraction. With mpmath inputs the result is an mpf, otherwise
    a float.
    """
    inputs = (y, r)
    if form.exact and all(is_exact(v) for v in inputs):
        y, r, k = Fraction(y), Fraction(r), Fraction(form.k)
        pc, qc = form.p_coeffs, form.q_coeffs
    elif any(isinstance(v, mpmath.mpf) for v in inputs) or isinstance(form.k, mpmath.mpf):
        y, r, k = to_mpf(y), to_mpf(r), to_mpf(form.k)
        pc = [to_mpf(c) for c in form.p_coeffs]
        qc = [to_mpf(c) for c in form.q_coeffs]
    else:
        y, r, k = float(y), float(r), float(form.k)
        pc = [float(c) for c in form.p_coeffs]
        qc = [float(c) for c in form.q_coeffs]
    s = r * r
    return _horner(pc, s) * (2 * (k + 1) - y) - _horner(qc, s) * s


def _degree(poly):
    return -1 if poly.is_zero else poly.degree()


def degree_check(form):
    """
    True iff deg P = floor((ell-1)/2) and deg Q = floor((ell-2)/2), or, for
    ell = 1, P = 1 and Q = 0.
    """
    if form.ell == 1:
        return form.P.is_one and form.Q.is_zero
    ok = _degree(form.P) == (form.ell - 1) // 2 and \
         _degree(form.Q) == (form.ell - 2) // 2
    if not ok:
        LOGGER.warning("degree law fails for %s", form)
    return ok


## Error messages
NOT_EXACT = """\
    Only forms with a rational order have an exact serialization (k = {})"""
