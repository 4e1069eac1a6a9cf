import functools
import logging
import math

import numpy as np
import pandas as pd
import sympy

from collections import namedtuple
from fractions import Fraction
from scipy import optimize
from sympy import Poly, QQ, Rational

from .branches import eval_fk, sample_fk
from .YLinearForm import S, compute_al
from .ZeroTable import nth_zero, zeros_up_to
from .util import BoundaryError, ConvergenceError, DomainError, PoleError, \
                  check_index, check_order, check_radius, fmt_order, is_exact, warn

LOGGER = logging.getLogger(__name__)

## Width (in s = r^2) of the exact isolating intervals
ISOLATION_EPS = Rational(1, 10**24)

## A curve pole closer than this to a region end makes the region indeterminate
BOUNDARY_TOL = 1e-6

## Intersections must be separated from curve poles by at least this much
POLE_SEPARATION = 1e-8

## Sampling step for bracketing F_k - G, and offset from singular ends
GRID_STEP = 0.05
END_OFFSET = 1e-7

## Bisection tolerance for intersections
XTOL = 1e-13

## Tolerance for matching an intersection to a zero of J_{k+m}
MATCH_TOL = 1e-6

Intersection = namedtuple("Intersection", ["r_star", "region", "branch_index",
                                           "predicted_zero_identity", "residual"])
Intersection.__doc__ = """
F_k(r_star) = G_{k,m}(r_star) inside region `region`, the domain
(j_{k+1,region}, j_{k+1,region+1}) of branch phi_{region+1}.
predicted_zero_identity is (k+m, n') with r_star = j_{k+m,n'}, or None if no
zero of J_{k+m} matched within 1e-6.
"""


class RationalCurve(object):
    """
    G_{k,m}(r) = 2(k+1) - r^2 Q(r^2)/P(r^2), the solution y of
    a_{m-1}(y, r) = 0. Poles are the positive real roots of P(s) and roots are
    those of the numerator N(s) = 2(k+1) P(s) - s Q(s), mapped through
    s -> sqrt(s).

    :param k: Exact rational order.
    :param int m: Curve index, m >= 2.
    :param YLinearForm form: a_{m-1}.
    """

    def __init__(self, k, m, form):
        self.k = k
        self.m = m
        self.ell = m - 1
        self.form = form
        self.P = form.P
        self.Q = form.Q
        kk = Rational(k.numerator, k.denominator)
        self.c0 = 2 * (kk + 1)
        self.N = self.P.mul_ground(self.c0) - Poly(S, S, domain=QQ) * self.Q

        self.multiple = False
        self.pole_intervals, self.pole_forms = self._isolate(self.P, "pole")
        self.root_intervals, self.root_forms = self._isolate(self.N, "root")
        self.poles = [_sqrt_mid(iv) for iv in self.pole_intervals]
        self.roots = [_sqrt_mid(iv) for iv in self.root_intervals]

        ## Parity rule: deg(sQ) - deg(P) is 1 for even ell, otherwise <= 0
        if self.N.degree() > self.P.degree():
            self.infinity_behavior = "diverges"
            self.infinity_sign = int(sympy.sign(self.N.LC() / self.P.LC()))
            self.constant = None
        else:
            self.infinity_behavior = "constant"
            self.infinity_sign = 0
            c = self.N.LC() / self.P.LC() if self.N.degree() == self.P.degree() else 0
            self.constant = Fraction(int(Rational(c).p), int(Rational(c).q))

        self._pc = [float(c) for c in form.p_coeffs]
        self._qc = [float(c) for c in form.q_coeffs]

    def __str__(self):
        return "<BIZ.RationalCurve G_{{{},{}}}: {} poles, {} roots, {}>"\
               .format(fmt_order(self.k), self.m, len(self.poles), len(self.roots),
                       self.infinity_behavior)

    @property
    def asymptote_count(self):
        return len(self.poles)

    def _isolate(self, poly, what):
        """
        Exact isolating intervals in s for the positive real roots of `poly`,
        refined to width 1e-24, plus a closed form for every root that comes
        from a linear factor over QQ.
        """
        if poly.degree() < 1:
            return [], []
        intervals = []
        for (a, b), mult in poly.intervals(inf=0, eps=ISOLATION_EPS):
            if b <= 0:
                continue
            if mult > 1:
                self.multiple = True
                warn(MULTIPLE_ROOT.format(what, self.m, fmt_order(self.k), mult,
                                          float(a)))
            intervals.append((Fraction(int(a.p), int(a.q)), Fraction(int(b.p), int(b.q))))
        intervals.sort()

        exact = {}
        _, factors = poly.factor_list()
        for fac, _ in factors:
            if fac.degree() == 1:
                a1, a0 = fac.all_coeffs()
                s0 = -a0 / a1
                if s0 > 0:
                    exact[Fraction(int(s0.p), int(s0.q))] = str(sympy.sqrt(s0))
        forms = []
        for lo, hi in intervals:
            match = [v for s0, v in exact.items() if lo <= s0 <= hi]
            forms.append(match[0] if match else None)
        return intervals, forms

    def evaluate_s(self, s):
        """
        G as a function of s = r^2. Exact (Fraction) for exact s.

        :raises PoleError: if P(s) = 0.
        """
        if is_exact(s):
            s = Fraction(s)
            p = _horner_exact(self.form.p_coeffs, s)
            if p == 0:
                raise PoleError(CURVE_POLE.format(self.m, fmt_order(self.k), s))
            q = _horner_exact(self.form.q_coeffs, s)
            return 2 * (Fraction(self.k) + 1) - s * q / p
        s = float(s)
        p = np.polynomial.polynomial.polyval(s, self._pc)
        if p == 0:
            raise PoleError(CURVE_POLE.format(self.m, fmt_order(self.k), s))
        q = np.polynomial.polynomial.polyval(s, self._qc)
        return 2.0 * (float(self.k) + 1.0) - s * q / p

    def evaluate_exact(self, r):
        """ G(r) for an exact rational r, as a Fraction. """
        r = Fraction(r)
        return self.evaluate_s(r * r)

    def evaluate(self, r):
        """
        Floating point G(r) for a scalar or array; nan at the poles.
        """
        r = np.asarray(r, dtype=float)
        s = r * r
        p = np.polynomial.polynomial.polyval(s, self._pc)
        q = np.polynomial.polynomial.polyval(s, self._qc)
        with np.errstate(divide="ignore", invalid="ignore"):
            g = 2.0 * (float(self.k) + 1.0) - s * q / p
        g = np.where(p == 0, np.nan, g)
        for pole in self.poles:
            g = np.where(np.abs(r - pole) <= 1e-12 * pole, np.nan, g)
        return float(g) if g.ndim == 0 else g

    def expression(self):
        """ G as a string in r, e.g. "6 - r^2/8". """
        c0 = _fmt_rational(self.c0)
        if self.Q.is_zero:
            return c0
        p = self.form.p_coeffs
        q = self.form.q_coeffs
        if len(p) == 1 and len(q) == 1:
            ratio = q[0] / p[0]
            num = "r^2" if ratio.numerator == 1 else "{}*r^2".format(ratio.numerator)
            if ratio.denominator != 1:
                num += "/{}".format(ratio.denominator)
            return "{} - {}".format(c0, num)
        ## parentheses only around sums
        if _nterms(q) == 1:
            num = _fmt_poly_r([0] + list(q))
        else:
            num = "r^2*({})".format(_fmt_poly_r(q))
        den = _fmt_poly_r(p)
        if _nterms(p) > 1 or den.startswith("-"):
            den = "({})".format(den)
        op = "-"
        if num.startswith("-"):
            op, num = "+", num[1:]
        return "{} {} {}/{}".format(c0, op, num, den)

    def describe(self):
        """ Plain dict view: exact coefficients, poles, roots, behavior at infinity. """
        return {
            "k": fmt_order(self.k),
            "m": self.m,
            "expression": self.expression(),
            "P": [str(c) for c in self.form.p_coeffs],
            "Q": [str(c) for c in self.form.q_coeffs],
            "poles": [{"value": v, "exact": f} for v, f in zip(self.poles, self.pole_forms)],
            "roots": [{"value": v, "exact": f} for v, f in zip(self.roots, self.root_forms)],
            "infinity_behavior": self.infinity_behavior,
            "infinity_sign": self.infinity_sign,
            "constant": None if self.constant is None else str(self.constant),
            "multiple_roots": self.multiple,
        }


def _sqrt_mid(interval):
    lo, hi = interval
    return math.sqrt(float((lo + hi) / 2))


def _horner_exact(coeffs, x):
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _fmt_rational(value):
    value = Fraction(int(Rational(value).p), int(Rational(value).q))
    return fmt_order(value)


def _nterms(coeffs):
    return sum(1 for c in coeffs if c != 0)


def _fmt_poly_r(coeffs):
    """ Ascending coefficients in s rendered as a polynomial in r. """
    terms = []
    for i, c in enumerate(coeffs):
        if c == 0:
            continue
        mag = abs(c)
        if i == 0:
            body = fmt_order(mag)
        else:
            power = "r^{}".format(2 * i)
            body = power if mag == 1 else "{}*{}".format(fmt_order(mag), power)
        terms.append(("-" if c < 0 else "+", body))
    if not terms:
        return "0"
    out = ("-" if terms[0][0] == "-" else "") + terms[0][1]
    for sgn, body in terms[1:]:
        out += " {} {}".format(sgn, body)
    return out


@functools.lru_cache(maxsize=None)
def _curve(k, m):
    return RationalCurve(k, m, compute_al(k, m - 1))


def g_curve(k, m):
    """
    Build G_{k,m} from compute_al(k, m-1).

    :param k: Order > -1. Floats are taken at their exact binary value.
    :param int m: m >= 2.
    :return: RationalCurve
    """
    check_order(k)
    check_index(m, name="m", minimum=2)
    return _curve(Fraction(k), m)


def poles_and_roots(curve):
    """ (sorted poles, sorted roots) of a RationalCurve, as floats. """
    return list(curve.poles), list(curve.roots)


def region_bounds(k, n):
    """
    Region n is (j_{k+1,n}, j_{k+1,n+1}), the domain of branch phi_{n+1};
    region 0 is (0, j_{k+1,1}).
    """
    check_index(n, minimum=0)
    kp1 = float(k) + 1.0
    lo = 0.0 if n == 0 else nth_zero(kp1, n)
    return lo, nth_zero(kp1, n + 1)


def _segments(lo, hi, poles):
    """ Split (lo, hi) at the curve poles, pulling every end in by END_OFFSET. """
    cuts = [lo] + [p for p in poles if lo < p < hi] + [hi]
    return [(a + END_OFFSET * max(1.0, a), b - END_OFFSET * max(1.0, b))
            for a, b in zip(cuts, cuts[1:])]


def _identify(k, m, r_star):
    order = float(k) + m
    for zero in zeros_up_to(order, r_star + 1.0):
        if abs(zero.value - r_star) <= MATCH_TOL:
            return (Fraction(k) + m, zero.n)
    return None


def intersections_in_region(k, curve, n):
    """
    Every intersection of F_k and the curve inside region n.

    F_k - G is sampled on each piece of the region between curve poles and
    every sign change is refined with scipy.optimize.brentq.

    :raises BoundaryError: if a curve pole sits within 1e-6 of a region end.
    :raises ConvergenceError: if an intersection cannot be separated from a
        curve pole by 1e-8.
    :return list: Intersection records, ascending.
    """
    lo, hi = region_bounds(k, n)
    if n == 0:
        ## j_{k+m,1} > j_{k+1,1}: nothing to find on the first branch, where
        ## F_k - G is rounding noise near r = 0 (G matches F_k to high order)
        return []
    for pole in curve.poles:
        for end in (lo, hi):
            if end > 0 and abs(pole - end) <= BOUNDARY_TOL:
                raise BoundaryError(POLE_AT_ENDPOINT.format(curve.m, pole, n, end))

    def diff(r):
        return eval_fk(k, r).value - curve.evaluate(r)

    found = []
    for a, b in _segments(lo, hi, curve.poles):
        if b <= a:
            continue
        npts = max(2, int(math.ceil((b - a) / GRID_STEP)) + 1)
        grid = np.linspace(a, b, npts)
        vals = np.array([diff(r) for r in grid])
        for i in range(npts - 1):
            if vals[i] == 0:
                found.append(float(grid[i]))
            elif vals[i] * vals[i + 1] < 0:
                root = optimize.brentq(diff, grid[i], grid[i + 1], xtol=XTOL)
                found.append(float(root))
        if vals[-1] == 0:
            found.append(float(grid[-1]))

    out = []
    for r_star in found:
        for pole in curve.poles:
            if abs(r_star - pole) < POLE_SEPARATION:
                raise ConvergenceError(NEAR_POLE.format(r_star, curve.m, pole))
        ident = _identify(curve.k, curve.m, r_star)
        if ident is None:
            warn(UNMATCHED.format(r_star, fmt_order(curve.k), curve.m))
        out.append(Intersection(r_star, n, n + 1, ident, abs(diff(r_star))))
    LOGGER.debug("G_{%s,%s} region %s: %d intersections", curve.k, curve.m, n, len(out))
    return out


def intersect_with_fk(k, curve, n):
    """
    The intersection of F_k with the curve in region n, or None.

    For m = 2 and m = 3 there is exactly one intersection in every region
    n >= 1, and it is j_{k+m,n}. For m = 4 there is none when the curve's
    pole lies inside the region.

    :param k: Order > -1.
    :param RationalCurve curve: From g_curve.
    :param int n: Region index, n >= 0.
    :return: Intersection or None
    """
    check_order(k)
    hits = intersections_in_region(k, curve, n)
    if not hits:
        return None
    if len(hits) > 1:
        warn(SEVERAL.format(len(hits), curve.m, n, [h.r_star for h in hits]))
    return hits[0]


def intersections_up_to(k, m, r_max):
    """
    All intersections of F_k and G_{k,m} in (0, r_max].

    :return list: Intersection records, ascending in r_star.
    """
    check_order(k)
    check_radius(r_max, positive=True)
    curve = g_curve(k, m)
    out = []
    n = 0
    while True:
        lo, _ = region_bounds(k, n)
        if lo >= r_max:
            break
        out.extend(h for h in intersections_in_region(k, curve, n) if h.r_star <= r_max)
        n += 1
    return out


def _blank_near(values, r, poles, half):
    for pole in poles:
        values[np.abs(r - pole) < half] = np.nan
    return values


def sample_curves(k, r_values, ms=(2, 3, 4)):
    """
    F_k and G_{k,m} on a grid, for redrawing the intersections.

    Values within half a grid step of a pole are nan (blank in CSV).

    :return: pandas.DataFrame with columns r, F_k, G_k_2, G_k_3, ...
    """
    check_order(k)
    r = np.asarray(r_values, dtype=float)
    if r.ndim != 1 or len(r) < 2 or not np.all(np.diff(r) > 0) or r[0] <= 0:
        raise DomainError(BAD_GRID)
    half = 0.5 * float(np.min(np.diff(r)))

    fk_poles = zeros_up_to(float(k) + 1.0, r[-1] + half).values
    data = {"r": r, "F_k": _blank_near(sample_fk(k, r), r, fk_poles, half)}
    for m in ms:
        curve = g_curve(k, m)
        data["G_k_{}".format(m)] = _blank_near(curve.evaluate(r), r, curve.poles, half)
    return pd.DataFrame(data, columns=["r", "F_k"] + ["G_k_{}".format(m) for m in ms])


def check_curve_ordering(k, samples):
    """
    Check the ordering chain of G_{k,2}, G_{k,3}, G_{k,4} and 0 on each of
    the four regimes split by the root of G_{k,4}, the root of G_{k,3} and
    the pole of G_{k,4}:

    * (0, r_hat):     G2 > G3 > G4 > 0
    * (r_hat, r_k):   G2 > G3 > 0 > G4
    * (r_k, r_k+1):   G2 > 0 > G3 > G4
    * r > r_k+1:      G4 > G2 > 0 > G3

    :param int samples: Points per regime.
    :return: (pandas.DataFrame, bool all points hold)
    """
    check_index(samples, name="samples", minimum=2)
    g2, g3, g4 = (g_curve(k, m) for m in (2, 3, 4))
    r_hat, r_k, r_k1 = g4.roots[0], g3.roots[0], g4.poles[0]
    regimes = [
        ("below_r_hat", 0.0, r_hat, lambda a, b, c: a > b > c > 0),
        ("r_hat_to_r_k", r_hat, r_k, lambda a, b, c: a > b > 0 > c),
        ("r_k_to_r_k1", r_k, r_k1, lambda a, b, c: a > 0 > b > c),
        ("above_r_k1", r_k1, r_k1 + 10.0, lambda a, b, c: c > a > 0 > b),
    ]
    rows = []
    for name, lo, hi, rule in regimes:
        ## interior points only, the chain is strict and degenerates at the ends
        for r in np.linspace(lo, hi, samples + 2)[1:-1]:
            a, b, c = g2.evaluate(r), g3.evaluate(r), g4.evaluate(r)
            rows.append((name, float(r), a, b, c, bool(rule(a, b, c))))
    df = pd.DataFrame(rows, columns=["regime", "r", "G_k_2", "G_k_3", "G_k_4", "holds"])
    return df, bool(df["holds"].all())


## Error messages
MULTIPLE_ROOT = """\
    Unexpected {} of multiplicity > 1 for G_{{k,{}}} at k = {} (multiplicity {}, s ~ {})"""

CURVE_POLE = """\
    G_{{k,{}}} is undefined at a pole (k = {}, s = {})"""

POLE_AT_ENDPOINT = """\
    Pole of G_{{k,{}}} at r = {} is within 1e-6 of the end of region {} (r = {});
    the region is indeterminate"""

NEAR_POLE = """\
    Intersection at r = {} cannot be separated from the pole of G_{{k,{}}} at {}"""

UNMATCHED = """\
    Intersection at r = {} (k = {}, m = {}) matches no zero of J_{{k+m}} within 1e-6"""

SEVERAL = """\
    {} intersections of G_{{k,{}}} with F_k in region {}: {}"""

BAD_GRID = """\
    Sample radii must be a strictly increasing positive array with at least two points"""
