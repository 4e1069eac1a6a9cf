import logging
import math
import threading

import numpy as np
import pandas as pd

from collections import OrderedDict, namedtuple
from scipy import optimize

from .bessel import eval_j, eval_j_derivative
from .util import ConvergenceError, DomainError, check_index, check_order, \
                  check_radius, newton_bisect, warn

LOGGER = logging.getLogger(__name__)

## Scan step for bracketing. Consecutive zeros of J_k are more than 3.1 apart
## for every k > -1, so each step holds at most one sign change.
SCAN_STEP = 2.5

## Largest number of scan steps allowed past the expected location of a zero
SCAN_BUDGET = 200

## Residual certificate |J_k(j_{k,n})|
MAX_RESIDUAL = 1e-10

## A refined zero this close to a bracket end triggers a re-bracket
ENDPOINT_TOL = 1e-12

## Coarsest oracle step that still resolves every zero spacing
ORACLE_MAX_STEP = 0.05

Zero = namedtuple("Zero", ["n", "value", "bracket", "residual"])


class ZeroTable(object):
    """
    The ordered positive zeros j_{k,1} < j_{k,2} < ... of J_k found so far,
    each with the bracket that certified it and the refinement residual.

    :param k: The Bessel order, k > -1.
    :param list zeros: `Zero` records, ordered by n starting at 1.
    """

    def __init__(self, k, zeros=()):
        self.k = check_order(k)
        self.zeros = list(zeros)
        for i, zero in enumerate(self.zeros):
            if zero.n != i + 1:
                raise DomainError(BAD_TABLE.format(i + 1, zero.n))
            if i and not zero.value > self.zeros[i - 1].value:
                raise DomainError(BAD_TABLE.format(i + 1, zero.n))

    def __str__(self):
        return "<BIZ.ZeroTable k={}: {} zeros>".format(self.k, len(self.zeros))

    def __len__(self):
        return len(self.zeros)

    def __iter__(self):
        return iter(self.zeros)

    def __getitem__(self, n):
        """ 1-based access: table[n] is j_{k,n}. """
        check_index(n)
        if n > len(self.zeros):
            raise IndexError("table for k={} holds {} zeros, asked for n={}"\
                             .format(self.k, len(self.zeros), n))
        return self.zeros[n - 1].value

    @property
    def values(self):
        return [z.value for z in self.zeros]

    def to_dataframe(self):
        """
        :return: A pandas.DataFrame with columns n, value, residual,
            bracket_lo and bracket_hi.
        """
        rows = [(z.n, z.value, z.residual, z.bracket[0], z.bracket[1])
                for z in self.zeros]
        return pd.DataFrame(rows, columns=["n", "value", "residual",
                                           "bracket_lo", "bracket_hi"])


def mcmahon_guess(k, n):
    """ beta - (4k^2 - 1)/(8 beta), beta = (n + k/2 - 1/4) pi """
    k = float(k)
    beta = (n + 0.5 * k - 0.25) * math.pi
    return beta - (4 * k * k - 1) / (8 * beta)


def lower_bound(k):
    """ Every positive zero of J_k exceeds 2 sqrt(k+1). """
    return 2.0 * math.sqrt(float(k) + 1.0)


def _jk(k):
    return lambda x: eval_j(k, x).value


def _refine(k, lo, hi, guess=None, step=SCAN_STEP):
    """
    Refine the single zero of J_k bracketed by (lo, hi) with the Newton and
    bisection hybrid. Returns a `Zero` with n unset.
    """
    def func(x):
        return eval_j(k, x).value, eval_j_derivative(k, x).value

    for _ in range(8):
        tol = 4e-16 * max(1.0, hi)
        root, nevals = newton_bisect(func, lo, hi, x0=guess, tol=tol, maxit=200)
        if min(root - lo, hi - root) > ENDPOINT_TOL:
            break
        ## Landed on a bracket end: re-bracket around it with a halved step
        step *= 0.5
        LOGGER.debug("re-bracketing k=%s near %s with step %s", k, root, step)
        lo, hi = max(root - 0.5 * step, lower_bound(k)), root + 0.5 * step
        if math.copysign(1, eval_j(k, lo).value) == math.copysign(1, eval_j(k, hi).value):
            raise ConvergenceError(NO_BRACKET.format(k, lo, hi))
        guess = root
    residual = abs(eval_j(k, root).value)
    if residual > MAX_RESIDUAL:
        raise ConvergenceError(BAD_RESIDUAL.format(k, root, residual))
    LOGGER.debug("zero of J_%s at %r in (%r, %r), %d evaluations",
                 k, root, lo, hi, nevals)
    return Zero(None, root, (lo, hi), residual)


## Scanned zeros per order, least recently used first:
## float(k) -> [list of Zero, next scan point]
_SCANS = OrderedDict()
_SCANS_LOCK = threading.RLock()

## Orders kept in _SCANS
MAX_SCANNED_ORDERS = 256


def _extend(k, count=None, r_max=None):
    """
    Extend the scan for order k until `count` zeros are known or the scan
    passes r_max. Returns a copy of the list of known zeros.

    Scans are shared between threads, so one order is only ever extended
    under _SCANS_LOCK.
    """
    key = float(k)
    with _SCANS_LOCK:
        if key in _SCANS:
            _SCANS.move_to_end(key)
        else:
            _SCANS[key] = [[], lower_bound(k)]
            while len(_SCANS) > MAX_SCANNED_ORDERS:
                dropped, _ = _SCANS.popitem(last=False)
                LOGGER.debug("dropping zero scan for k=%s", dropped)
        return list(_scan(k, key, count, r_max))


def _scan(k, key, count, r_max):
    zeros, x = _SCANS[key]
    f = eval_j(k, x).value

    def done():
        if count is not None:
            return len(zeros) >= count
        return x >= r_max

    ## budget: steps needed to reach the farthest target plus slack
    target = r_max if count is None else mcmahon_guess(k, count) + math.pi
    budget = int(max(0.0, target - x) / SCAN_STEP) + SCAN_BUDGET
    steps = 0
    while not done():
        if steps > budget:
            raise ConvergenceError(SCAN_EXHAUSTED.format(k, budget, x))
        steps += 1
        nxt = x + SCAN_STEP
        fn = eval_j(k, nxt).value
        if math.copysign(1, f) != math.copysign(1, fn) or fn == 0:
            if fn == 0:
                zero = Zero(None, nxt, (nxt, nxt), 0.0)
            else:
                guess = mcmahon_guess(k, len(zeros) + 1)
                zero = _refine(k, x, nxt, guess=guess)
        else:
            zero = None
        if zero is not None and not (zeros and zero.value <= zeros[-1].value):
            zeros.append(zero._replace(n=len(zeros) + 1))
        x, f = nxt, fn
        if fn == 0:
            ## step off an exact zero so it is not counted twice
            x = nxt + 1e-9
            f = eval_j(k, x).value
        _SCANS[key][1] = x
    return zeros


def first_zeros(k, count):
    """
    The first `count` positive zeros of J_k.

    :return: ZeroTable
    """
    check_order(k)
    check_index(count, name="count", minimum=0)
    zeros = _extend(k, count=count) if count else []
    return ZeroTable(k, zeros[:count])


def _neighbor_bracket(k, n, neighbor):
    """ Interlacing bracket for j_{k,n} from a table of order k-1 or k+1. """
    shift = float(neighbor.k) - float(k)
    if abs(shift - 1.0) < 1e-15:
        ## j_{k+1,n-1} < j_{k,n} < j_{k+1,n}
        if len(neighbor) < n:
            return None
        lo = neighbor[n - 1] if n > 1 else lower_bound(k)
        return max(lo, lower_bound(k)), neighbor[n]
    if abs(shift + 1.0) < 1e-15:
        ## j_{k-1,n} < j_{k,n} < j_{k-1,n+1}
        if len(neighbor) < n + 1:
            return None
        return neighbor[n], neighbor[n + 1]
    raise DomainError(BAD_NEIGHBOR.format(neighbor.k, k))


def nth_zero(k, n, neighbor=None):
    """
    The n-th positive zero j_{k,n} of J_k (n is 1-based).

    The bracket comes from interlacing with `neighbor` (a ZeroTable of order
    k-1 or k+1) when it is given and long enough, otherwise from a sign scan
    starting at 2 sqrt(k+1). In both cases the McMahon estimate seeds the
    Newton/bisection refinement.

    :param k: Order, k > -1.
    :param int n: Index, n >= 1.
    :param ZeroTable neighbor: Optional table of an adjacent order.
    :return float: j_{k,n}, absolute error <= 1e-10.
    """
    check_order(k)
    check_index(n)
    if neighbor is not None:
        bracket = _neighbor_bracket(k, n, neighbor)
        if bracket is not None:
            lo, hi = bracket
            flo, fhi = eval_j(k, lo).value, eval_j(k, hi).value
            if math.copysign(1, flo) != math.copysign(1, fhi):
                return _refine(k, lo, hi, guess=mcmahon_guess(k, n)).value
            LOGGER.warning("neighbor bracket (%s, %s) for j_{%s,%s} has no sign change",
                           lo, hi, k, n)
    return _extend(k, count=n)[n - 1].value


def zeros_up_to(k, r_max):
    """
    All zeros of J_k in (0, r_max].

    :return: ZeroTable
    """
    check_order(k)
    check_radius(r_max, positive=True)
    zeros = _extend(k, r_max=float(r_max))
    return ZeroTable(k, [z for z in zeros if z.value <= r_max])


def oracle_zeros(k, r_max, step=0.01):
    """
    Zeros of J_k in (0, r_max] by sign changes on the uniform grid
    step, 2 step, ... followed by bisection to 1e-12. No asymptotic
    information is used.

    :param float step: Grid step. Steps above 0.05 may merge close zeros
        and raise a warning.
    :return list: Sorted zeros.
    """
    check_order(k)
    check_radius(r_max, positive=True)
    check_radius(step, positive=True)
    if step > ORACLE_MAX_STEP:
        warn(COARSE_ORACLE.format(step, ORACLE_MAX_STEP))

    npts = int(math.floor(float(r_max) / step))
    grid = step * np.arange(1, npts + 1)
    if not len(grid) or grid[-1] < r_max:
        grid = np.append(grid, float(r_max))
    vals = np.array([eval_j(k, x).value for x in grid])

    func = _jk(k)
    roots = []
    for i in range(len(grid) - 1):
        if vals[i] == 0:
            roots.append(float(grid[i]))
        elif vals[i] * vals[i + 1] < 0:
            root = optimize.bisect(func, grid[i], grid[i + 1], xtol=1e-12)
            roots.append(float(root))
    if vals[-1] == 0:
        roots.append(float(grid[-1]))

    for a, b in zip(roots, roots[1:]):
        if b - a < 2 * step:
            warn(CLOSE_ZEROS.format(a, b, step))
    return roots


## Error messages
BAD_TABLE = """\
    Zero table entries must be numbered 1, 2, ... and strictly increasing
    (entry {} has n = {})"""

BAD_NEIGHBOR = """\
    Neighbor table of order {} is not adjacent to order {}"""

NO_BRACKET = """\
    Could not certify a bracket for a zero of J_{} on ({}, {})"""

BAD_RESIDUAL = """\
    Refined zero of J_{} at {} has residual {} above 1e-10"""

SCAN_EXHAUSTED = """\
    Zero scan for J_{} exhausted its budget of {} steps at r = {}"""

COARSE_ORACLE = """\
    Oracle step {} is coarser than {}; zeros closer than one step can be missed"""

CLOSE_ZEROS = """\
    Oracle zeros {} and {} are within two grid steps ({}); refine the step"""
