""" Interlacing cases for the zeros of J_k, ..., J_{k+4} and their verification. """

import datetime
import json
import logging
import math
import time

import numpy as np
import pandas as pd

from collections import namedtuple
from fractions import Fraction

from .ZeroTable import nth_zero, zeros_up_to
from .util import BoundaryError, BIZError, DomainError, check_index, check_order, \
                  check_radius, fmt_order, is_exact, progressbar, warn

LOGGER = logging.getLogger(__name__)

## Threshold-vs-zero comparisons closer than this are undecidable
BOUNDARY_TOL = 1e-8

## Adjacent computed zeros closer than this cannot be ordered reliably
MIN_MARGIN = 1e-9

## Zeros closer than this are reported as ties in a merged sequence
TIE_TOL = 1e-9

Thresholds = namedtuple("Thresholds", ["k", "r_k", "r_hat_k", "r_k_plus_1", "exact_squares"])
Thresholds.__doc__ = """
r_k = 2 sqrt((k+1)(k+2)), r_hat_k = sqrt(2(k+1)(k+3)) and
r_k_plus_1 = 2 sqrt((k+2)(k+3)). For rational k, exact_squares holds the
three squares as Fractions (same order), otherwise None.
"""

SequenceEntry = namedtuple("SequenceEntry", ["label", "order", "n", "value", "tie"])

CellRecord = namedtuple("CellRecord", ["k", "n", "case_234", "case_5", "pole_in_branch",
                                       "predicted", "computed", "agree", "margin",
                                       "contained", "observed_k4_interval",
                                       "skipped", "reason"])
CellRecord.__doc__ = """
One (k, n) cell of a verification sweep. predicted and computed are lists of
(offset, index) labels; (j, i) stands for j_{k+j,i}.
"""


def compute_thresholds(k):
    """ The three thresholds of the interlacing cases for order k. """
    check_order(k)
    if is_exact(k):
        k = Fraction(k)
        squares = (4 * (k + 1) * (k + 2), 2 * (k + 1) * (k + 3), 4 * (k + 2) * (k + 3))
        exact = squares
    else:
        kf = float(k)
        squares = (4 * (kf + 1) * (kf + 2), 2 * (kf + 1) * (kf + 3), 4 * (kf + 2) * (kf + 3))
        exact = None
    r_k, r_hat, r_k1 = (math.sqrt(float(x)) for x in squares)
    return Thresholds(k, r_k, r_hat, r_k1, exact)


def corrupted_thresholds(k):
    """
    Negative control: r_k moved up by half. Sweeps run with this hook are
    expected to disagree.
    """
    good = compute_thresholds(k)
    return good._replace(r_k=1.5 * good.r_k, exact_squares=None)


def label_str(k, label):
    """ (offset, index) -> "j_{k+offset,index}" with the order written out. """
    offset, index = label
    return "j_{{{},{}}}".format(fmt_order(k + offset), index)


class InterlacingCase(object):
    """
    Outcome of classify for one (k, n).

    case_234 is "A" (j_{k+3,n} < j_{k,n+1}) or "B" (j_{k,n+1} < j_{k+3,n}).
    case_5 names the interval holding j_{k+4,n}:

    * "I":   (j_{k+3,n}, j_{k,n+1})
    * "II":  (j_{k,n+1}, j_{k+1,n+1})
    * "III": (j_{k+3,n}, j_{k+1,n+1})
    * "IV":  (j_{k+1,n+1}, j_{k+2,n+1})

    pole_in_branch is True when r_{k+1} lies in (j_{k+1,n}, j_{k+1,n+1}), in
    which case G_{k,4} does not meet F_k in that region.
    """

    def __init__(self, k, n, case_234, case_5, pole_in_branch, deciding_comparisons, zeros):
        self.k = k
        self.n = n
        self.case_234 = case_234
        self.case_5 = case_5
        self.pole_in_branch = pole_in_branch
        self.deciding_comparisons = deciding_comparisons
        self.zeros = zeros

    def __str__(self):
        return "<BIZ.InterlacingCase k={} n={}: {}/{}{}>"\
               .format(fmt_order(self.k), self.n, self.case_234, self.case_5,
                       " (pole in branch)" if self.pole_in_branch else "")

    def predicted_ordering(self):
        """
        The seven labels of j_{k+1,n} ... j_{k+2,n+1} in the order the case
        predicts, as (offset, index) pairs.
        """
        n = self.n
        if self.case_234 == "A":
            middle = [(3, n), (0, n + 1)]
        else:
            middle = [(0, n + 1), (3, n)]
        seq = [(1, n), (2, n)] + middle + [(1, n + 1)]
        anchor = {"I": (3, n), "II": (0, n + 1), "III": (3, n), "IV": (1, n + 1)}
        seq.insert(seq.index(anchor[self.case_5]) + 1, (4, n))
        seq.append((2, n + 1))
        return seq

    def to_dict(self):
        return {
            "k": fmt_order(self.k),
            "n": self.n,
            "case_234": self.case_234,
            "case_5": self.case_5,
            "pole_in_branch": self.pole_in_branch,
            "deciding_comparisons": [list(c) for c in self.deciding_comparisons],
            "predicted_ordering": [label_str(self.k, l) for l in self.predicted_ordering()],
        }


def _compare(name, zero_name, zero, threshold, tol):
    """ (threshold name, zero name, relation) with relation '<' or '>'. """
    if abs(zero - threshold) <= tol:
        raise BoundaryError(TOO_CLOSE.format(zero_name, zero, tol, name, threshold))
    return (name, zero_name, "<" if zero < threshold else ">")


def classify(k, n, tol=BOUNDARY_TOL, thresholds=None):
    """
    Decide the interlacing case of the zeros in (j_{k+1,n}, j_{k+1,n+1})
    from threshold comparisons only:

    * case A iff j_{k,n+1} < r_k, case B otherwise
    * case IV iff j_{k+1,n+1} > r_{k+1}; otherwise I, II or III as j_{k,n+1}
      falls below r_hat_k, between r_hat_k and r_k, or above r_k

    :param k: Order, k > -1.
    :param int n: n >= 1.
    :param float tol: Comparisons closer than this raise BoundaryError.
    :param Thresholds thresholds: Override, used for negative controls.
    :return: InterlacingCase
    """
    check_order(k)
    check_index(n)
    th = thresholds if thresholds is not None else compute_thresholds(k)
    kf = float(k)
    j0 = nth_zero(kf, n + 1)
    j1 = nth_zero(kf + 1.0, n + 1)
    zeros = {"j_{k,n+1}": j0, "j_{k+1,n+1}": j1}

    comps = [_compare("r_k", "j_{k,n+1}", j0, th.r_k, tol)]
    case_234 = "A" if comps[0][2] == "<" else "B"

    comps.append(_compare("r_{k+1}", "j_{k+1,n+1}", j1, th.r_k_plus_1, tol))
    pole_in_branch = False
    if comps[-1][2] == ">":
        case_5 = "IV"
        j1_prev = nth_zero(kf + 1.0, n)
        zeros["j_{k+1,n}"] = j1_prev
        comps.append(_compare("r_{k+1}", "j_{k+1,n}", j1_prev, th.r_k_plus_1, tol))
        pole_in_branch = comps[-1][2] == "<"
    elif case_234 == "B":
        case_5 = "III"
    else:
        comps.append(_compare("r_hat_k", "j_{k,n+1}", j0, th.r_hat_k, tol))
        case_5 = "I" if comps[-1][2] == "<" else "II"

    case = InterlacingCase(k, n, case_234, case_5, pole_in_branch, comps, zeros)
    LOGGER.debug("classify %s", case)
    return case


def interlaced_sequence(k, ell_max, r_max):
    """
    Merge the zeros of J_k, ..., J_{k+ell_max} up to r_max into one ascending
    list of labeled entries. Neighbors closer than 1e-9 are flagged as ties.

    :param int ell_max: 1 <= ell_max <= 4.
    :return list: SequenceEntry records with label (offset, n).
    """
    check_order(k)
    check_radius(r_max, positive=True)
    if isinstance(ell_max, bool) or not isinstance(ell_max, int) or not 1 <= ell_max <= 4:
        raise DomainError(BAD_ELL_MAX.format(ell_max))
    entries = []
    for offset in range(ell_max + 1):
        order = k + offset
        for zero in zeros_up_to(float(k) + offset, r_max):
            entries.append(SequenceEntry((offset, zero.n), order, zero.n, zero.value, False))
    entries.sort(key=lambda e: e.value)
    for i in range(len(entries) - 1):
        if entries[i + 1].value - entries[i].value < TIE_TOL:
            entries[i] = entries[i]._replace(tie=True)
            entries[i + 1] = entries[i + 1]._replace(tie=True)
            warn(UNRESOLVED_TIE.format(label_str(k, entries[i].label),
                                       label_str(k, entries[i + 1].label)))
    return entries


def _verify_cell(k, n, thresholds):
    """ Compare the predicted ordering of one cell with the computed zeros. """
    try:
        case = classify(k, n, thresholds=thresholds)
    except BoundaryError as inst:
        LOGGER.info("skipping k=%s n=%s: %s", k, n, inst)
        return CellRecord(k, n, None, None, None, [], [], None, None, None, None,
                          True, str(inst).strip())

    predicted = case.predicted_ordering()
    kf = float(k)
    values = {label: nth_zero(kf + label[0], label[1]) for label in predicted}
    computed = sorted(values, key=values.get)
    gaps = np.diff(sorted(values.values()))
    margin = float(gaps.min())

    lo, hi = values[(1, n)], values[(1, n + 1)]
    contained = all(lo < values[(j, n)] < hi for j in (2, 3))
    pos = computed.index((4, n))
    neighbors = (computed[pos - 1] if pos else None,
                 computed[pos + 1] if pos + 1 < len(computed) else None)

    if margin < MIN_MARGIN:
        return CellRecord(k, n, case.case_234, case.case_5, case.pole_in_branch,
                          predicted, computed, None, margin, contained, neighbors,
                          True, CLOSE_ZEROS.format(margin))
    agree = computed == predicted
    if not agree:
        LOGGER.warning("k=%s n=%s disagrees: predicted %s, computed %s",
                       k, n, predicted, computed)
    return CellRecord(k, n, case.case_234, case.case_5, case.pole_in_branch,
                      predicted, computed, agree, margin, contained, neighbors,
                      False, "")


def _verify_order(k, n_max, thresholds=None):
    """ All cells n = 1..n_max for one order. Runs on cluster engines too. """
    th = None if thresholds is None else thresholds(k)
    return [_verify_cell(k, n, th) for n in range(1, n_max + 1)]


def default_k_grid():
    """ 50 evenly spaced orders in (-0.9, 10]. """
    return list(np.linspace(-0.9, 10.0, 51)[1:])


def verify_theorem(k_grid, n_max, ipyclient=None, thresholds=None, quiet=True):
    """
    Check the predicted ordering of every cell (k, n), n = 1..n_max, against
    the ordering of independently computed zeros.

    :param list k_grid: Orders, each > -1.
    :param int n_max: n_max >= 1.
    :param ipyparallel.Client ipyclient: If given, one task per order is sent
        to a load balanced view. Otherwise cells run serially.
    :param callable thresholds: Optional k -> Thresholds hook.
    :param bool quiet: Suppress the progress bar.
    :return: VerificationReport
    """
    check_index(n_max, name="n_max")
    k_grid = list(k_grid)
    for k in k_grid:
        check_order(k)

    printstr = " Verifying interlacing    | {} |"
    records = []
    start = time.time()
    if not ipyclient:
        for i, k in enumerate(k_grid):
            elapsed = datetime.timedelta(seconds=int(time.time() - start))
            if not quiet:
                progressbar(len(k_grid), i, printstr.format(elapsed))
            records.extend(_verify_order(k, n_max, thresholds))
        if not quiet:
            progressbar(100, 100, " Finished {} orders\n".format(len(k_grid)))
    else:
        ipyclient[:].use_cloudpickle()
        lbview = ipyclient.load_balanced_view()
        jobs = {i: lbview.apply(_verify_order, k, n_max, thresholds)
                for i, k in enumerate(k_grid)}
        while 1:
            fin = [job.ready() for job in jobs.values()]
            elapsed = datetime.timedelta(seconds=int(time.time() - start))
            if not quiet:
                progressbar(len(fin), sum(fin), printstr.format(elapsed))
            time.sleep(0.1)
            if len(fin) == sum(fin):
                break
        if not quiet:
            progressbar(100, 100, " Finished {} orders\n".format(len(fin)))

        failed = {}
        for i in sorted(jobs):
            if not jobs[i].successful():
                failed[k_grid[i]] = jobs[i].metadata.error
            else:
                records.extend(jobs[i].result())
        if failed:
            LOGGER.error("failed orders: %s", failed)
            raise BIZError(FAILED_ORDERS.format(sorted(failed)))

    report = VerificationReport(k_grid, n_max, records)
    LOGGER.info("verification: %s", report)
    return report


class VerificationReport(object):
    """
    The records of a verification sweep.

    :param list grid: The orders swept.
    :param int n_max: Cells n = 1..n_max per order.
    :param list records: CellRecord per cell.
    """

    def __init__(self, grid, n_max, records):
        self.grid = list(grid)
        self.n_max = n_max
        self.records = list(records)

    def __str__(self):
        return "<BIZ.VerificationReport {} cells: {} agree, {} disagree, {} skipped>"\
               .format(len(self.records), self.agree_count, self.disagree_count,
                       self.skipped_count)

    @property
    def agree_count(self):
        return sum(1 for r in self.records if r.agree is True)

    @property
    def disagree_count(self):
        return sum(1 for r in self.records if r.agree is False)

    @property
    def skipped_count(self):
        return sum(1 for r in self.records if r.skipped)

    @property
    def all_agree(self):
        """ True iff no non-skipped cell disagrees. """
        return self.disagree_count == 0

    def summary(self):
        """ One row per order: cells, agree, disagree, skipped. """
        rows = []
        for k in self.grid:
            recs = [r for r in self.records if r.k == k]
            rows.append((fmt_order(k), len(recs),
                         sum(1 for r in recs if r.agree is True),
                         sum(1 for r in recs if r.agree is False),
                         sum(1 for r in recs if r.skipped)))
        return pd.DataFrame(rows, columns=["k", "cells", "agree", "disagree", "skipped"])

    def _record_dict(self, rec):
        k = rec.k
        return {
            "k": fmt_order(k),
            "n": rec.n,
            "case_234": rec.case_234,
            "case_5": rec.case_5,
            "pole_in_branch": rec.pole_in_branch,
            "predicted": [label_str(k, l) for l in rec.predicted],
            "computed": [label_str(k, l) for l in rec.computed],
            "agree": rec.agree,
            "margin": rec.margin,
            "contained": rec.contained,
            "observed_k4_interval": None if rec.observed_k4_interval is None else
                [None if l is None else label_str(k, l) for l in rec.observed_k4_interval],
            "skipped": rec.skipped,
            "reason": rec.reason,
        }

    def to_dict(self):
        return {
            "grid": [fmt_order(k) for k in self.grid],
            "n_max": self.n_max,
            "counts": {"cells": len(self.records),
                       "agree": self.agree_count,
                       "disagree": self.disagree_count,
                       "skipped": self.skipped_count},
            "all_agree": self.all_agree,
            "records": [self._record_dict(r) for r in self.records],
        }

    def to_json(self, indent=4):
        from .load import Encoder
        return json.dumps(self.to_dict(), indent=indent, cls=Encoder)


## Error messages
TOO_CLOSE = """\
    {} = {} is within {} of {} = {}"""

BAD_ELL_MAX = """\
    ell_max must be 1, 2, 3 or 4 (got {})"""

UNRESOLVED_TIE = """\
    Zeros {} and {} coincide within 1e-9; their order is unresolved"""

CLOSE_ZEROS = """\
    Computed zeros are {} apart, too close to order reliably"""

FAILED_ORDERS = """\
    Verification failed on the cluster for orders {}; see the log file"""
