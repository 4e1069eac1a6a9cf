"""
Bessel Interlacing of Zeros

Zeros of J_k, the branches of F_k = r J_k / J_{k+1}, the rational curves
G_{k,m} whose intersections with F_k are zeros of J_{k+m}, and the
interlacing cases for orders k .. k+4.
"""

__version__ = "0.1.0"
__author__ = "BIZ developers"

## Log file, and the hidden file whose presence switches DEBUG on
__debugflag__ = "./.debug"
__debugfile__ = "./biz_log.txt"

# pylint: disable=C0103
import os as _os
import logging as _logging
import logging.config as _lconfig

from .bessel import eval_j, eval_j_derivative, eval_ratio
from .ZeroTable import ZeroTable, nth_zero, zeros_up_to, oracle_zeros
from .branches import eval_fk, branch_domain, check_decreasing_bound
from .YLinearForm import YLinearForm, compute_al, eval_al, degree_check
from .RationalCurve import RationalCurve, g_curve, poles_and_roots, intersect_with_fk
from .interlacing import Thresholds, classify, interlaced_sequence, verify_theorem
from . import util

_LOGGER = _logging.getLogger(__name__)

_LOGFORMAT = "\t".join(["%(asctime)s", "pid=%(process)d", "[%(filename)s]",
                        "%(levelname)s", "%(message)s"])


def _set_debug_dict(level):
    """
    Route every BIZ.* logger to a FileHandler on __debugfile__ at `level`.
    The file is only opened once something is logged.
    """
    _lconfig.dictConfig({
        "version": 1,
        "disable_existing_loggers": False,
        "formatters": {"biz": {"format": _LOGFORMAT}},
        "handlers": {
            __name__: {
                "class": "logging.FileHandler",
                "level": level,
                "filename": __debugfile__,
                "formatter": "biz",
                "mode": "a+",
                "delay": True,
            },
        },
        "loggers": {
            __name__: {"handlers": [__name__], "level": level, "propagate": True},
        },
    })


def _debug_on():
    """
    Write the flag file and drop to DEBUG. Only the CLI calls this, and it
    registers _debug_off to run at exit.
    """
    with open(__debugflag__, 'w') as dfile:
        dfile.write(__version__)
    _set_debug_dict("DEBUG")
    _LOGGER.info("debug logging on, version %s", __version__)


def _debug_off():
    """ Remove the flag file and go back to ERROR. """
    if _os.path.exists(__debugflag__):
        _os.remove(__debugflag__)
    _LOGGER.info("debug logging off")
    _set_debug_dict("ERROR")


_set_debug_dict("DEBUG" if _os.path.exists(__debugflag__) else "ERROR")
