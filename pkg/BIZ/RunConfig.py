import logging

from collections import OrderedDict

from .util import DomainError, check_index, parse_order, set_params

LOGGER = logging.getLogger(__name__)

COMMANDS = ["zeros", "figure", "verify", "gcurve", "classify"]
FORMATS = ["csv", "json"]


class RunConfig(object):
    """
    Settings for one CLI command. Every value passes through
    _paramschecker, so a RunConfig built with set_params is always valid.

    :param str command: One of zeros, figure, verify, gcurve, classify.
    :param bool quiet: Suppress notices (such as decimal order conversion).
    """

    def __init__(self, command, quiet=False):
        self.quiet = quiet

        ## stores default ipcluster launch info
        self._ipcluster = {
            "cluster_id": "",
            "profile": "default",
            "engines": "Local",
            "quiet": 0,
            "timeout": 120,
            "cores": 0,
            "pids": {},
            }

        ## If you add a parameter here also add it to _paramschecker and to
        ## the flags in BIZ.__main__.parse_command_line
        self.paramsdict = OrderedDict([
                       ("command", None),
                       ("k", None),
                       ("n", 1),
                       ("n_max", 5),
                       ("m", 3),
                       ("ell_max", 4),
                       ("r_max", None),
                       ("samples", 2000),
                       ("output", None),
                       ("format", "csv"),
                       ("precision", 1e-8),
        ])
        set_params(self, "command", command, quiet)

    def __str__(self):
        return "<BIZ.RunConfig {}: {}>".format(self.paramsdict["command"],
            {key: val for key, val in self.paramsdict.items() if key != "command"})

    def __getitem__(self, param):
        return self.paramsdict[param]

    def _paramschecker(self, param, newvalue, quiet=True):
        """
        Check and set one parameter. Raises DomainError on bad values.

        :param string param: The parameter to set.
        :param newvalue: The value of the parameter.
        :param bool quiet: Whether to print notices.
        """
        if param == "command":
            if newvalue not in COMMANDS:
                raise DomainError(BAD_COMMAND.format(newvalue, COMMANDS))
            self.paramsdict[param] = newvalue

        elif param == "k":
            self.paramsdict[param] = parse_order(newvalue, quiet=quiet)

        elif param in ["n", "n_max"]:
            self.paramsdict[param] = check_index(int(newvalue), name=param)

        elif param == "m":
            self.paramsdict[param] = check_index(int(newvalue), name="m", minimum=2)

        elif param == "ell_max":
            ell_max = int(newvalue)
            if not 1 <= ell_max <= 4:
                raise DomainError(BAD_ELL_MAX.format(newvalue))
            self.paramsdict[param] = ell_max

        elif param == "samples":
            self.paramsdict[param] = check_index(int(newvalue), name="samples", minimum=2)

        elif param in ["r_max", "precision"]:
            value = float(newvalue)
            if not value > 0:
                raise DomainError(NOT_POSITIVE.format(param, newvalue))
            self.paramsdict[param] = value

        elif param == "format":
            if newvalue not in FORMATS:
                raise DomainError(BAD_FORMAT.format(newvalue, FORMATS))
            self.paramsdict[param] = newvalue

        else:
            self.paramsdict[param] = newvalue

    def set_param(self, param, value, quiet=None):
        """ Convenience wrapper around util.set_params. """
        quiet = self.quiet if quiet is None else quiet
        return set_params(self, param, value, quiet)

    def require_k(self):
        """ The order, which every command except verify needs. """
        if self.paramsdict["k"] is None:
            raise DomainError(MISSING_K.format(self.paramsdict["command"]))
        return self.paramsdict["k"]


## Error messages
BAD_COMMAND = """\
    Unknown command {}, expected one of {}"""

BAD_ELL_MAX = """\
    ell_max must be 1, 2, 3 or 4 (got {})"""

NOT_POSITIVE = """\
    {} must be a positive number (got {})"""

BAD_FORMAT = """\
    Unknown output format {}, expected one of {}"""

MISSING_K = """\
    The {} command needs an order: pass --k"""
