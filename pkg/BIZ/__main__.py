""" the main CLI for calling BIZ """

import argparse
import logging
import atexit
import time
import sys
import os

import numpy as np
import pandas as pd

import BIZ

from BIZ.util import BIZError, ConvergenceError, DomainError, detect_cpus
from BIZ.RunConfig import RunConfig
from BIZ.ZeroTable import first_zeros, nth_zero
from BIZ.branches import branch_summary
from BIZ.RationalCurve import g_curve, sample_curves
from BIZ.interlacing import classify, corrupted_thresholds, default_k_grid, \
                            interlaced_sequence, label_str, verify_theorem
from BIZ.load import save_json, table_text, write_table

## named explicitly so `python -m BIZ` still logs under the BIZ handler
LOGGER = logging.getLogger("BIZ.__main__")

## n_max used by verify when --n-max is not given
VERIFY_N_MAX = 15


def parse_command_line(argv=None):
    """ Parse CLI args. """

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--k", metavar="k", dest="k", type=str,
        help="Bessel order k > -1: 'p/q', an integer or a decimal")
    common.add_argument("--n", metavar="n", dest="n", type=str,
        help="index of the zero or interlacing cell")
    common.add_argument("--n-max", metavar="n_max", dest="n_max", type=str,
        help="largest index for tables and sweeps")
    common.add_argument("--m", metavar="m", dest="m", type=str,
        help="curve index of G_{k,m}, m >= 2")
    common.add_argument("--ell-max", metavar="ell_max", dest="ell_max", type=str,
        help="highest order offset of merged zero sequences (1..4)")
    common.add_argument("--r-max", metavar="r_max", dest="r_max", type=str,
        help="upper radius for tables and samples")
    common.add_argument("--samples", metavar="samples", dest="samples", type=str,
        help="number of sample points")
    common.add_argument("--format", metavar="format", dest="format", type=str,
        help="output format: csv (default) or json")
    common.add_argument("--precision", metavar="precision", dest="precision", type=str,
        help="tolerance of threshold comparisons in classify (default 1e-8)")
    common.add_argument("-o", metavar="output", dest="output", type=str,
        help="output path (prefix for figure); stdout when omitted")
    common.add_argument("-q", action="store_true", dest="quiet",
        help="do not print the header or notices to stderr")
    common.add_argument("-d", action="store_true", dest="debug",
        help="print lots more info to biz_log.txt")
    common.add_argument("-c", metavar="cores", dest="cores", type=int, default=-1,
        help="verify on a local ipcluster with this many cores (0=All)")
    common.add_argument("--ipcluster", metavar="ipcluster", dest="ipcluster",
        type=str, nargs="?", const="default",
        help="verify on a running ipcluster (profile name)")
    common.add_argument("--corrupt-threshold", action="store_true",
        dest="corrupt_threshold", help=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(
        prog="BIZ",
        add_help=True,
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""\n
  * Example command-line usage:
    BIZ zeros --k 0 --n-max 3              ## first three zeros of J_0
    BIZ gcurve --k 2 --m 4                 ## poles and roots of G_{2,4}
    BIZ classify --k 2 --n 1               ## interlacing case for k=2, n=1
    BIZ figure --k 2 --n-max 8 -o fig2     ## plot data in fig2_*.csv
    BIZ verify -c 4                        ## full sweep on 4 cores
    """)
    parser.add_argument("--version", action="version",
        version="BIZ {}".format(BIZ.__version__))

    subparsers = parser.add_subparsers(title="commands", dest="command", metavar="")
    subparsers.add_parser("zeros", parents=[common],
        help="table of the zeros j_{k,n}, n <= n_max")
    subparsers.add_parser("figure", parents=[common],
        help="samples of F_k and G_{k,2..4}, merged zero list, branch summary")
    subparsers.add_parser("verify", parents=[common],
        help="check the interlacing cases against computed zeros")
    subparsers.add_parser("gcurve", parents=[common],
        help="exact form, poles and roots of G_{k,m}")
    subparsers.add_parser("classify", parents=[common],
        help="interlacing case for one (k, n)")

    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help(sys.stderr)
        sys.exit(2)
    return args


def build_config(args):
    """ Turn parsed args into a validated RunConfig. """
    config = RunConfig(args.command, quiet=args.quiet)
    for param in ["k", "n", "n_max", "m", "ell_max", "r_max", "samples",
                  "format", "output", "precision"]:
        value = getattr(args, param)
        if value is not None:
            config.set_param(param, value)
    if args.command == "verify" and args.n_max is None:
        config.set_param("n_max", VERIFY_N_MAX)
    LOGGER.debug("config %s", config)
    return config


def cmd_zeros(config):
    """ Table of j_{k,n}: columns n, value, residual. """
    k = config.require_k()
    table = first_zeros(k, config["n_max"]).to_dataframe()
    write_table(table[["n", "value", "residual"]], config["output"], config["format"])
    return 0


def _figure_data(config):
    k = config.require_k()
    n_max = config["n_max"]
    r_max = config["r_max"] or nth_zero(float(k) + 1.0, n_max + 1)
    ## fixed grid so repeated runs are byte identical
    r = np.linspace(r_max / config["samples"], r_max, config["samples"])
    samples = sample_curves(k, r)

    entries = interlaced_sequence(k, config["ell_max"], r_max)
    zeros = pd.DataFrame([(label_str(k, e.label), e.label[0], e.n, e.value, e.tie)
                          for e in entries],
                         columns=["label", "offset", "n", "value", "tie"])
    branches = branch_summary(k, n_max + 1)
    return samples, zeros, branches


def cmd_figure(config):
    """
    Plot data for the intersections of F_k with G_{k,2..4}: samples with
    blank cells at poles, the merged labeled zero list, and the branch summary.
    """
    parts = dict(zip(["samples", "zeros", "branches"], _figure_data(config)))
    output, fmt = config["output"], config["format"]
    if fmt == "json":
        doc = {name: df.astype(object).where(pd.notnull(df), None).to_dict(orient="records")
               for name, df in parts.items()}
        save_json(doc, None if output is None else output + ".json")
    elif output is None:
        for name, df in parts.items():
            sys.stdout.write("# {}\n".format(name))
            sys.stdout.write(table_text(df))
    else:
        for name, df in parts.items():
            write_table(df, "{}_{}.csv".format(output, name), fmt)
    return 0


def _get_ipyclient(args, config):
    """ Attach to or launch a cluster, or None for serial runs. """
    if not (args.ipcluster or args.cores >= 0):
        return None
    import ipyparallel as ipp
    from BIZ.parallel import register_ipcluster, get_client, cluster_info
    if args.ipcluster:
        ipyclient = ipp.Client(profile=args.ipcluster)
        config._ipcluster["cores"] = len(ipyclient.ids)
        if not args.quiet:
            print("    Attached to cluster {} w/ {} engines."\
                  .format(args.ipcluster, config._ipcluster["cores"]), file=sys.stderr)
    else:
        config._ipcluster["cores"] = args.cores if args.cores else detect_cpus()
        config._ipcluster["engines"] = "Local"
        config = register_ipcluster(config)
        ipyclient = get_client(**config._ipcluster)
        if not args.quiet:
            print(cluster_info(ipyclient), file=sys.stderr)

    ## engine pids, so busy engines can be interrupted at cleanup
    config._ipcluster["pids"] = {}
    for eid in ipyclient.ids:
        engine = ipyclient[eid]
        if not engine.outstanding:
            config._ipcluster["pids"][eid] = engine.apply(os.getpid).get()
    return ipyclient


def cmd_verify(config, ipyclient=None, corrupt=False):
    """ Run the sweep, write the report, exit 0 iff every checked cell agrees. """
    k = config["k"]
    grid = [k] if k is not None else default_k_grid()
    report = verify_theorem(grid, config["n_max"], ipyclient=ipyclient,
                            thresholds=corrupted_thresholds if corrupt else None,
                            quiet=config.quiet)
    if config["format"] == "json":
        save_json(report.to_dict(), config["output"])
    else:
        write_table(report.summary(), config["output"], "csv")
    if not config.quiet:
        print("  {}".format(report), file=sys.stderr)
    return 0 if report.all_agree else 1


def cmd_gcurve(config):
    """ Exact P and Q, poles, roots and behavior at infinity of G_{k,m}. """
    k = config.require_k()
    curve = g_curve(k, config["m"])
    desc = curve.describe()
    if config["r_max"]:
        r = np.linspace(config["r_max"] / config["samples"], config["r_max"],
                        config["samples"])
        desc["samples"] = [{"r": x, "G": g} for x, g in zip(r, curve.evaluate(r))]
    if config["format"] == "json":
        save_json(desc, config["output"])
        return 0

    rows = [("expression", "", desc["expression"])]
    rows += [("P", i, c) for i, c in enumerate(desc["P"])]
    rows += [("Q", i, c) for i, c in enumerate(desc["Q"])]
    rows += [("pole", p["exact"] or "", repr(p["value"])) for p in desc["poles"]]
    rows += [("root", p["exact"] or "", repr(p["value"])) for p in desc["roots"]]
    rows.append(("infinity", desc["infinity_behavior"],
                 desc["constant"] if desc["constant"] is not None
                 else str(desc["infinity_sign"])))
    for s in desc.get("samples", []):
        rows.append(("sample", repr(float(s["r"])),
                     "" if np.isnan(s["G"]) else repr(float(s["G"]))))
    write_table(pd.DataFrame(rows, columns=["item", "key", "value"]),
                config["output"], "csv")
    return 0


def cmd_classify(config):
    """ Interlacing case of one (k, n). """
    k = config.require_k()
    case = classify(k, config["n"], tol=config["precision"])
    doc = case.to_dict()
    if config["format"] == "json":
        save_json(doc, config["output"])
    else:
        row = dict(doc)
        row["deciding_comparisons"] = "; ".join(" ".join(c) for c in doc["deciding_comparisons"])
        row["predicted_ordering"] = " < ".join(doc["predicted_ordering"])
        write_table(pd.DataFrame([row]), config["output"], "csv")
    return 0


COMMANDS = {
    "zeros": cmd_zeros,
    "figure": cmd_figure,
    "gcurve": cmd_gcurve,
    "classify": cmd_classify,
}


def main(argv=None):
    """ main function; returns the exit code """
    args = parse_command_line(argv)

    if not args.quiet:
        print(BIZ_HEADER, file=sys.stderr)

    if os.path.exists(BIZ.__debugflag__):
        os.remove(BIZ.__debugflag__)

    if args.debug:
        if not args.quiet:
            print("\n  ** Enabling debug mode **\n", file=sys.stderr)
        BIZ._debug_on()
        atexit.register(BIZ._debug_off)

    ## Log the current version. End run around the LOGGER
    ## so it'll always print regardless of log level.
    with open(BIZ.__debugfile__, 'a') as logfile:
        logfile.write(BIZ_HEADER)
        logfile.write("\n  Begin run: {}".format(time.strftime("%Y-%m-%d %H:%M")))
        logfile.write("\n  Using args {}".format(vars(args)))
        logfile.write("\n  Platform info: {}\n".format(os.uname()))

    ipyclient = None
    config = None
    try:
        config = build_config(args)
        if args.command == "verify":
            ipyclient = _get_ipyclient(args, config)
            return cmd_verify(config, ipyclient, corrupt=args.corrupt_threshold)
        return COMMANDS[args.command](config)

    except KeyboardInterrupt:
        print("\n  Keyboard Interrupt by user", file=sys.stderr)
        LOGGER.info("run interrupted by user.")
        return 1
    except DomainError as inst:
        return _report(inst, 2)
    except ConvergenceError as inst:
        return _report(inst, 3)
    except BIZError as inst:
        return _report(inst, 1)
    finally:
        if ipyclient:
            try:
                from BIZ.parallel import shutdown_client
                shutdown_client(ipyclient, config)
            except Exception as inst2:
                print("warning: error during shutdown:\n{}".format(inst2), file=sys.stderr)
                LOGGER.error("shutdown warning: %s", inst2)


def _report(inst, code):
    LOGGER.error("%s: %s", type(inst).__name__, inst)
    print("\n  Encountered an error (see details in {})".format(BIZ.__debugfile__)+\
          "\n  Error summary is below -------------------------------"+\
          "\n{}".format(inst), file=sys.stderr)
    return code


BIZ_HEADER = \
"\n -------------------------------------------------------------"+\
"\n  BIZ [v.{}]".format(BIZ.__version__)+\
"\n  Bessel Interlacing of Zeros"+\
"\n -------------------------------------------------------------"


if __name__ == "__main__":
    sys.exit(main())
