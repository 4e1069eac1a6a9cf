""" Launch, attach to and tear down the ipcluster used by verification sweeps """

import contextlib
import logging
import os
import shlex
import socket
import subprocess
import sys
import time

import ipyparallel as ipp

from .util import BIZError

LOGGER = logging.getLogger(__name__)

## Prefix of cluster ids owned by a CLI process
CLI_PREFIX = "biz-cli-"

## Engine polling: interval and number of polls (about a minute in all)
POLL = 0.01
MAX_POLLS = 6000

## Once engines show up on a launched cluster, wait this long for stragglers
SETTLE = 3


def _owned(cluster_id):
    return bool(cluster_id) and cluster_id.startswith(CLI_PREFIX)


def start_ipcluster(config):
    """
    ipcluster start --daemonize with the cluster id, engine type, profile
    and core count held in config._ipcluster.
    """
    ipc = config._ipcluster
    cmd = ["ipcluster", "start", "--daemonize",
           "--cluster-id={}".format(ipc["cluster_id"]),
           "--engines={}".format(ipc["engines"]),
           "--profile={}".format(ipc["profile"]),
           "--n={}".format(ipc["cores"])]
    ## MPI engines on other hosts need the controller on every interface
    if "MPI" in ipc["engines"]:
        cmd.append("--ip=*")

    LOGGER.info("launching: %s", " ".join(shlex.quote(c) for c in cmd))
    try:
        subprocess.check_call(cmd, stderr=subprocess.STDOUT, stdout=subprocess.PIPE)
    except subprocess.CalledProcessError:
        LOGGER.debug("ipcontroller already running for %s", ipc["cluster_id"])
        raise
    except OSError as inst:
        raise BIZError(LAUNCH_FAILED.format(inst))


def register_ipcluster(config):
    """
    Claim a cluster id tied to this pid, so a CLI launched cluster never
    shares a controller with another process, then launch it.
    """
    config._ipcluster["cluster_id"] = "{}{}".format(CLI_PREFIX, os.getpid())
    start_ipcluster(config)
    return config


def _wait_for_engines(ipyclient, wait_all, cores):
    """
    Poll until engines register. With wait_all (MPI or a cluster we just
    launched) wait for `cores` engines, or until the count stops growing;
    otherwise one engine is enough.
    """
    for _ in range(MAX_POLLS):
        seen = len(ipyclient)
        time.sleep(POLL)
        if cores and seen == cores:
            return seen
        if not seen:
            continue
        if not wait_all and not cores:
            return seen
        if wait_all:
            time.sleep(SETTLE)
            if len(ipyclient) == seen:
                return seen
    return len(ipyclient)


def get_client(cluster_id, profile, engines, timeout, cores, quiet, **kwargs):
    """
    Connect to a running ipcluster and return the client once its engines
    have registered.

    :param str cluster_id: Used only with the default profile.
    :param str profile: ipython profile of the cluster.
    :param str engines: "Local" or "MPI".
    :param int timeout: Seconds ipyparallel waits for the controller.
    :param int cores: Engines to wait for, 0 for "whatever registers".
    :param bool quiet: Suppress the connection message.
    :raises BIZError: if no controller answers.
    """
    if profile in (None, "default"):
        args = {"cluster_id": cluster_id, "profile": profile, "timeout": timeout}
    else:
        args = {"profile": profile, "timeout": timeout}

    ## ipyparallel chatters on stdout/stderr while it looks for the controller
    try:
        with open(os.devnull, "w") as devnull, \
                contextlib.redirect_stdout(devnull), contextlib.redirect_stderr(devnull):
            ipyclient = ipp.Client(**args)
    except IOError:
        raise BIZError(NO_IPCLUSTER_CLI if _owned(cluster_id) else NO_IPCLUSTER_API)

    wait_all = engines == "MPI" or _owned(cluster_id)
    if wait_all and not quiet:
        print("  establishing parallel connection:", file=sys.stderr)
    found = _wait_for_engines(ipyclient, wait_all, cores)
    LOGGER.info("connected to %s engines (profile=%s)", found, profile)
    return ipyclient


def cluster_info(ipyclient):
    """ One line per host: how many idle engines run there. """
    pending = [ipyclient[eid].apply(socket.gethostname)
               for eid in ipyclient.ids if not ipyclient[eid].outstanding]
    hosts = [p.get() for p in pending]
    return "\n".join("  host compute node: [{} cores] on {}".format(hosts.count(h), h)
                     for h in sorted(set(hosts)))


def shutdown_client(ipyclient, config):
    """
    Abort outstanding tasks and interrupt busy engines. A cluster this
    process launched is shut down; an attached one is only purged.
    """
    try:
        ipyclient.abort(block=False)
        time.sleep(1)
        status = ipyclient.queue_status()
        for engine_id, pid in list(config._ipcluster["pids"].items()):
            if status[engine_id]["tasks"]:
                os.kill(pid, 2)
                LOGGER.info("sent SIGINT to engine %s (pid %s)", engine_id, pid)
    except ipp.NoEnginesRegistered as inst:
        LOGGER.debug("no engines registered: %s", inst)

    if _owned(config._ipcluster["cluster_id"]) or ipyclient.outstanding:
        LOGGER.info("shutting down engines")
        ipyclient.shutdown(hub=True, block=False)
        ipyclient.close()
        if not _owned(config._ipcluster["cluster_id"]):
            print("\nwarning: ipcluster shutdown and must be restarted", file=sys.stderr)
    else:
        ipyclient.purge_everything()


## Error messages
NO_IPCLUSTER_CLI = """\
    No ipcluster instance found. Either the install is broken or the engines
    did not come up in time. Start ipcluster by hand and pass its profile
    with `BIZ verify --ipcluster <profile>`.
    """
NO_IPCLUSTER_API = """
    No ipcluster instance found. Run 'ipcluster start' to initiate a local or
    remote cluster before passing an ipyparallel.Client to verify_theorem.
    """
LAUNCH_FAILED = """\
    Error launching ipcluster for parallelization:
    ({})
    """
