#!/usr/bin/python
# -*- coding: utf-8 -*-
#
# This file is part of Hardexec, distributed under the GNU GPLv3.

"""This is the entry point for Hardexec working in command line app mode"""

from __future__ import print_function
from __future__ import absolute_import
import argparse
import sys
import logging

from termcolor import colored

from . import HardexecError, ConfigError
from .action.commands import Commands
from .inject.injector import FAULT_MODELS
from .transforms.load_transform import HARDEN_MODES
from ._version import __version__


def hardexec(args):
    """This is the main function, where Hardexec starts.
    Here, we make the next processes:
        -- parse command and options
        -- set up logging
        -- run the selected command and map its errors to exit codes
    """
    parser = _get_parser()
    options = parser.parse_args(args)
    if options.command is None:
        parser.print_usage()
        sys.exit(2)

    try:
        set_logging_level(options)
        action = Commands(options)
        _action_runner(action)
    except HardexecError as e:
        _report(e, options)
        sys.exit(e.EXIT_CODE)
    except Exception as e:
        _report(e, options)
        sys.exit(1)


def _report(error, options):
    import traceback
    logging.error("%s: %s", type(error).__name__, error)
    if options.full_error:
        logging.error("Trace:")
        traceback.print_exc()


def _action_runner(action):
    """Function that decodes and executes the action selected by the user"""
    options = action.options
    if options.command == "config-help":
        action.config_help()
    elif options.command == "harden":
        action.harden()
    elif options.command == "run":
        action.run()
    elif options.command == "inject":
        action.inject()
    elif options.command == "simulate":
        action.simulate()
    elif options.command == "measure":
        action.measure()
    elif options.command == "cfg":
        action.generate_cfg()
    else:
        raise AssertionError


def _add_input(subparser):
    subparser.add_argument(
        "--input", dest="input", default=None,
        help="input vector: JSON array of integers, inline or in a file")


def _add_seed(subparser, required=False):
    subparser.add_argument(
        "--seed", dest="seed", type=int, default=None, required=required,
        help="seed of every random stream of the command")


def _get_parser():
    """This is the parser function, where options and commands are defined.
    """
    description = ("Harden programs of a small register IR against "
                   "transient faults, run them under a secure-container "
                   "envelope or overflow-tolerant memory, measure them with "
                   "fault-injection campaigns and simulate the recovery of "
                   "a replicated service.")
    parser = argparse.ArgumentParser("hardexec", description=description)
    subparsers = parser.add_subparsers(title="commands", dest="command")

    harden = subparsers.add_parser(
        "harden",
        help="write the hardened variant of an IR program")
    harden.add_argument(
        "--in", dest="input_file", required=True,
        help="IR program to harden")
    harden.add_argument(
        "--out", dest="output", default=None,
        help="hardened program path (default: <stem>.<mode>.ir)")
    harden.add_argument(
        "--mode", dest="mode", choices=HARDEN_MODES, default="haft",
        help="haft: lock-step + transactions, delta: encoded copies, "
             "both: delta then haft")
    harden.add_argument(
        "--region-blocks", dest="region_blocks", type=int, default=1,
        help="basic blocks per transactional region")
    harden.add_argument(
        "--max-retries", dest="max_retries", type=int, default=3,
        help="rollbacks allowed per region before giving up")
    _add_seed(harden)

    run = subparsers.add_parser(
        "run",
        help="execute an IR program and print its output")
    run.add_argument(
        "--in", dest="input_file", required=True,
        help="IR program to execute")
    _add_input(run)
    run.add_argument(
        "--enclave", dest="enclave", default=None,
        help="envelope configuration file; run inside the envelope")
    run.add_argument(
        "--boundless", dest="boundless", default=False, action="store_true",
        help="tolerate out-of-bounds accesses through an overflow table")
    run.add_argument(
        "--oob-log", dest="oob_log", default=None,
        help="JSON lines file for the overflow events (with --boundless)")
    run.add_argument(
        "--horizon", dest="horizon", type=int, default=4096,
        help="words past an object end tolerated by --boundless")
    run.add_argument(
        "--cap", dest="cap", type=int, default=65536,
        help="overflow table capacity of --boundless")
    run.add_argument(
        "--max-steps", dest="max_steps", type=int, default=None,
        help="dynamic instruction limit")
    run.add_argument(
        "--report", dest="report", default=None,
        help="JSON file for the execution result")
    _add_seed(run)

    inject = subparsers.add_parser(
        "inject",
        help="run a fault-injection campaign")
    inject.add_argument(
        "--in", dest="input_file", required=True,
        help="original IR program, the golden reference")
    inject.add_argument(
        "--hardened", dest="hardened", default=None,
        help="hardened variant to inject into")
    inject.add_argument(
        "--model", dest="model", choices=FAULT_MODELS, required=True,
        help="fault model")
    inject.add_argument(
        "--runs", dest="runs", type=int, default=1000,
        help="number of injected runs")
    inject.add_argument(
        "--report", dest="report", required=True,
        help="JSON campaign report")
    inject.add_argument(
        "--csv", dest="csv", default=None,
        help="flattened one-row CSV of the report")
    inject.add_argument(
        "--records", dest="records", default=None,
        help="CSV with one line per injected run")
    inject.add_argument(
        "--jobs", dest="jobs", type=int, default=1,
        help="worker processes")
    _add_input(inject)
    _add_seed(inject)

    simulate = subparsers.add_parser(
        "simulate",
        help="simulate crash recovery of a replicated service")
    simulate.add_argument(
        "--config", dest="config", required=True,
        help="cluster configuration file")
    simulate.add_argument(
        "--duration", dest="duration", type=float, default=None,
        help="simulated seconds, overrides the configuration")
    simulate.add_argument(
        "--report", dest="report", required=True,
        help="JSON simulation report")
    _add_seed(simulate)

    measure = subparsers.add_parser(
        "measure",
        help="overhead of a hardened program against its baseline")
    measure.add_argument(
        "--baseline", dest="baseline", required=True,
        help="baseline IR program")
    measure.add_argument(
        "--hardened", dest="hardened", required=True,
        help="hardened IR program")
    measure.add_argument(
        "--enclave", dest="enclave", default=None,
        help="run the hardened program inside this envelope configuration")
    measure.add_argument(
        "--report", dest="report", default=None,
        help="JSON file for the ratios")
    measure.add_argument(
        "--max-steps", dest="max_steps", type=int, default=None,
        help="dynamic instruction limit")
    _add_input(measure)
    _add_seed(measure)

    cfg = subparsers.add_parser(
        "cfg",
        help="write the basic-block graph of a program as JSON")
    cfg.add_argument(
        "--in", dest="input_file", required=True,
        help="IR program")
    cfg.add_argument(
        "--out", dest="output", required=True,
        help="JSON output file")
    cfg.add_argument(
        "--mode", dest="mode", default="blocks",
        help="set the working mode for the graph generator: "
             "(blocks, dfs, bfs)")

    subparsers.add_parser(
        "config-help",
        help="print configuration file variables description")

    parser.add_argument(
        '-v', '--version', action='version',
        help="print the version of this program",
        version="{} {}".format(parser.prog, __version__))
    parser.add_argument(
        "--log", dest="log", default="info",
        help="logging level: debug, info, warning, error, critical")
    parser.add_argument(
        "--logfile", dest="logfile", default=None,
        help="path to the optional log file")
    parser.add_argument(
        "--full-error", default=False, action="store_true", dest="full_error",
        help="display full error log with traceback")
    return parser


def set_logging_level(options):
    """Set the log level and config (A.K.A. log verbosity)"""
    numeric_level = getattr(logging, options.log.upper(), None)
    if not isinstance(numeric_level, int):
        raise ConfigError('Invalid log level: %s' % options.log)

    if options.logfile is None:
        logging.basicConfig(
            format=colored(
                "%(levelname)s",
                "yellow") + colored(
                "\t%(filename)s:%(lineno)d: %(funcName)s()\t",
                "blue") + "%(message)s",
            level=numeric_level)
    else:
        logging.basicConfig(
            format="%(levelname)s" +
                   "\t%(filename)s:%(lineno)d: %(funcName)s()\t" +
                   "%(message)s",
            level=numeric_level,
            filename=options.logfile)
    logging.debug(str(options))


def main():
    """Entry point used by the executable"""
    hardexec(sys.argv[1:])
