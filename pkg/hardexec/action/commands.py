# -*- coding: utf-8 -*-
#
# This file is part of Hardexec, distributed under the GNU GPLv3.

"""This module provides the commands reachable from the command line"""

from __future__ import print_function
import logging
import os

from .graph import ActionGraph
from ..boundless.memory import SafetyPolicy, run_boundless
from ..config.cluster_config import ClusterConfigParser, load_cluster_config
from ..config.envelope_config import (EnvelopeConfigParser,
                                      load_envelope_config)
from ..enclave.envelope import EnclaveEnvelope
from ..inject.campaign import CampaignConfig, run_campaign
from ..inject.injector import run_program
from ..orchestrator.simulator import ServiceSpec, simulate
from ..transforms.haft import HaftConfig
from ..transforms.load_transform import harden
from ..transforms.transform import instruction_ratio, marker_count
from ..util.report import write_json
from ..util.rng import stream, KEY_ENVELOPE


class Commands(ActionGraph):

    """Class that contains the methods for the hardexec commands"""

    def __init__(self, *args):
        super(Commands, self).__init__(*args)

    def harden(self):
        """Harden --in and write the canonical result"""
        options = self.options
        program = self.load_program(options.input_file)
        seed = None
        if options.mode in ('delta', 'both'):
            seed = self.require_seed("harden --mode %s" % options.mode)
        haft_cfg = HaftConfig(options.region_blocks, options.max_retries)
        hardened = harden(program, options.mode, seed=seed,
                          haft_cfg=haft_cfg)
        output = options.output
        if output is None:
            stem = os.path.splitext(options.input_file)[0]
            output = "%s.%s.ir" % (stem, options.mode)
        self.write_program(output, hardened)
        # static count, markers included; measure reports the dynamic ratio
        print("static ratio %.3f, %d markers" % (
            instruction_ratio(program, hardened), marker_count(hardened)))

    def _envelope(self, program, purpose):
        seed = self.require_seed(purpose)
        config = load_envelope_config(self.options.enclave)
        return EnclaveEnvelope.from_config(program, config,
                                           rng=stream(seed, KEY_ENVELOPE))

    def run(self):
        """Execute --in and print its output words"""
        options = self.options
        program = self.load_program(options.input_file)
        inputs = self.inputs()
        limits = self.limits()
        if options.boundless:
            policy = SafetyPolicy(options.horizon, options.cap)
            result, table = run_boundless(program, inputs, policy, limits)
            if options.oob_log:
                table.export(options.oob_log)
        elif options.enclave:
            envelope = self._envelope(program, "run --enclave")
            result = envelope.run(inputs, limits)
        else:
            result = run_program(program, inputs, limits)
        for word in result.output:
            print(word)
        if options.report:
            write_json(options.report, result.to_dict())
        logging.info("%s after %d instructions, %d cycles",
                     result.describe(), result.dyn_insts, result.cycles)
        self.require_halted(result, options.input_file)

    def inject(self):
        """Fault-injection campaign over --in (or its --hardened variant)"""
        options = self.options
        seed = self.require_seed("inject")
        program = self.load_program(options.input_file)
        hardened = None
        if options.hardened:
            hardened = self.load_program(options.hardened)
        cfg = CampaignConfig(program, seed, runs=options.runs,
                             model=options.model, inputs=self.inputs(),
                             hardened=hardened, jobs=options.jobs)
        report = run_campaign(cfg)
        report.write(options.report)
        if options.csv:
            report.write_csv(options.csv)
        if options.records:
            report.write_records(options.records)
        for outcome, rate in sorted(report.to_dict()['rates'].items()):
            print("%-9s %.4f" % (outcome, rate))

    def simulate(self):
        """Simulate the cluster of --config"""
        options = self.options
        seed = self.require_seed("simulate")
        config = load_cluster_config(options.config)
        spec = ServiceSpec.from_config(config)
        duration = options.duration
        if duration is None:
            duration = config['duration']
        report = simulate(spec, config['arrival_rate'], duration, seed)
        report.write(options.report)
        print("availability %.6f completed %d failed %d respawns %d" % (
            report.availability, report.completed, report.failed,
            report.respawns))

    def measure(self):
        """Overhead of --hardened against --baseline on one input"""
        options = self.options
        baseline = self.load_program(options.baseline)
        hardened = self.load_program(options.hardened)
        inputs = self.inputs()
        limits = self.limits()
        base = run_program(baseline, inputs, limits)
        if options.enclave:
            envelope = self._envelope(hardened, "measure --enclave")
            result = envelope.run(inputs, limits)
        else:
            result = run_program(hardened, inputs, limits)
        self.require_halted(base, options.baseline)
        self.require_halted(result, options.hardened)
        summary = {'dyn_inst_ratio': float(result.dyn_insts) / base.dyn_insts,
                   'cycle_ratio': float(result.cycles) / base.cycles,
                   'baseline': base.to_dict(),
                   'hardened': result.to_dict(),
                   'params': {'baseline': options.baseline,
                              'hardened': options.hardened,
                              'inputs': list(inputs),
                              'enclave': options.enclave}}
        print("dyn_inst_ratio %.3f cycle_ratio %.3f" % (
            summary['dyn_inst_ratio'], summary['cycle_ratio']))
        if options.report:
            write_json(options.report, summary)

    def config_help(self):
        """Print every configuration option"""
        EnvelopeConfigParser().help()
        print("")
        ClusterConfigParser().help()
