# -*- coding: utf-8 -*-
#
# This file is part of Hardexec, distributed under the GNU GPLv3.

"""Module providing seeded fault-injection campaigns and their reports"""

import collections
import logging
from concurrent.futures import ProcessPoolExecutor

from .. import ConfigError
from ..ir.interpreter import Limits
from ..ir.instruction import NUM_REGS
from ..util.report import write_json, write_csv_row, write_csv_rows
from ..util.rng import stream, check_seed, KEY_CAMPAIGN
from .injector import (FaultSpec, CORRUPTION_TABLE, FAULT_MODELS, OUTCOMES,
                       MASKED, REG_BITFLIP, MEM_BITFLIP, OPCODE_CORRUPT,
                       classify, golden_run, inject_run, trace_opcodes)

HANG_FACTOR = 10
# mem-bitflip picks are reduced modulo the live cell count at the fault step
PICK_RANGE = 1 << 31

DISTRIBUTIONS = {
    REG_BITFLIP: {'step': 'uniform over golden dynamic steps',
                  'register': 'uniform over r0..r63',
                  'bit': 'uniform over 0..63'},
    MEM_BITFLIP: {'step': 'uniform over golden dynamic steps',
                  'cell': 'uniform over cells present at the step',
                  'bit': 'uniform over 0..63'},
    OPCODE_CORRUPT: {'step': 'uniform over steps with a corruptible opcode',
                     'opcode': 'fixed corruption table'}}


class CampaignConfig(object):

    """Everything a campaign depends on.  The seed fixes every fault"""

    def __init__(self, program, seed, runs=1000, model=REG_BITFLIP,
                 inputs=(), hardened=None, hang_factor=HANG_FACTOR, jobs=1):
        if runs < 1:
            raise ConfigError("a campaign needs runs >= 1, got %d" % runs)
        if model not in FAULT_MODELS:
            raise ConfigError("unknown fault model '%s'" % model)
        if hang_factor < 1:
            raise ConfigError("hang_factor must be >= 1")
        if jobs < 1:
            raise ConfigError("jobs must be >= 1")
        self.program = program
        self.seed = check_seed(seed)
        self.runs = runs
        self.model = model
        self.inputs = tuple(inputs)
        self.hardened = hardened
        self.hang_factor = hang_factor
        self.jobs = jobs

    @property
    def target(self):
        """The variant faults are injected into"""
        if self.hardened is not None:
            return self.hardened
        return self.program


class CampaignReport(object):

    """Outcome counts and overhead ratios of one campaign"""

    def __init__(self, params, seed, counts, recovered, overhead,
                 records=None):
        self.params = params
        self.seed = seed
        self.counts = dict((outcome, counts.get(outcome, 0))
                           for outcome in OUTCOMES)
        self.recovered = recovered
        self.overhead = overhead
        self.records = records or []

    @property
    def runs(self):
        return sum(self.counts.values())

    def rate(self, outcome):
        return float(self.counts[outcome]) / self.runs

    @property
    def manifested(self):
        """Runs whose fault changed the course of execution: everything
        but the masked runs that needed no rollback"""
        return self.runs - (self.counts[MASKED] - self.recovered)

    def breakdown(self):
        unaffected = self.counts[MASKED] - self.recovered
        manifested = self.manifested
        rates_manifested = {}
        for outcome in OUTCOMES:
            count = self.counts[outcome]
            if outcome == MASKED:
                count = self.recovered
            rates_manifested[outcome.lower()] = (
                float(count) / manifested if manifested else 0.0)
        return {'masked_unaffected': unaffected,
                'masked_recovered': self.recovered,
                'manifested': manifested,
                'rates_injected': dict(
                    (outcome.lower(), self.rate(outcome))
                    for outcome in OUTCOMES),
                'rates_manifested': rates_manifested}

    def to_dict(self):
        return {'params': self.params,
                'seed': self.seed,
                'runs': self.runs,
                'counts': dict((outcome.lower(), self.counts[outcome])
                               for outcome in OUTCOMES),
                'rates': dict((outcome.lower(), self.rate(outcome))
                              for outcome in OUTCOMES),
                'breakdown': self.breakdown(),
                'overhead': self.overhead}

    def write(self, path):
        write_json(path, self.to_dict())

    def write_csv(self, path):
        write_csv_row(path, self.to_dict())

    def write_records(self, path):
        """Per-run CSV: the fault, its outcome and the rollbacks it caused"""
        fieldnames = ['index', 'model', 'step', 'target', 'bit', 'outcome',
                      'rollbacks']
        write_csv_rows(path, self.records, fieldnames)


def draw_fault(rng, model, dyn_insts, corruptible=None):
    """One uniformly drawn fault for a run of dyn_insts steps"""
    if model == OPCODE_CORRUPT:
        step = int(corruptible[rng.integers(len(corruptible))])
        return FaultSpec(model, step)
    step = int(rng.integers(1, dyn_insts + 1))
    if model == REG_BITFLIP:
        register = int(rng.integers(NUM_REGS))
        return FaultSpec(model, step, register, int(rng.integers(64)))
    pick = int(rng.integers(PICK_RANGE))
    return FaultSpec(model, step, pick, int(rng.integers(64)))


def _execute_one(job):
    """Run one injection; module level so worker processes can pickle it"""
    index, target, inputs, fault, max_steps, golden = job
    result = inject_run(target, inputs, fault, Limits(max_steps))
    return {'index': index, 'model': fault.model, 'step': fault.step,
            'target': fault.target, 'bit': fault.bit,
            'outcome': classify(result, golden),
            'rollbacks': result.rollbacks}


def _execute(jobs, workers):
    """Run the jobs, preserving their order"""
    total = len(jobs)
    tick = max(1, total // 10)
    records = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            for record in executor.map(_execute_one, jobs,
                                       chunksize=max(1, tick // workers)):
                records.append(record)
                if len(records) % tick == 0:
                    logging.info("campaign progress %d/%d", len(records),
                                 total)
        return records
    for job in jobs:
        records.append(_execute_one(job))
        if len(records) % tick == 0:
            logging.info("campaign progress %d/%d", len(records), total)
    return records


def _overhead(golden_program, golden_target):
    return {'dyn_inst_ratio': float(golden_target.dyn_insts)
            / golden_program.dyn_insts,
            'cycle_ratio': float(golden_target.cycles)
            / golden_program.cycles}


def _summarize(params, seed, records, overhead):
    counts = collections.Counter(record['outcome'] for record in records)
    recovered = sum(1 for record in records
                    if record['outcome'] == MASKED and record['rollbacks'])
    return CampaignReport(params, seed, counts, recovered, overhead, records)


def _params(program, target, model, inputs, hang_cap, extra):
    params = {'model': model,
              'inputs': list(inputs),
              'hang_cap': hang_cap,
              'program_instructions': len(program),
              'target_instructions': len(target),
              'target_header': dict((name, dict(fields)) for name, fields
                                    in sorted(target.header.items())),
              'distribution': DISTRIBUTIONS[model]}
    params.update(extra)
    return params


def run_campaign(cfg):
    """Inject cfg.runs seeded faults into cfg.target and classify them
    against the golden run.  GoldenFailure propagates"""
    golden_program = golden_run(cfg.program, cfg.inputs)
    target = cfg.target
    golden = golden_run(target, cfg.inputs) if cfg.hardened is not None \
        else golden_program
    hang_cap = cfg.hang_factor * golden.dyn_insts
    corruptible = None
    if cfg.model == OPCODE_CORRUPT:
        trace = trace_opcodes(target, cfg.inputs)
        corruptible = [step for step, opcode in enumerate(trace, 1)
                       if opcode in CORRUPTION_TABLE]
        if not corruptible:
            raise ConfigError("no executed opcode has a corruption partner")
    logging.info("campaign: %d %s runs, hang cap %d steps", cfg.runs,
                 cfg.model, hang_cap)
    jobs = []
    for index in range(cfg.runs):
        rng = stream(cfg.seed, KEY_CAMPAIGN, index)
        fault = draw_fault(rng, cfg.model, golden.dyn_insts, corruptible)
        jobs.append((index, target, cfg.inputs, fault, hang_cap, golden))
    records = _execute(jobs, cfg.jobs)
    params = _params(cfg.program, target, cfg.model, cfg.inputs, hang_cap,
                     {'runs': cfg.runs, 'hardened': cfg.hardened is not None})
    return _summarize(params, cfg.seed, records,
                      _overhead(golden_program, golden))


def run_exhaustive(program, inputs=(), hardened=None, steps=None,
                   registers=None, bits=None, jobs=1):
    """Enumerate every reg-bitflip over steps x registers x bits (all of
    them by default) and classify each"""
    golden_program = golden_run(program, inputs)
    target = hardened if hardened is not None else program
    golden = golden_run(target, inputs) if hardened is not None \
        else golden_program
    hang_cap = HANG_FACTOR * golden.dyn_insts
    steps = list(steps or range(1, golden.dyn_insts + 1))
    registers = list(registers if registers is not None else range(NUM_REGS))
    bits = list(bits if bits is not None else range(64))
    work = []
    for step in steps:
        for register in registers:
            for bit in bits:
                fault = FaultSpec(REG_BITFLIP, step, register, bit)
                work.append((len(work), target, tuple(inputs), fault,
                             hang_cap, golden))
    logging.info("exhaustive enumeration of %d faults", len(work))
    records = _execute(work, jobs)
    params = _params(program, target, REG_BITFLIP, inputs, hang_cap,
                     {'runs': len(work), 'hardened': hardened is not None,
                      'exhaustive': True})
    return _summarize(params, None, records,
                      _overhead(golden_program, golden))
