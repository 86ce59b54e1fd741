# -*- coding: utf-8 -*-
#
# This file is part of Hardexec, distributed under the GNU GPLv3.

"""Module providing single fault injections and outcome classification.

A fault is applied right before the interpreter executes dynamic step
`step` (1-based), through the interpreter's step hook."""

import logging

from .. import HardexecError, ConfigError
from ..ir.interpreter import ExecResult, Interpreter, wrap
from ..transforms.haft import run_protected

REG_BITFLIP = 'reg-bitflip'
MEM_BITFLIP = 'mem-bitflip'
OPCODE_CORRUPT = 'opcode-corrupt'
FAULT_MODELS = (REG_BITFLIP, MEM_BITFLIP, OPCODE_CORRUPT)

MASKED = 'Masked'
DETECTED = 'Detected'
SDC = 'SDC'
CRASHED = 'Crashed'
HANG = 'Hang'
OUTCOMES = (MASKED, DETECTED, SDC, CRASHED, HANG)

# Design-fault stand-in: every opcode with a partner of the same operand
# signature is swapped for it.
CORRUPTION_TABLE = {
    'add': 'sub', 'sub': 'add', 'mul': 'add', 'divs': 'mul',
    'and': 'or', 'or': 'xor', 'xor': 'and',
    'shl': 'shr', 'shr': 'shl',
    'eq': 'lt', 'lt': 'eq',
    'const': 'in', 'in': 'const',
    'emul': 'mul', 'deq': 'dlt', 'dlt': 'deq'}


class GoldenFailure(HardexecError):

    """The fault-free reference run did not halt"""

    EXIT_CODE = 4

    def __init__(self, result):
        super(GoldenFailure, self).__init__(
            "fault-free run ended %s, expected Halted" % result.describe())
        self.result = result


class FaultSpec(object):

    """One fault.  target is a register index (reg-bitflip), a (handle,
    offset) cell or an int picking among the cells present at the fault
    step (mem-bitflip), or the instruction index to corrupt, None for
    whichever instruction runs at step (opcode-corrupt)"""

    __slots__ = ('model', 'step', 'target', 'bit', 'persistent')

    def __init__(self, model, step, target=None, bit=0, persistent=False):
        if model not in FAULT_MODELS:
            raise ConfigError("unknown fault model '%s', expected one of %s"
                              % (model, ", ".join(FAULT_MODELS)))
        if step < 1:
            raise ConfigError("fault step must be >= 1, got %d" % step)
        if not 0 <= bit < 64:
            raise ConfigError("bit must be in 0..63, got %d" % bit)
        if model == REG_BITFLIP and not 0 <= target < 64:
            raise ConfigError("register r%s does not exist" % (target,))
        self.model = model
        self.step = step
        self.target = target
        self.bit = bit
        self.persistent = persistent

    def to_dict(self):
        target = self.target
        if isinstance(target, tuple):
            target = list(target)
        return {'model': self.model, 'step': self.step, 'target': target,
                'bit': self.bit, 'persistent': self.persistent}

    def __repr__(self):
        return "FaultSpec(%s, step=%d, target=%r, bit=%d%s)" % (
            self.model, self.step, self.target, self.bit,
            ", persistent" if self.persistent else "")


class FaultHook(object):

    """Step hook applying one FaultSpec"""

    def __init__(self, fault):
        self.fault = fault
        self.applied = False
        self.fault_pc = None
        self._seen_rollbacks = 0
        self._restore = None

    def __call__(self, interpreter, step):
        fault = self.fault
        if self._restore is not None:
            pc, original = self._restore
            interpreter.code[pc] = original
            self._restore = None
        if not self.applied:
            if step == fault.step:
                self.applied = True
                self.fault_pc = interpreter.state.pc
                self._seen_rollbacks = interpreter.state.rollbacks
                self._apply(interpreter)
            return
        if fault.persistent and fault.model == REG_BITFLIP:
            state = interpreter.state
            # re-strike at the same point of every re-execution
            if state.rollbacks > self._seen_rollbacks \
                    and state.pc == self.fault_pc:
                self._seen_rollbacks = state.rollbacks
                self._flip_register(interpreter)

    def _apply(self, interpreter):
        model = self.fault.model
        if model == REG_BITFLIP:
            self._flip_register(interpreter)
        elif model == MEM_BITFLIP:
            self._flip_memory(interpreter)
        else:
            self._corrupt_opcode(interpreter)

    def _flip_register(self, interpreter):
        regs = interpreter.state.regs
        reg = self.fault.target
        regs[reg] = wrap(regs[reg] ^ (1 << self.fault.bit))

    def _flip_memory(self, interpreter):
        target = self.fault.target
        if isinstance(target, tuple):
            handle, offset = target
        else:
            cells = sorted((handle, offset) for handle, obj
                           in interpreter.state.memory.objects.items()
                           for offset in obj.cells)
            if not cells:
                logging.debug("no memory cell at step %d, fault dropped",
                              self.fault.step)
                return
            handle, offset = cells[target % len(cells)]
        value = interpreter.peek(handle, offset) or 0
        interpreter.poke(handle, offset, wrap(value ^ (1 << self.fault.bit)))

    def _corrupt_opcode(self, interpreter):
        pc = self.fault.target
        if pc is None:
            pc = interpreter.state.pc
        if not 0 <= pc < len(interpreter.code):
            return
        opcode, operands = interpreter.code[pc]
        partner = CORRUPTION_TABLE.get(opcode)
        if partner is None:
            logging.debug("opcode '%s' has no corruption partner", opcode)
            return
        interpreter.code[pc] = (partner, operands)
        if not self.fault.persistent:
            self._restore = (pc, (opcode, operands))


def run_program(program, inputs=(), limits=None, **hooks):
    """Execute program, with transactional recovery when it carries the
    lock-step header"""
    if 'haft' in program.header:
        return run_protected(program, inputs, limits=limits, **hooks)
    return Interpreter(program, inputs, limits, **hooks).run()


def golden_run(program, inputs=(), limits=None):
    """Fault-free reference run.  Raise GoldenFailure unless it halts"""
    result = run_program(program, inputs, limits)
    if not result.halted:
        logging.error("golden run failed: %s", result.describe())
        raise GoldenFailure(result)
    return result


def trace_opcodes(program, inputs=(), limits=None):
    """Opcode executed at every dynamic step of a fault-free run"""
    trace = []

    def record(interpreter, step):
        trace.append(interpreter.code[interpreter.state.pc][0])

    run_program(program, inputs, limits, step_hook=record)
    return trace


def inject_run(program, inputs, fault, limits=None, **hooks):
    """Execute program with fault applied.  Never raises for anything the
    faulty run does"""
    return run_program(program, inputs, limits, step_hook=FaultHook(fault),
                       **hooks)


def classify(result, golden):
    """Outcome class of a faulty run against the golden result"""
    if result.status == ExecResult.HALTED:
        if result.output == golden.output:
            return MASKED
        return SDC
    if result.status == ExecResult.DETECTED:
        return DETECTED
    if result.status == ExecResult.CRASHED:
        return CRASHED
    return HANG
