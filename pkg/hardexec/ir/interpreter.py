# -*- coding: utf-8 -*-
#
# This file is part of Hardexec, distributed under the GNU GPLv3.

"""Module providing the cycle-accounting interpreter.

Every transform, campaign and envelope runs programs through this one
machine.  Hooks let the other packages observe or change a run without
the interpreter knowing about them:

  mem_hooks   replaces the load/store path (overflow-tolerant memory)
  cost_hooks  adds cycle surcharges to load/store/alloc (EPC paging)
  tx          transaction unit honouring txbegin/txend and check rollback
  step_hook   called before every dynamic step (fault injection)
  gate        service-call gate consulted by out/dout
"""

import logging

from .. import ConfigError
from ..encoding.an_code import check_pair, exact_product
from .instruction import OPCODES, NUM_REGS, LOGICAL_REGS

MASK = (1 << 64) - 1
SIGN_BIT = 1 << 63


def wrap(value):
    """Reduce an integer to a signed 64-bit two's-complement word"""
    value &= MASK
    if value & SIGN_BIT:
        return value - (1 << 64)
    return value


class MachineCrash(Exception):

    """Signal raised inside a run for a trap; becomes Crashed(trap)"""

    def __init__(self, trap):
        super(MachineCrash, self).__init__(trap)
        self.trap = trap


class MachineDetect(Exception):

    """Signal raised inside a run for a detected error; becomes
    Detected(reason)"""

    def __init__(self, reason):
        super(MachineDetect, self).__init__(reason)
        self.reason = reason


class Limits(object):

    """Bounds on a single run"""

    def __init__(self, max_steps=10000000):
        if max_steps <= 0:
            raise ConfigError("max_steps must be positive, got %d"
                              % max_steps)
        self.max_steps = max_steps

    def __repr__(self):
        return "Limits(max_steps=%d)" % self.max_steps


class ExecResult(object):

    """Observable outcome of a run"""

    HALTED = 'Halted'
    DETECTED = 'Detected'
    CRASHED = 'Crashed'
    HANG = 'HangLimit'

    def __init__(self, status, output=(), dyn_insts=0, cycles=0,
                 reason=None, rollbacks=0):
        self.status = status
        self.output = tuple(output)
        self.dyn_insts = dyn_insts
        self.cycles = cycles
        self.reason = reason
        self.rollbacks = rollbacks

    @property
    def halted(self):
        """True for a normal termination"""
        return self.status == ExecResult.HALTED

    def describe(self):
        """Status with its reason, e.g. 'Crashed(div-by-zero)'"""
        if self.reason is None:
            return self.status
        return "%s(%s)" % (self.status, self.reason)

    def to_dict(self):
        return {'status': self.status,
                'reason': self.reason,
                'output': list(self.output),
                'dyn_insts': self.dyn_insts,
                'cycles': self.cycles,
                'rollbacks': self.rollbacks}

    def __eq__(self, other):
        return (isinstance(other, ExecResult)
                and self.to_dict() == other.to_dict())

    def __ne__(self, other):
        return not self.__eq__(other)

    def __repr__(self):
        return "<ExecResult %s output=%r dyn=%d cycles=%d>" % (
            self.describe(), list(self.output), self.dyn_insts, self.cycles)


class MemObject(object):

    """One allocated object: declared size in words and its written cells"""

    __slots__ = ('size', 'cells')

    def __init__(self, size):
        self.size = size
        self.cells = {}


class Memory(object):

    """Object/offset addressed memory.  Handles are issued monotonically"""

    def __init__(self):
        self.objects = {}
        self.next_handle = 1

    def alloc(self, size):
        handle = self.next_handle
        self.next_handle += 1
        self.objects[handle] = MemObject(size)
        return handle

    def get(self, handle):
        return self.objects.get(handle)

    def peek(self, handle, offset):
        """Raw cell value, None when never written or the handle is
        unknown"""
        obj = self.objects.get(handle)
        if obj is None:
            return None
        return obj.cells.get(offset)

    def poke(self, handle, offset, value):
        """Raw cell write; None erases the cell"""
        obj = self.objects.get(handle)
        if obj is None:
            return
        if value is None:
            obj.cells.pop(offset, None)
        else:
            obj.cells[offset] = value

    def drop_from(self, handle):
        """Forget every object issued at or after handle and rewind the
        handle counter to it"""
        for stale in [h for h in self.objects if h >= handle]:
            del self.objects[stale]
        self.next_handle = handle

    def snapshot(self):
        return (self.next_handle,
                tuple((handle, obj.size, tuple(sorted(obj.cells.items())))
                      for handle, obj in sorted(self.objects.items())))


class MachineState(object):

    """Registers, memory, input/output and the step counters of one run"""

    def __init__(self, inputs=()):
        self.regs = [0] * NUM_REGS
        self.memory = Memory()
        self.inputs = tuple(inputs)
        self.output = []
        self.pc = 0
        self.cycles = 0
        self.dyn_insts = 0
        self.rollbacks = 0
        self.halted = False

    def snapshot(self):
        """Comparable image of the architectural state"""
        return (tuple(self.regs), self.memory.snapshot(), tuple(self.output),
                self.pc)


class Interpreter(object):

    """Single-threaded machine executing one program on one input"""

    def __init__(self, program, inputs=(), limits=None, mem_hooks=None,
                 cost_hooks=None, tx=None, step_hook=None, gate=None):
        self.program = program
        # Private decoded copy: persistent opcode faults patch this list,
        # never the program.
        self.code = [(ins.opcode, ins.operands)
                     for ins in program.instructions]
        self.limits = limits or Limits()
        self.mem_hooks = mem_hooks
        self.cost_hooks = cost_hooks
        self.tx = tx
        self.step_hook = step_hook
        self.gate = gate
        self.state = MachineState(inputs)
        self.state.pc = program.entry
        params = program.delta_params
        if params is None:
            self._consts = None
        else:
            self._consts = [params[0]] * LOGICAL_REGS + \
                [params[1]] * LOGICAL_REGS
        self._handlers = dict((name, getattr(self, '_op_' + name))
                              for name in OPCODES)
        if mem_hooks is not None:
            mem_hooks.attach(self.state)
        if tx is not None:
            tx.attach(self)

    # -- driving ---------------------------------------------------------

    def step(self):
        """Execute one instruction.  MachineCrash and MachineDetect
        propagate to the caller"""
        state = self.state
        pc = state.pc
        if not 0 <= pc < len(self.code):
            raise MachineCrash('pc-out-of-range')
        if self.step_hook is not None:
            self.step_hook(self, state.dyn_insts + 1)
        opcode, operands = self.code[pc]
        state.dyn_insts += 1
        state.cycles += 1
        try:
            next_pc = self._handlers[opcode](pc, operands)
        except MachineCrash as crash:
            # a trap inside an open region aborts it like a failed check
            if self.tx is None or not self.tx.active:
                raise
            next_pc = self.tx.on_trap(self, crash)
        if next_pc is None:
            state.halted = True
        else:
            state.pc = next_pc

    def run(self):
        """Run to halt, trap, detection or the step limit"""
        state = self.state
        max_steps = self.limits.max_steps
        try:
            while not state.halted:
                if state.dyn_insts >= max_steps:
                    return self._result(ExecResult.HANG)
                self.step()
        except MachineCrash as crash:
            logging.debug("crashed at pc %d: %s", state.pc, crash.trap)
            return self._result(ExecResult.CRASHED, crash.trap)
        except MachineDetect as detect:
            logging.debug("detected at pc %d: %s", state.pc, detect.reason)
            return self._result(ExecResult.DETECTED, detect.reason)
        return self._result(ExecResult.HALTED)

    def _result(self, status, reason=None):
        state = self.state
        return ExecResult(status, state.output, state.dyn_insts, state.cycles,
                          reason, state.rollbacks)

    # -- services used by handlers and hooks ------------------------------

    def check_failed(self, reason):
        """A check instruction failed.  Return the pc to resume at when the
        transaction unit rolled back, otherwise fail-stop"""
        if self.tx is not None:
            return self.tx.on_check_failure(self, reason)
        raise MachineDetect(reason)

    def peek(self, handle, offset):
        if self.mem_hooks is not None:
            return self.mem_hooks.peek(self.state, handle, offset)
        return self.state.memory.peek(handle, offset)

    def poke(self, handle, offset, value):
        if self.mem_hooks is not None:
            self.mem_hooks.poke(self.state, handle, offset, value)
        else:
            self.state.memory.poke(handle, offset, value)

    def load_word(self, handle, offset):
        if self.cost_hooks is not None:
            self.state.cycles += self.cost_hooks.surcharge(
                'load', handle, offset)
        if self.mem_hooks is not None:
            return self.mem_hooks.load(self.state, handle, offset)
        obj = self.state.memory.get(handle)
        if obj is None:
            raise MachineCrash('invalid-handle')
        if not 0 <= offset < obj.size:
            raise MachineCrash('out-of-bounds')
        return obj.cells.get(offset, 0)

    def store_word(self, handle, offset, value):
        if self.cost_hooks is not None:
            self.state.cycles += self.cost_hooks.surcharge(
                'store', handle, offset)
        logging_tx = self.tx is not None and self.tx.active
        if self.mem_hooks is not None:
            if logging_tx:
                self.tx.log_write(handle, offset,
                                  self.mem_hooks.peek(self.state, handle,
                                                      offset))
            self.mem_hooks.store(self.state, handle, offset, value)
            return
        obj = self.state.memory.get(handle)
        if obj is None:
            raise MachineCrash('invalid-handle')
        if not 0 <= offset < obj.size:
            raise MachineCrash('out-of-bounds')
        if logging_tx:
            self.tx.log_write(handle, offset, obj.cells.get(offset))
        obj.cells[offset] = value

    def alloc_object(self, size):
        if size < 0:
            raise MachineCrash('bad-alloc-size')
        handle = self.state.memory.alloc(size)
        if self.cost_hooks is not None:
            self.state.cycles += self.cost_hooks.surcharge('alloc', handle, 0)
        return handle

    def emit(self, value):
        if self.gate is not None and not self.gate('out'):
            raise MachineDetect('denied-syscall')
        self.state.output.append(value)

    def _const(self, reg):
        if self._consts is None:
            raise MachineCrash('missing-delta-header')
        return self._consts[reg]

    def _decoded(self, reg):
        """Functional value of logical pair reg, from its copy-1 word"""
        return self.state.regs[reg] // self._const(reg)

    def _encode_pair(self, reg, value):
        regs = self.state.regs
        regs[reg] = wrap(self._const(reg) * value)
        regs[reg + LOGICAL_REGS] = wrap(
            self._const(reg + LOGICAL_REGS) * value)

    # -- base instruction set ---------------------------------------------

    def _op_const(self, pc, ops):
        self.state.regs[ops[0]] = ops[1]
        return pc + 1

    def _op_mov(self, pc, ops):
        regs = self.state.regs
        regs[ops[0]] = regs[ops[1]]
        return pc + 1

    def _op_add(self, pc, ops):
        regs = self.state.regs
        regs[ops[0]] = wrap(regs[ops[1]] + regs[ops[2]])
        return pc + 1

    def _op_sub(self, pc, ops):
        regs = self.state.regs
        regs[ops[0]] = wrap(regs[ops[1]] - regs[ops[2]])
        return pc + 1

    def _op_mul(self, pc, ops):
        regs = self.state.regs
        regs[ops[0]] = wrap(regs[ops[1]] * regs[ops[2]])
        return pc + 1

    def _op_divs(self, pc, ops):
        regs = self.state.regs
        dividend, divisor = regs[ops[1]], regs[ops[2]]
        if divisor == 0:
            raise MachineCrash('div-by-zero')
        quotient = abs(dividend) // abs(divisor)
        if (dividend < 0) != (divisor < 0):
            quotient = -quotient
        regs[ops[0]] = wrap(quotient)
        return pc + 1

    def _op_and(self, pc, ops):
        regs = self.state.regs
        regs[ops[0]] = regs[ops[1]] & regs[ops[2]]
        return pc + 1

    def _op_or(self, pc, ops):
        regs = self.state.regs
        regs[ops[0]] = regs[ops[1]] | regs[ops[2]]
        return pc + 1

    def _op_xor(self, pc, ops):
        regs = self.state.regs
        regs[ops[0]] = regs[ops[1]] ^ regs[ops[2]]
        return pc + 1

    def _op_shl(self, pc, ops):
        regs = self.state.regs
        regs[ops[0]] = wrap(regs[ops[1]] << (regs[ops[2]] & 63))
        return pc + 1

    def _op_shr(self, pc, ops):
        # logical shift
        regs = self.state.regs
        regs[ops[0]] = wrap((regs[ops[1]] & MASK) >> (regs[ops[2]] & 63))
        return pc + 1

    def _op_eq(self, pc, ops):
        regs = self.state.regs
        regs[ops[0]] = 1 if regs[ops[1]] == regs[ops[2]] else 0
        return pc + 1

    def _op_lt(self, pc, ops):
        regs = self.state.regs
        regs[ops[0]] = 1 if regs[ops[1]] < regs[ops[2]] else 0
        return pc + 1

    def _op_br(self, pc, ops):
        if self.state.regs[ops[0]] != 0:
            return ops[1]
        return pc + 1

    def _op_jmp(self, pc, ops):
        return ops[0]

    def _op_alloc(self, pc, ops):
        regs = self.state.regs
        regs[ops[0]] = self.alloc_object(regs[ops[1]])
        return pc + 1

    def _op_load(self, pc, ops):
        regs = self.state.regs
        regs[ops[0]] = self.load_word(regs[ops[1]], regs[ops[2]])
        return pc + 1

    def _op_store(self, pc, ops):
        regs = self.state.regs
        self.store_word(regs[ops[0]], regs[ops[1]], regs[ops[2]])
        return pc + 1

    def _op_in(self, pc, ops):
        inputs = self.state.inputs
        index = ops[1]
        if 0 <= index < len(inputs):
            self.state.regs[ops[0]] = wrap(inputs[index])
        else:
            # corrupted opcodes turn const into in; keep campaigns quiet
            log = logging.debug if self.step_hook is not None \
                else logging.warning
            log("input index %d out of range (%d words), reading 0",
                index, len(inputs))
            self.state.regs[ops[0]] = 0
        return pc + 1

    def _op_out(self, pc, ops):
        self.emit(self.state.regs[ops[0]])
        return pc + 1

    def _op_halt(self, pc, ops):
        return None

    # -- lock-step pseudo-instructions ------------------------------------

    def _op_txbegin(self, pc, ops):
        if self.tx is not None:
            self.tx.begin(self, pc + 1)
        return pc + 1

    def _op_txend(self, pc, ops):
        if self.tx is not None:
            resume = self.tx.end(self, pc)
            if resume is not None:
                return resume
        return pc + 1

    def _op_chk(self, pc, ops):
        regs = self.state.regs
        if regs[ops[0]] != regs[ops[1]]:
            return self.check_failed('check-divergence')
        return pc + 1

    # -- encoded-processing pseudo-instructions ---------------------------

    def _op_enc(self, pc, ops):
        regs = self.state.regs
        regs[ops[0]] = wrap(regs[ops[0]] * self._const(ops[0]))
        return pc + 1

    def _op_emul(self, pc, ops):
        regs = self.state.regs
        product = exact_product(regs[ops[1]], regs[ops[2]],
                                self._const(ops[0]))
        if product is None:
            return self.check_failed('code-violation:exact-division')
        regs[ops[0]] = wrap(product)
        return pc + 1

    def _op_dchk(self, pc, ops):
        regs = self.state.regs
        reg = ops[0]
        copy2 = reg + LOGICAL_REGS
        reason = check_pair(regs[reg], regs[copy2], self._const(reg),
                            self._const(copy2))
        if reason is not None:
            return self.check_failed('code-violation:' + reason)
        return pc + 1

    def _op_deq(self, pc, ops):
        equal = self._decoded(ops[1]) == self._decoded(ops[2])
        self._encode_pair(ops[0], 1 if equal else 0)
        return pc + 1

    def _op_dlt(self, pc, ops):
        less = self._decoded(ops[1]) < self._decoded(ops[2])
        self._encode_pair(ops[0], 1 if less else 0)
        return pc + 1

    def _op_dbr(self, pc, ops):
        if self._decoded(ops[0]) != 0:
            return ops[1]
        return pc + 1

    def _op_dout(self, pc, ops):
        self.emit(self._decoded(ops[0]))
        return pc + 1

    def _op_dalloc(self, pc, ops):
        handle = self.alloc_object(2 * self._decoded(ops[1]))
        self._encode_pair(ops[0], handle)
        return pc + 1

    def _op_dload(self, pc, ops):
        regs = self.state.regs
        handle = self._decoded(ops[1])
        offset = 2 * self._decoded(ops[2])
        regs[ops[0]] = self.load_word(handle, offset)
        regs[ops[0] + LOGICAL_REGS] = self.load_word(handle, offset + 1)
        return pc + 1

    def _op_dstore(self, pc, ops):
        regs = self.state.regs
        handle = self._decoded(ops[0])
        offset = 2 * self._decoded(ops[1])
        self.store_word(handle, offset, regs[ops[2]])
        self.store_word(handle, offset + 1, regs[ops[2] + LOGICAL_REGS])
        return pc + 1


def execute(program, inputs=(), limits=None, mem_hooks=None, cost_hooks=None,
            **hooks):
    """Run program on inputs and return its ExecResult.  Never raises for
    anything the program does"""
    return Interpreter(program, inputs, limits, mem_hooks, cost_hooks,
                       **hooks).run()
