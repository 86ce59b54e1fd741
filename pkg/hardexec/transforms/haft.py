# -*- coding: utf-8 -*-
#
# This file is part of Hardexec, distributed under the GNU GPLv3.

"""Software lock-step with transactional rollback.

The transform runs every computation twice, in a master bank (rK) and a
shadow bank (rK+32), and compares the two banks right before each
externally visible effect: a store, a branch or an output.  Basic blocks
are grouped into transaction regions; the transaction unit checkpoints
the machine at txbegin so that a failed check inside a region rolls the
region back and re-executes it instead of stopping.

A region commits at txend only if the two banks agree in every register
pair still live after the commit.  A flip that no chk saw is then undone
with its region instead of being carried into the next checkpoint, where
no retry could remove it."""

import logging

from .. import ConfigError
from ..ir.instruction import BASE_OPCODES, DELTA_OPCODES, LOGICAL_REGS
from ..ir.interpreter import Interpreter, MachineDetect
from ..ir.program import basic_blocks
from .transform import Transform, TransformError, emit, shadow

CHECK_POINTS = frozenset(['store', 'branch', 'out', 'halt'])

# duplicated once per bank
DUPLICATED = frozenset(['const', 'mov', 'add', 'sub', 'mul', 'divs', 'and',
                        'or', 'xor', 'shl', 'shr', 'eq', 'lt', 'load', 'in'])


class HaftConfig(object):

    """Region size and retry budget of the lock-step transform"""

    def __init__(self, region_blocks=1, max_retries=3):
        if region_blocks < 1:
            raise ConfigError("region_blocks must be >= 1, got %d"
                              % region_blocks)
        if max_retries < 1:
            raise ConfigError("max_retries must be >= 1, got %d"
                              % max_retries)
        self.region_blocks = region_blocks
        self.max_retries = max_retries
        self.check_points = CHECK_POINTS

    @classmethod
    def from_header(cls, program):
        """Configuration recorded in a hardened program, default if none"""
        fields = program.header.get('haft')
        if fields is None:
            return cls()
        return cls(fields['region_blocks'], fields['max_retries'])

    def __repr__(self):
        return "HaftConfig(region_blocks=%d, max_retries=%d)" % (
            self.region_blocks, self.max_retries)


class TxCheckpoint(object):

    """Machine image taken at txbegin plus the undo log of the region"""

    def __init__(self, state, pc_at_begin):
        self.regs_snapshot = list(state.regs)
        self.mem_writelog = []
        self.pc_at_begin = pc_at_begin
        self.next_handle = state.memory.next_handle
        self.output_cursor = len(state.output)


def banks_diverge(state, live):
    """True when a register pair live past the commit disagrees"""
    regs = state.regs
    for reg in live:
        master = reg % LOGICAL_REGS
        if regs[master] != regs[master + LOGICAL_REGS]:
            return True
    return False


class TransactionUnit(object):

    """Emulated transactional memory honouring txbegin/txend/check
    failures for one interpreter"""

    def __init__(self, cfg):
        self.cfg = cfg
        self.checkpoint = None
        self.retries = 0
        self.compare_banks = True

    @property
    def active(self):
        return self.checkpoint is not None

    def attach(self, interpreter):
        self.checkpoint = None
        self.retries = 0
        # encoded banks hold two different codewords; dchk checks those
        self.compare_banks = interpreter.program.delta_params is None

    def begin(self, interpreter, pc_at_begin):
        # an open region commits when the next one begins
        self.checkpoint = TxCheckpoint(interpreter.state, pc_at_begin)
        self.retries = 0

    def end(self, interpreter, pc):
        """Commit the region closed by the txend at pc.  Return the pc to
        resume at when the banks disagree and the region was rolled back
        instead"""
        if self.active and self.compare_banks and banks_diverge(
                interpreter.state, interpreter.program.live_in(pc + 1)):
            return self.on_check_failure(interpreter, 'check-divergence')
        self.checkpoint = None
        return None

    def log_write(self, handle, offset, old):
        self.checkpoint.mem_writelog.append((handle, offset, old))

    def rollback(self, interpreter):
        """Restore the checkpointed image.  Return the pc to resume at"""
        checkpoint = self.checkpoint
        state = interpreter.state
        state.regs[:] = checkpoint.regs_snapshot
        for handle, offset, old in reversed(checkpoint.mem_writelog):
            interpreter.poke(handle, offset, old)
        del checkpoint.mem_writelog[:]
        state.memory.drop_from(checkpoint.next_handle)
        del state.output[checkpoint.output_cursor:]
        state.rollbacks += 1
        logging.debug("rollback #%d to pc %d", self.retries,
                      checkpoint.pc_at_begin)
        return checkpoint.pc_at_begin

    def on_trap(self, interpreter, crash):
        """Abort the open region on a trap.  Re-raise crash once the retry
        budget is spent"""
        if self.retries >= self.cfg.max_retries:
            raise crash
        logging.debug("trap %s inside a region", crash.trap)
        self.retries += 1
        return self.rollback(interpreter)

    def on_check_failure(self, interpreter, reason):
        if not self.active:
            raise MachineDetect(reason)
        if self.retries >= self.cfg.max_retries:
            logging.info("%s persists after %d retries, stopping", reason,
                         self.retries)
            raise MachineDetect(reason)
        self.retries += 1
        return self.rollback(interpreter)


class HaftTransform(Transform):

    """Lock-step duplication with transaction regions.  A program already
    carrying the encoded-processing header keeps its encoded checks and
    only gains the regions"""

    TRANSFORM_INFO = {'name': 'haft', 'header': 'haft'}
    SUPPORTED_OPCODES = frozenset(BASE_OPCODES)

    def __init__(self, cfg=None):
        super(HaftTransform, self).__init__()
        self.cfg = cfg or HaftConfig()

    def header_fields(self):
        return {'region_blocks': self.cfg.region_blocks,
                'max_retries': self.cfg.max_retries}

    def check_input(self, program):
        if 'haft' in program.header:
            raise TransformError("program is already lock-step hardened")
        if program.delta_params is not None:
            allowed = set(BASE_OPCODES) | set(DELTA_OPCODES)
            for index, ins in enumerate(program):
                if ins.opcode not in allowed:
                    raise TransformError("instruction %d: unexpected '%s'"
                                         % (index, ins.opcode))
            return
        self.check_logical(program)
        super(HaftTransform, self).check_input(program)

    def _duplicate(self, ins):
        """Master and shadow copies of one computational instruction"""
        opcode, ops = ins.opcode, ins.operands
        if opcode in ('const', 'in'):
            return [ins, emit(opcode, shadow(ops[0]), ops[1])]
        if opcode == 'alloc':
            # one object; the shadow bank holds the same handle
            return [ins, emit('mov', shadow(ops[0]), ops[0])]
        return [ins, emit(opcode, *[shadow(reg) for reg in ops])]

    def _checks(self, ins):
        """chk pseudo-instructions guarding a check point"""
        if ins.opcode in ('store', 'br', 'out'):
            seen = []
            for reg in ins.registers():
                if reg not in seen:
                    seen.append(reg)
            return [emit('chk', reg, shadow(reg)) for reg in seen]
        return []

    def lower(self, program):
        encoded = program.delta_params is not None
        targets = set(ins.target() for ins in program
                      if ins.target() is not None)
        blocks = basic_blocks(program)
        starts_region = [index % self.cfg.region_blocks == 0
                         or start in targets
                         for index, (start, _) in enumerate(blocks)]
        chunks = []
        is_open = False
        reopen = False
        for index, (start, end) in enumerate(blocks):
            closes_region = (index + 1 == len(blocks)
                             or starts_region[index + 1])
            for position in range(start, end):
                ins = program[position]
                chunk = []
                if position == start and starts_region[index]:
                    chunk.append(emit('txbegin'))
                    is_open, reopen = True, False
                elif reopen and ins.opcode != 'halt':
                    chunk.append(emit('txbegin'))
                    is_open, reopen = True, False
                last = position == end - 1
                terminator = ins.opcode in ('br', 'jmp', 'dbr', 'halt')
                if encoded:
                    body = [ins]
                elif ins.opcode in DUPLICATED or ins.opcode == 'alloc':
                    body = self._duplicate(ins)
                else:
                    body = self._checks(ins) + [ins]
                if ins.opcode in ('out', 'dout'):
                    # output cannot be rolled back: close the region first
                    chunk.extend(body[:-1])
                    if is_open:
                        chunk.append(emit('txend'))
                        is_open, reopen = False, True
                    chunk.append(body[-1])
                elif last and closes_region and is_open:
                    if terminator:
                        chunk.extend(body[:-1])
                        chunk.append(emit('txend'))
                        chunk.append(body[-1])
                    else:
                        chunk.extend(body)
                        chunk.append(emit('txend'))
                    is_open = False
                else:
                    chunk.extend(body)
                chunks.append(chunk)
            if closes_region:
                reopen = False
        return chunks


def transform_haft(program, cfg=None):
    """Lock-step harden program.  Raise TransformError if it uses
    registers >= 32"""
    return HaftTransform(cfg).apply(program)


def run_protected(hardened, inputs=(), cfg=None, limits=None, **hooks):
    """Execute a lock-step hardened program with transactional recovery"""
    cfg = cfg or HaftConfig.from_header(hardened)
    unit = TransactionUnit(cfg)
    return Interpreter(hardened, inputs, limits, tx=unit, **hooks).run()
