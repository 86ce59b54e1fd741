# -*- coding: utf-8 -*-
#
# This file is part of Hardexec, distributed under the GNU GPLv3.

"""Module providing the IRProgram container, its canonical serialization
and the basic-block partition used by the transforms"""

import logging

from .instruction import Instruction, BRANCH_OPCODES, TERMINATOR_OPCODES

# Header sections and the order of their keys in the canonical text
HEADER_KEYS = (
    ('delta', ('A1', 'A2')),
    ('haft', ('region_blocks', 'max_retries')))


class IRProgram(object):

    """A resolved instruction sequence.  Labels are kept only as a
    convenience for diagnostics; they are not part of program identity"""

    def __init__(self, instructions=None, labels=None, entry=0, header=None):
        self.instructions = list(instructions or [])
        self.labels = dict(labels or {})
        self.entry = entry
        self.header = dict((name, dict(values))
                           for name, values in (header or {}).items())
        self._live_in = None

    def __len__(self):
        return len(self.instructions)

    def __iter__(self):
        return iter(self.instructions)

    def __getitem__(self, index):
        return self.instructions[index]

    def check(self):
        """Return a list of (index, reason) for every malformed instruction
        or out-of-range branch target"""
        problems = []
        for index, ins in enumerate(self.instructions):
            reason = ins.validate()
            if reason is None:
                target = ins.target()
                if target is not None and not 0 <= target < len(self):
                    reason = "branch target %d out of range" % target
            if reason is not None:
                problems.append((index, reason))
        return problems

    def max_register(self):
        """Highest register index used by the program, -1 if none"""
        highest = -1
        for ins in self.instructions:
            for reg in ins.registers():
                highest = max(highest, reg)
        return highest

    def opcodes(self):
        """Set of opcodes used by the program"""
        return set(ins.opcode for ins in self.instructions)

    def live_in(self, index):
        """Registers live on entry to instruction index; empty past the
        end.  Computed once per program"""
        if self._live_in is None:
            self._live_in = live_registers(self)
        if index >= len(self):
            return frozenset()
        return self._live_in[index]

    @property
    def delta_params(self):
        """(A1, A2) recorded by the encoded-processing transform, or None"""
        section = self.header.get('delta')
        if section is None:
            return None
        return section['A1'], section['A2']

    def copy(self):
        """Fresh program sharing no mutable state with this one"""
        return IRProgram(self.instructions, self.labels, self.entry,
                         self.header)

    def __eq__(self, other):
        return (isinstance(other, IRProgram)
                and self.instructions == other.instructions
                and self.entry == other.entry
                and self.header == other.header)

    def __ne__(self, other):
        return not self.__eq__(other)

    def __repr__(self):
        return "<IRProgram %d instructions>" % len(self)


def render_header(header):
    """Render the '#!' header lines in canonical key order"""
    lines = []
    for name, keys in HEADER_KEYS:
        section = header.get(name)
        if section is None:
            continue
        fields = " ".join("%s=%d" % (key, section[key]) for key in keys)
        lines.append("#! %s %s" % (name, fields))
    return lines


def serialize_canonical(program):
    """Deterministic byte rendering: header lines, then one lowercase
    instruction per line with numeric targets, every line newline
    terminated"""
    lines = render_header(program.header)
    lines.extend(ins.render() for ins in program.instructions)
    if not lines:
        return b""
    return ("\n".join(lines) + "\n").encode("ascii")


def block_leaders(program):
    """Sorted indices starting a basic block: the entry, every branch
    target and every instruction following a terminator"""
    if not len(program):
        return []
    leaders = set([program.entry])
    for index, ins in enumerate(program.instructions):
        if ins.opcode in BRANCH_OPCODES:
            leaders.add(ins.target())
        if ins.opcode in TERMINATOR_OPCODES and index + 1 < len(program):
            leaders.add(index + 1)
    return sorted(leaders)


def basic_blocks(program):
    """Partition the program into basic blocks, as (start, end) half-open
    index ranges in program order"""
    leaders = block_leaders(program)
    bounds = leaders + [len(program)]
    blocks = [(bounds[i], bounds[i + 1]) for i in range(len(leaders))]
    logging.debug("%d basic blocks in %r", len(blocks), program)
    return blocks


def block_successors(program, block):
    """Start indices of the blocks control may reach after (start, end)"""
    start, end = block
    last = program.instructions[end - 1]
    successors = []
    if last.opcode in BRANCH_OPCODES:
        successors.append(last.target())
    if last.opcode not in ('jmp', 'halt') and end < len(program):
        successors.append(end)
    return successors


def relocate(instructions, new_index):
    """Rewrite branch targets through the mapping new_index (old index to
    new index); used by transforms that grow the program"""
    out = []
    for ins in instructions:
        if ins.target() is not None:
            ins = ins.with_target(new_index[ins.target()])
        out.append(ins)
    return out


__all__ = ['IRProgram', 'Instruction', 'serialize_canonical',
           'basic_blocks', 'block_leaders', 'block_successors', 'relocate']


# opcodes whose first operand is the register they write
DEFINING_OPCODES = frozenset(['const', 'in', 'mov', 'add', 'sub', 'mul',
                              'divs', 'and', 'or', 'xor', 'shl', 'shr', 'eq',
                              'lt', 'alloc', 'load'])


def instruction_successors(program, index):
    """Indices control may reach right after instruction index"""
    ins = program.instructions[index]
    successors = []
    if ins.opcode in BRANCH_OPCODES:
        successors.append(ins.target())
    if ins.opcode not in ('jmp', 'halt') and index + 1 < len(program):
        successors.append(index + 1)
    return successors


def live_registers(program):
    """Registers live on entry to each instruction, as a list of
    frozensets.  Only plain (unencoded) programs are supported"""
    uses, defs = [], []
    for ins in program.instructions:
        registers = list(ins.registers())
        if ins.opcode in DEFINING_OPCODES and registers:
            defs.append(frozenset(registers[:1]))
            uses.append(frozenset(registers[1:]))
        else:
            defs.append(frozenset())
            uses.append(frozenset(registers))
    live_in = [frozenset()] * len(program)
    changed = True
    while changed:
        changed = False
        for index in reversed(range(len(program))):
            live_out = frozenset().union(
                *[live_in[succ] for succ in
                  instruction_successors(program, index)])
            live = uses[index] | (live_out - defs[index])
            if live != live_in[index]:
                live_in[index] = live
                changed = True
    return live_in
