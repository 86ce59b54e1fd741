# -*- coding: utf-8 -*-
#
# This file is part of Hardexec, distributed under the GNU GPLv3.

"""Module providing the IR instruction and the opcode tables shared by the
parser, the transforms and the interpreter"""

import six

NUM_REGS = 64
LOGICAL_REGS = 32
WORD_MIN = -(1 << 63)
WORD_MAX = (1 << 63) - 1

# Operand signature letters: r = register, i = immediate, l = branch target
BASE_OPCODES = {
    'const': 'ri',
    'mov': 'rr',
    'add': 'rrr',
    'sub': 'rrr',
    'mul': 'rrr',
    'divs': 'rrr',
    'and': 'rrr',
    'or': 'rrr',
    'xor': 'rrr',
    'shl': 'rrr',
    'shr': 'rrr',
    'eq': 'rrr',
    'lt': 'rrr',
    'br': 'rl',
    'jmp': 'l',
    'alloc': 'rr',
    'load': 'rrr',
    'store': 'rrr',
    'in': 'ri',
    'out': 'r',
    'halt': ''}

# Lock-step pseudo-instructions
HAFT_OPCODES = {
    'txbegin': '',
    'txend': '',
    'chk': 'rr'}

# Encoded-processing pseudo-instructions
DELTA_OPCODES = {
    'enc': 'r',
    'emul': 'rrr',
    'dchk': 'r',
    'deq': 'rrr',
    'dlt': 'rrr',
    'dbr': 'rl',
    'dout': 'r',
    'dalloc': 'rr',
    'dload': 'rrr',
    'dstore': 'rrr'}

OPCODES = {}
OPCODES.update(BASE_OPCODES)
OPCODES.update(HAFT_OPCODES)
OPCODES.update(DELTA_OPCODES)

# Pair opcodes name logical registers; the interpreter reaches the copy-2
# bank at index + 32 itself.
PAIR_OPCODES = frozenset(
    ['dchk', 'deq', 'dlt', 'dbr', 'dout', 'dalloc', 'dload', 'dstore'])

BRANCH_OPCODES = frozenset(['br', 'jmp', 'dbr'])
TERMINATOR_OPCODES = frozenset(['br', 'jmp', 'dbr', 'halt'])


class Instruction(object):

    """One IR instruction: an opcode and a tuple of integer operands.
    Branch targets are instruction indices once the program is resolved"""

    __slots__ = ('opcode', 'operands')

    def __init__(self, opcode, operands=()):
        self.opcode = opcode
        self.operands = tuple(operands)

    @property
    def signature(self):
        """Operand signature string of the opcode"""
        return OPCODES[self.opcode]

    def validate(self):
        """Check opcode, arity and operand ranges. Return None when the
        instruction is well formed or a short reason string otherwise"""
        if self.opcode not in OPCODES:
            return "unknown opcode '%s'" % self.opcode
        signature = OPCODES[self.opcode]
        if len(signature) != len(self.operands):
            return "opcode '%s' takes %d operands, got %d" % (
                self.opcode, len(signature), len(self.operands))
        limit = LOGICAL_REGS if self.opcode in PAIR_OPCODES else NUM_REGS
        for kind, value in zip(signature, self.operands):
            if not isinstance(value, six.integer_types):
                return "operand %r is not resolved" % (value,)
            if kind == 'r' and not 0 <= value < limit:
                return "register index r%d out of range (< %d)" % (
                    value, limit)
            if kind == 'i' and not WORD_MIN <= value <= WORD_MAX:
                return "immediate %d does not fit a 64-bit word" % value
        return None

    def registers(self):
        """List the register operands, in operand order"""
        return [value for kind, value in zip(self.signature, self.operands)
                if kind == 'r']

    def target(self):
        """Branch target index, or None for non-branching opcodes"""
        if self.opcode in BRANCH_OPCODES:
            return self.operands[-1]
        return None

    def with_target(self, target):
        """Copy of the instruction with the branch target replaced"""
        assert self.opcode in BRANCH_OPCODES
        return Instruction(self.opcode, self.operands[:-1] + (target,))

    def render(self):
        """Canonical text of the instruction"""
        parts = []
        for kind, value in zip(self.signature, self.operands):
            if kind == 'r':
                parts.append("r%d" % value)
            else:
                parts.append("%d" % value)
        if not parts:
            return self.opcode
        return "%s %s" % (self.opcode, ", ".join(parts))

    def __eq__(self, other):
        return (isinstance(other, Instruction)
                and self.opcode == other.opcode
                and self.operands == other.operands)

    def __ne__(self, other):
        return not self.__eq__(other)

    def __hash__(self):
        return hash((self.opcode, self.operands))

    def __repr__(self):
        return "<Instruction %s>" % self.render()
