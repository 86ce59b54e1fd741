# -*- coding: utf-8 -*-
#
# This file is part of Hardexec, distributed under the GNU GPLv3.

"""Module providing the common machinery of the hardening transforms"""

import logging

from .. import HardexecError
from ..ir.instruction import Instruction, LOGICAL_REGS
from ..ir.program import IRProgram, relocate


class TransformError(HardexecError):

    """The input program violates a precondition of the transform"""

    EXIT_CODE = 2


class UnsupportedInstruction(TransformError):

    """The transform cannot express an opcode of the input program"""

    def __init__(self, opcode, index):
        super(UnsupportedInstruction, self).__init__(
            "instruction %d: opcode '%s' is not supported by this transform"
            % (index, opcode))
        self.opcode = opcode
        self.index = index


def shadow(reg):
    """Second-bank twin of logical register reg"""
    return reg + LOGICAL_REGS


def instruction_ratio(original, hardened):
    """Static instruction-count ratio, 1.0 for an empty original"""
    if not len(original):
        return 1.0
    return float(len(hardened)) / len(original)


# pseudo-instructions that check or delimit regions without computing
MARKER_OPCODES = frozenset(['txbegin', 'txend', 'chk', 'dchk'])


def marker_count(program):
    """Number of check and region markers in program"""
    return sum(1 for ins in program if ins.opcode in MARKER_OPCODES)


class Transform(object):

    """Base class of the transforms.  A subclass lowers every original
    instruction into a chunk of new instructions whose branch targets
    still name original indices; apply() lays the chunks out and
    relocates the targets"""

    TRANSFORM_INFO = {'name': None, 'header': None}
    SUPPORTED_OPCODES = frozenset()

    def __init__(self):
        super(Transform, self).__init__()

    def header_fields(self):
        """Fields recorded in the program header section"""
        return {}

    def check_input(self, program):
        """Raise TransformError/UnsupportedInstruction if program cannot be
        transformed"""
        for index, ins in enumerate(program):
            if ins.opcode not in self.SUPPORTED_OPCODES:
                raise UnsupportedInstruction(ins.opcode, index)

    def check_logical(self, program):
        """Require the program to stay in the logical bank r0..r31"""
        highest = program.max_register()
        if highest >= LOGICAL_REGS:
            raise TransformError(
                "%s needs logical registers r0..r%d, program uses r%d"
                % (self.TRANSFORM_INFO['name'], LOGICAL_REGS - 1, highest))

    def lower(self, program):
        """Return one list of Instruction per original instruction"""
        raise NotImplementedError

    def apply(self, program):
        """Transform program into a fresh, hardened IRProgram"""
        name = self.TRANSFORM_INFO['name']
        if not len(program):
            logging.info("%s: empty program left unchanged", name)
            return program.copy()
        self.check_input(program)
        chunks = self.lower(program)
        assert len(chunks) == len(program)
        starts = []
        flat = []
        for chunk in chunks:
            starts.append(len(flat))
            flat.extend(chunk)
        flat = relocate(flat, starts)
        labels = dict((label, starts[index])
                      for label, index in program.labels.items())
        header = dict(program.header)
        header[self.TRANSFORM_INFO['header']] = self.header_fields()
        hardened = IRProgram(flat, labels, starts[program.entry], header)
        problems = hardened.check()
        if problems:
            raise TransformError("%s produced a malformed program: %s"
                                 % (name, problems[0][1]))
        logging.info("%s: %d -> %d instructions (ratio %.3f)", name,
                     len(program), len(hardened),
                     instruction_ratio(program, hardened))
        return hardened


def emit(opcode, *operands):
    """Shorthand used by the lowering rules"""
    return Instruction(opcode, operands)
