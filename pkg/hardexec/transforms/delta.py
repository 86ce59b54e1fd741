# -*- coding: utf-8 -*-
#
# This file is part of Hardexec, distributed under the GNU GPLv3.

"""Encoded-processing transform: logical rK becomes the codeword pair
(rK, rK+32) = (A1*x, A2*x)"""

import logging

from ..encoding.an_code import (DEFAULT_PARAMS, RangeError, draw_params,
                                encode)
from .transform import Transform, TransformError, emit, shadow


class DeltaTransform(Transform):

    """Lowers a base program into encoded arithmetic.  Values leave the
    code only at comparisons, branches, memory addressing and output,
    each preceded by a dchk of the operands"""

    TRANSFORM_INFO = {'name': 'delta', 'header': 'delta'}
    SUPPORTED_OPCODES = frozenset([
        'const', 'mov', 'add', 'sub', 'mul', 'eq', 'lt', 'br', 'jmp',
        'alloc', 'load', 'store', 'in', 'out', 'halt'])

    def __init__(self, params=None):
        super(DeltaTransform, self).__init__()
        self.params = params or DEFAULT_PARAMS

    def header_fields(self):
        return self.params.as_header()

    def check_input(self, program):
        if program.header:
            raise TransformError("delta expects an unhardened program, "
                                 "found header sections %s"
                                 % ", ".join(sorted(program.header)))
        super(DeltaTransform, self).check_input(program)
        self.check_logical(program)

    @staticmethod
    def _guards(registers):
        seen = []
        for reg in registers:
            if reg not in seen:
                seen.append(reg)
        return [emit('dchk', reg) for reg in seen]

    def _lower_one(self, index, ins):
        opcode, ops = ins.opcode, ins.operands
        if opcode == 'const':
            try:
                pair = encode(ops[1], self.params)
            except RangeError as error:
                raise TransformError("instruction %d: %s" % (index, error))
            return [emit('const', ops[0], pair.c1),
                    emit('const', shadow(ops[0]), pair.c2)]
        if opcode in ('mov', 'add', 'sub'):
            return [ins, emit(opcode, *[shadow(reg) for reg in ops])]
        if opcode == 'mul':
            return [emit('emul', *ops),
                    emit('emul', *[shadow(reg) for reg in ops])]
        if opcode in ('eq', 'lt'):
            return self._guards(ops[1:]) + [emit('d' + opcode, *ops)]
        if opcode == 'br':
            return [emit('dchk', ops[0]), emit('dbr', ops[0], ops[1])]
        if opcode == 'alloc':
            return [emit('dchk', ops[1]), emit('dalloc', *ops)]
        if opcode == 'load':
            return self._guards(ops[1:]) + [emit('dload', *ops)]
        if opcode == 'store':
            return self._guards(ops) + [emit('dstore', *ops)]
        if opcode == 'in':
            return [ins, emit('in', shadow(ops[0]), ops[1]),
                    emit('enc', ops[0]), emit('enc', shadow(ops[0]))]
        if opcode == 'out':
            return [emit('dchk', ops[0]), emit('dout', ops[0])]
        # jmp, halt
        return [ins]

    def lower(self, program):
        return [self._lower_one(index, ins)
                for index, ins in enumerate(program)]


def transform_delta(program, params=None, rng=None):
    """Encode program.  The constants come from params, else are drawn
    from rng, else the defaults are used"""
    if params is None and rng is not None:
        params = draw_params(rng)
    transform = DeltaTransform(params)
    logging.debug("encoding with A1=%d A2=%d", transform.params.A1,
                  transform.params.A2)
    return transform.apply(program)
