# -*- coding: utf-8 -*-
#
# This file is part of Hardexec, distributed under the GNU GPLv3.

"""Module providing the IR assembly parser"""

import logging
import re

from .. import HardexecError
from .instruction import Instruction, OPCODES
from .program import IRProgram, HEADER_KEYS


class IRSyntaxError(HardexecError, SyntaxError):

    """Raised for malformed IR source.  Carries the 1-based source line"""

    EXIT_CODE = 2

    def __init__(self, line, reason):
        HardexecError.__init__(self, "line %d: %s" % (line, reason))
        self.line = line
        self.reason = reason
        self.lineno = line
        self.msg = reason

    def __str__(self):
        return "line %d: %s" % (self.line, self.reason)


LABEL_NAME = r"[A-Za-z_][A-Za-z0-9_]*"
label_pattern = re.compile(r"^(%s)\s*:\s*(.*)$" % LABEL_NAME)
opcode_pattern = re.compile(r"^([A-Za-z]+)\s*(.*)$")
register_pattern = re.compile(r"^[rR](\d+)$")
immediate_pattern = re.compile(r"^[+-]?\d+$")
target_pattern = re.compile(r"^(?:(%s)|(\d+))$" % LABEL_NAME)
header_pattern = re.compile(r"^#!\s*(\w+)((?:\s+\w+=[+-]?\d+)*)\s*$")


def _strip_comment(text):
    """Drop everything after a '#'"""
    return text.split('#', 1)[0].strip()


def _parse_header(lineno, text, header):
    """Add the fields of a '#!' line to header"""
    match = header_pattern.match(text)
    if match is None:
        raise IRSyntaxError(lineno, "malformed header line")
    name = match.group(1)
    known = dict(HEADER_KEYS)
    if name not in known:
        raise IRSyntaxError(lineno, "unknown header section '%s'" % name)
    fields = {}
    for item in match.group(2).split():
        key, value = item.split('=')
        fields[key] = int(value)
    if sorted(fields) != sorted(known[name]):
        raise IRSyntaxError(
            lineno, "header '%s' needs exactly %s" % (
                name, ", ".join(known[name])))
    header[name] = fields


def _parse_operand(lineno, kind, token):
    """Decode a single operand token.  Returns an int, or the label name
    (a string) for branch targets still to be resolved"""
    if kind == 'r':
        match = register_pattern.match(token)
        if match is None:
            raise IRSyntaxError(lineno, "expected a register, got '%s'"
                                % token)
        return int(match.group(1))
    if kind == 'i':
        if immediate_pattern.match(token) is None:
            raise IRSyntaxError(lineno, "expected an immediate, got '%s'"
                                % token)
        return int(token)
    match = target_pattern.match(token)
    if match is None:
        raise IRSyntaxError(lineno, "expected a label, got '%s'" % token)
    if match.group(2) is not None:
        return int(match.group(2))
    return match.group(1)


def parse_program(text):
    """Parse IR assembly into a resolved IRProgram.  Raise IRSyntaxError
    for unknown opcodes, bad arity, undefined labels or registers >= 64"""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as error:
            raise IRSyntaxError(text[:error.start].count(b"\n") + 1,
                                "invalid UTF-8 at byte %d" % error.start)
    header = {}
    labels = {}
    pending = []        # (lineno, opcode, operands) with unresolved labels
    for lineno, raw in enumerate(text.splitlines(), 1):
        stripped = raw.strip()
        if stripped.startswith('#!'):
            _parse_header(lineno, stripped, header)
            continue
        body = _strip_comment(raw)
        while body:
            match = label_pattern.match(body)
            if match is None:
                break
            name = match.group(1)
            if name in labels:
                raise IRSyntaxError(lineno, "duplicate label '%s'" % name)
            labels[name] = len(pending)
            body = match.group(2).strip()
        if not body:
            continue
        match = opcode_pattern.match(body)
        if match is None:
            raise IRSyntaxError(lineno, "cannot parse '%s'" % body)
        opcode = match.group(1).lower()
        if opcode not in OPCODES:
            raise IRSyntaxError(lineno, "unknown opcode '%s'" % opcode)
        signature = OPCODES[opcode]
        rest = match.group(2).strip()
        tokens = [tok.strip() for tok in rest.split(',')] if rest else []
        if len(tokens) != len(signature):
            raise IRSyntaxError(
                lineno, "opcode '%s' takes %d operands, got %d" % (
                    opcode, len(signature), len(tokens)))
        operands = [_parse_operand(lineno, kind, tok)
                    for kind, tok in zip(signature, tokens)]
        pending.append((lineno, opcode, operands))

    instructions = []
    for lineno, opcode, operands in pending:
        resolved = []
        for value in operands:
            if isinstance(value, str):
                if value not in labels:
                    raise IRSyntaxError(lineno,
                                        "undefined label '%s'" % value)
                value = labels[value]
            resolved.append(value)
        ins = Instruction(opcode, resolved)
        reason = ins.validate()
        if reason is None and ins.target() is not None \
                and not 0 <= ins.target() < len(pending):
            reason = "branch target %d does not name an instruction" % (
                ins.target())
        if reason is not None:
            raise IRSyntaxError(lineno, reason)
        instructions.append(ins)
    logging.debug("parsed %d instructions, %d labels",
                  len(instructions), len(labels))
    return IRProgram(instructions, labels, 0, header)


def load_program(path):
    """Read and parse the IR file at path"""
    logging.debug("loading IR program %s", path)
    with open(path, "rb") as source:
        return parse_program(source.read())
