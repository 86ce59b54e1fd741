# -*- coding: utf-8 -*-
#
# This file is part of Hardexec, distributed under the GNU GPLv3.

"""Module providing overflow-tolerant memory.

Accesses past the end of an object, up to the policy horizon, go to a
private overflow table instead of trapping; the service is stopped only
when continuing would be unsafe: a negative offset, an offset past the
horizon or a full table."""

import json
import logging

from .. import ConfigError
from ..ir.interpreter import Interpreter, MachineCrash, MachineDetect

UNSAFE_OOB = 'unsafe-oob'


class SafetyPolicy(object):

    """How far past an object, and how many overflow cells, are tolerated"""

    def __init__(self, horizon=4096, cap=65536):
        if horizon < 0:
            raise ConfigError("horizon must be >= 0, got %d" % horizon)
        if cap < 1:
            raise ConfigError("cap must be >= 1, got %d" % cap)
        self.horizon = horizon
        self.cap = cap

    def __repr__(self):
        return "SafetyPolicy(horizon=%d, cap=%d)" % (self.horizon, self.cap)


class OverflowTable(object):

    """Overflow cells keyed by (handle, offset) and the access log"""

    def __init__(self):
        self.entries = {}
        self.events = []

    def clear(self):
        self.entries.clear()
        del self.events[:]

    def log(self, kind, handle, offset, step):
        self.events.append({'kind': kind, 'handle': handle,
                            'offset': offset, 'step': step})
        logging.debug("tolerated out-of-bounds %s of object %d at offset %d",
                      kind, handle, offset)

    def lines(self):
        """The event log as JSON lines"""
        return [json.dumps(event, sort_keys=True) + "\n"
                for event in self.events]

    def export(self, path):
        with open(path, "w") as log_file:
            log_file.writelines(self.lines())
        logging.info("%d out-of-bounds events written to %s",
                     len(self.events), path)


class BoundlessMemory(object):

    """Interpreter mem_hooks implementing the tolerant access path"""

    def __init__(self, policy=None):
        self.policy = policy or SafetyPolicy()
        self.table = OverflowTable()

    def attach(self, state):
        # a (re)started service begins with an empty table
        self.table.clear()

    def _locate(self, state, handle, offset):
        """The object, and whether offset is inside it.  Fail-stops on
        unsafe offsets"""
        obj = state.memory.get(handle)
        if obj is None:
            raise MachineCrash('invalid-handle')
        if 0 <= offset < obj.size:
            return obj, True
        if offset < 0 or offset > obj.size + self.policy.horizon:
            logging.info("unsafe access of object %d at offset %d", handle,
                         offset)
            raise MachineDetect(UNSAFE_OOB)
        return obj, False

    def load(self, state, handle, offset):
        obj, inside = self._locate(state, handle, offset)
        if inside:
            return obj.cells.get(offset, 0)
        self.table.log('read', handle, offset, state.dyn_insts)
        return self.table.entries.get((handle, offset), 0)

    def store(self, state, handle, offset, value):
        obj, inside = self._locate(state, handle, offset)
        if inside:
            obj.cells[offset] = value
            return
        key = (handle, offset)
        if key not in self.table.entries \
                and len(self.table.entries) >= self.policy.cap:
            logging.info("overflow table full (%d entries)", self.policy.cap)
            raise MachineDetect(UNSAFE_OOB)
        self.table.log('write', handle, offset, state.dyn_insts)
        self.table.entries[key] = value

    def peek(self, state, handle, offset):
        obj = state.memory.get(handle)
        if obj is None:
            return None
        if 0 <= offset < obj.size:
            return obj.cells.get(offset)
        return self.table.entries.get((handle, offset))

    def poke(self, state, handle, offset, value):
        obj = state.memory.get(handle)
        if obj is None:
            return
        if 0 <= offset < obj.size:
            cells = obj.cells
        else:
            cells = self.table.entries
            offset = (handle, offset)
        if value is None:
            cells.pop(offset, None)
        else:
            cells[offset] = value


def mem_write(boundless, state, handle, offset, value):
    """Store through the tolerant path of boundless"""
    boundless.store(state, handle, offset, value)


def mem_read(boundless, state, handle, offset):
    """Load through the tolerant path of boundless"""
    return boundless.load(state, handle, offset)


def run_boundless(program, inputs=(), policy=None, limits=None, **hooks):
    """Execute program on overflow-tolerant memory.  Return the result and
    the overflow table"""
    boundless = BoundlessMemory(policy)
    result = Interpreter(program, inputs, limits, mem_hooks=boundless,
                         **hooks).run()
    return result, boundless.table
