# -*- coding: utf-8 -*-
#
# This file is part of Hardexec, distributed under the GNU GPLv3.

"""This module provides the common stuff for the different supported actions"""

from __future__ import print_function
import json
import logging
import os

from .. import HardexecError, ConfigError
from ..ir.ir_parser import load_program
from ..ir.interpreter import Limits
from ..ir.program import serialize_canonical
from ..util.rng import check_seed


class ContractViolation(HardexecError):

    """A program did not halt where the command requires it to"""

    EXIT_CODE = 3


class Action(object):

    """This is the base class providing the common Action methods"""

    def __init__(self, options):
        super(Action, self).__init__()
        self.options = options

    def load_program(self, path):
        """Parse the IR file at path"""
        if not os.path.isfile(path):
            raise ConfigError("No such IR file: %s" % path)
        return load_program(path)

    def write_program(self, path, program):
        with open(path, "wb") as ir_file:
            ir_file.write(serialize_canonical(program))
        logging.info("program written to %s", path)

    def inputs(self):
        """Input vector given by --input: a JSON array of integers, inline
        or in a file"""
        text = getattr(self.options, 'input', None)
        if text is None:
            return ()
        if os.path.isfile(text):
            with open(text, "r") as input_file:
                text = input_file.read()
        try:
            words = json.loads(text)
        except ValueError as error:
            raise ConfigError("--input is not JSON: %s" % error)
        if not isinstance(words, list) or not all(
                isinstance(word, int) and not isinstance(word, bool)
                for word in words):
            raise ConfigError("--input must be a JSON array of integers")
        return tuple(words)

    def limits(self):
        return Limits(getattr(self.options, 'max_steps', None) or 10000000)

    def require_seed(self, purpose):
        """The explicit --seed; commands consuming randomness need one"""
        seed = getattr(self.options, 'seed', None)
        if seed is None:
            raise ConfigError("%s consumes randomness: --seed is required"
                              % purpose)
        return check_seed(seed)

    def require_halted(self, result, what):
        if not result.halted:
            raise ContractViolation("%s did not halt: %s"
                                    % (what, result.describe()))
