# -*- coding: utf-8 -*-
#
# This file is part of Hardexec, distributed under the GNU GPLv3.

"""Module providing the enclave identity of a program"""

import binascii
import hashlib

from .. import ConfigError
from ..ir.program import serialize_canonical

DIGEST_SIZE = 32


class Measurement(object):

    """SHA-256 digest of the canonical program bytes"""

    __slots__ = ('digest',)

    def __init__(self, digest):
        if len(digest) != DIGEST_SIZE:
            raise ConfigError("a measurement is %d bytes, got %d"
                              % (DIGEST_SIZE, len(digest)))
        self.digest = bytes(digest)

    @classmethod
    def from_hex(cls, text):
        try:
            return cls(binascii.unhexlify(text))
        except (TypeError, ValueError, binascii.Error):
            raise ConfigError("'%s' is not a hex measurement" % text)

    def hexdigest(self):
        return binascii.hexlify(self.digest).decode("ascii")

    def __eq__(self, other):
        return isinstance(other, Measurement) and self.digest == other.digest

    def __ne__(self, other):
        return not self.__eq__(other)

    def __hash__(self):
        return hash(self.digest)

    def __repr__(self):
        return "<Measurement %s>" % self.hexdigest()


def measure(program):
    """Measurement of program; label names do not contribute"""
    return Measurement(hashlib.sha256(serialize_canonical(program)).digest())
