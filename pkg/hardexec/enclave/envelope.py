# -*- coding: utf-8 -*-
#
# This file is part of Hardexec, distributed under the GNU GPLv3.

"""Module providing the secure-container envelope of one service instance.

Sealed file layout: nonce (12 bytes) | ciphertext | tag (16 bytes), under
AES-GCM with the per-path key HMAC-SHA256(master_key, path)."""

import hashlib
import hmac
import logging

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from .. import HardexecError, ConfigError
from ..ir.interpreter import Interpreter
from .epc import EpcModel
from .measurement import Measurement, measure

KEY_SIZE = 32
NONCE_SIZE = 12
TAG_SIZE = 16

SERVICE_CALLS = ('file_get', 'file_put', 'chan_send', 'chan_recv', 'out')
DEFAULT_ALLOWLIST = frozenset(SERVICE_CALLS)


class IntegrityError(HardexecError):

    """Authenticated decryption failed"""

    EXIT_CODE = 3


class SyscallDenied(HardexecError):

    """The contained service issued a call outside its allowlist"""

    EXIT_CODE = 3

    def __init__(self, call):
        super(SyscallDenied, self).__init__(
            "service call '%s' denied" % call)
        self.call = call


def random_bytes(count, rng):
    """count bytes from the numpy Generator rng.  Keys and nonces are
    reproducible from the run seed"""
    if rng is None:
        raise ConfigError("enclave keys and nonces need a seeded stream")
    return rng.bytes(count)


class EnclaveEnvelope(object):

    """Measurement, keys, page cache model and service-call allowlist
    wrapping one program"""

    def __init__(self, program, master_key=None, epc=None,
                 allowlist=DEFAULT_ALLOWLIST, expected=(), rng=None):
        if rng is None:
            raise ConfigError("an envelope needs a seeded random stream")
        if master_key is None:
            master_key = random_bytes(KEY_SIZE, rng)
        if len(master_key) != KEY_SIZE:
            raise ConfigError("master key must be %d bytes" % KEY_SIZE)
        self.program = program
        self.measurement = measure(program)
        self.master_key = bytes(master_key)
        self.epc = epc if epc is not None else EpcModel()
        self._allowlist = frozenset(allowlist)
        self.expected = frozenset(expected)
        self.files = {}
        self.rng = rng

    @classmethod
    def from_config(cls, program, config, master_key=None, rng=None):
        """Envelope from a parsed envelope configuration"""
        unknown = set(config['allowlist']) - set(SERVICE_CALLS)
        if unknown:
            logging.warning("allowlist names unknown service calls: %s",
                            ", ".join(sorted(unknown)))
        expected = [Measurement.from_hex(text)
                    for text in config['expected_measurements']]
        return cls(program, master_key,
                   EpcModel(config['epc_pages'], config['fault_penalty']),
                   config['allowlist'], expected, rng)

    @property
    def allowlist(self):
        return self._allowlist

    def syscall_gate(self, call):
        """True iff call is allowed"""
        if call in self._allowlist:
            return True
        logging.warning("denied service call '%s'", call)
        return False

    def require(self, call):
        if not self.syscall_gate(call):
            raise SyscallDenied(call)

    def nonce(self):
        return random_bytes(NONCE_SIZE, self.rng)

    def file_key(self, path):
        if not path:
            raise ConfigError("sealed file path must be nonempty")
        return hmac.new(self.master_key, path.encode("utf-8"),
                        hashlib.sha256).digest()

    def seal_file(self, path, plaintext):
        nonce = self.nonce()
        return nonce + AESGCM(self.file_key(path)).encrypt(
            nonce, bytes(plaintext), None)

    def unseal_file(self, path, sealed):
        key = self.file_key(path)
        if len(sealed) < NONCE_SIZE + TAG_SIZE:
            raise IntegrityError("sealed file of %d bytes is truncated"
                                 % len(sealed))
        try:
            return AESGCM(key).decrypt(sealed[:NONCE_SIZE],
                                       bytes(sealed[NONCE_SIZE:]), None)
        except InvalidTag:
            raise IntegrityError("sealed file '%s' failed authentication"
                                 % path)

    def file_put(self, path, data):
        """Store data sealed, through the gate"""
        self.require('file_put')
        self.files[path] = self.seal_file(path, data)

    def file_get(self, path):
        """Unseal a stored file, through the gate"""
        self.require('file_get')
        if path not in self.files:
            raise IntegrityError("no sealed file at '%s'" % path)
        return self.unseal_file(path, self.files[path])

    def run(self, inputs=(), limits=None, **hooks):
        """Execute the program under the page cache model with 'out'
        gated.  The cache starts cold"""
        self.epc.reset()
        result = Interpreter(self.program, inputs, limits,
                             cost_hooks=self.epc, gate=self.syscall_gate,
                             **hooks).run()
        logging.debug("envelope run: %s, epc %s", result.describe(),
                      self.epc.stats())
        return result


def seal_file(env, path, plaintext):
    return env.seal_file(path, plaintext)


def unseal_file(env, path, sealed):
    return env.unseal_file(path, sealed)


def syscall_gate(env, call):
    return env.syscall_gate(call)
