# -*- coding: utf-8 -*-
#
# This file is part of Hardexec, distributed under the GNU GPLv3.

"""Module providing mock attestation and the encrypted channel.

The responder proves its identity with HMAC-SHA256(psk, measurement |
nonce_i | nonce_r); both sides then derive one key per direction with
HKDF.  Frame layout: seq (8 bytes, big endian) | nonce (12) | ciphertext |
tag (16), the seq bytes being the AEAD associated data."""

import collections
import hashlib
import hmac
import logging
import struct

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from .. import HardexecError, ConfigError
from .envelope import (IntegrityError, KEY_SIZE, NONCE_SIZE, TAG_SIZE,
                       random_bytes)

SEQ_SIZE = 8
HANDSHAKE_NONCE_SIZE = 16

UNEXPECTED_MEASUREMENT = 'unexpected-measurement'
BAD_MAC = 'bad-mac'


class AttestationError(HardexecError):

    """The responder could not be attested"""

    EXIT_CODE = 3

    def __init__(self, reason):
        super(AttestationError, self).__init__("attestation failed: %s"
                                               % reason)
        self.reason = reason


class ReplayError(HardexecError):

    """A frame repeats or precedes an already accepted sequence number"""

    EXIT_CODE = 3


HandshakeResponse = collections.namedtuple(
    'HandshakeResponse', ['measurement', 'nonce_r', 'mac'])
SessionKeys = collections.namedtuple('SessionKeys', ['i2r', 'r2i'])


def _check_psk(psk):
    if len(psk) != KEY_SIZE:
        raise ConfigError("pre-shared key must be %d bytes" % KEY_SIZE)


def _mac(psk, measurement, nonce_i, nonce_r):
    return hmac.new(psk, measurement.digest + nonce_i + nonce_r,
                    hashlib.sha256).digest()


def derive_keys(psk, nonce_i, nonce_r):
    """Independent session keys for both directions"""
    keys = []
    for info in (b"hardexec i2r", b"hardexec r2i"):
        hkdf = HKDF(algorithm=hashes.SHA256(), length=KEY_SIZE,
                    salt=nonce_i + nonce_r, info=info)
        keys.append(hkdf.derive(psk))
    return SessionKeys(*keys)


def respond(responder_env, psk, nonce_i, nonce_r):
    """Responder side: its measurement, fresh nonce and the proof"""
    _check_psk(psk)
    return HandshakeResponse(responder_env.measurement, nonce_r,
                             _mac(psk, responder_env.measurement, nonce_i,
                                  nonce_r))


def verify_response(response, expected, psk, nonce_i):
    """Initiator side: raise AttestationError unless the proof verifies
    and the measurement is expected"""
    _check_psk(psk)
    wanted = _mac(psk, response.measurement, nonce_i, response.nonce_r)
    if not hmac.compare_digest(wanted, response.mac):
        raise AttestationError(BAD_MAC)
    if response.measurement not in expected:
        raise AttestationError(UNEXPECTED_MEASUREMENT)
    return derive_keys(psk, nonce_i, response.nonce_r)


def attest_handshake(initiator_env, responder_env, expected, psk,
                     nonce_i=None, nonce_r=None):
    """Run the handshake.  Return the (initiator, responder) session keys"""
    if nonce_i is None:
        nonce_i = random_bytes(HANDSHAKE_NONCE_SIZE, initiator_env.rng)
    if nonce_r is None:
        nonce_r = random_bytes(HANDSHAKE_NONCE_SIZE, responder_env.rng)
    response = respond(responder_env, psk, nonce_i, nonce_r)
    initiator_keys = verify_response(response, frozenset(expected), psk,
                                     nonce_i)
    responder_keys = derive_keys(psk, nonce_i, nonce_r)
    logging.debug("attested %r", response.measurement)
    return initiator_keys, responder_keys


class Channel(object):

    """One endpoint: encrypts with send_key, decrypts with recv_key and
    keeps one sequence counter per direction"""

    def __init__(self, env, send_key, recv_key):
        self.env = env
        self._send = AESGCM(send_key)
        self._recv = AESGCM(recv_key)
        self.send_seq = 0
        self.last_recv = -1

    @classmethod
    def pair(cls, initiator_env, responder_env, keys):
        """Connected endpoints from attest_handshake's result"""
        initiator_keys, responder_keys = keys
        return (cls(initiator_env, initiator_keys.i2r, initiator_keys.r2i),
                cls(responder_env, responder_keys.r2i, responder_keys.i2r))

    def send(self, payload):
        self.env.require('chan_send')
        header = struct.pack(">Q", self.send_seq)
        nonce = self.env.nonce()
        self.send_seq += 1
        return header + nonce + self._send.encrypt(nonce, bytes(payload),
                                                   header)

    def recv(self, frame):
        self.env.require('chan_recv')
        if len(frame) < SEQ_SIZE + NONCE_SIZE + TAG_SIZE:
            raise IntegrityError("frame of %d bytes is truncated"
                                 % len(frame))
        header = bytes(frame[:SEQ_SIZE])
        nonce = bytes(frame[SEQ_SIZE:SEQ_SIZE + NONCE_SIZE])
        try:
            payload = self._recv.decrypt(
                nonce, bytes(frame[SEQ_SIZE + NONCE_SIZE:]), header)
        except InvalidTag:
            raise IntegrityError("frame failed authentication")
        seq, = struct.unpack(">Q", header)
        if seq <= self.last_recv:
            raise ReplayError("frame seq %d replayed (last accepted %d)"
                              % (seq, self.last_recv))
        self.last_recv = seq
        return payload


def chan_send(channel, payload):
    return channel.send(payload)


def chan_recv(channel, frame):
    return channel.recv(frame)
