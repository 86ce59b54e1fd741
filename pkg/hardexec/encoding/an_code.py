# -*- coding: utf-8 -*-
#
# This file is part of Hardexec, distributed under the GNU GPLv3.

"""Dual AN code arithmetic.

A functional value x lives as the pair (A1*x, A2*x).  Addition and
subtraction are componentwise; multiplication takes the double-width
product per copy and divides one A back out.  A pair is a member of the
code iff both copies are multiples of their constant and decode to the
same value, so a flipped bit (a change of +/- 2**k, never a multiple of
an odd prime) always lands outside the code."""

import collections
import logging

from .. import HardexecError, ConfigError

FUNCTIONAL_BITS = 31
WORD_MAX = (1 << 63) - 1

RESIDUE1 = 'residue1'
RESIDUE2 = 'residue2'
CROSS_MISMATCH = 'cross-mismatch'


class CodeViolation(HardexecError):

    """A codeword pair is not a member of the code: a wrong execution was
    detected"""

    EXIT_CODE = 3

    def __init__(self, reason):
        super(CodeViolation, self).__init__("code violation: %s" % reason)
        self.reason = reason


class RangeError(HardexecError, ValueError):

    """A functional value does not fit the encodable range"""

    EXIT_CODE = 2


def is_odd_prime(number):
    """Trial division; the constants are small"""
    if number < 3 or number % 2 == 0:
        return False
    divisor = 3
    while divisor * divisor <= number:
        if number % divisor == 0:
            return False
        divisor += 2
    return True


DEFAULT_PRIME_POOL = tuple(n for n in range(251, 1022) if is_odd_prime(n))


class EncodingParams(object):

    """The two code constants, the pool they are drawn from and the
    functional range they protect"""

    def __init__(self, A1=251, A2=257, prime_pool=DEFAULT_PRIME_POOL,
                 functional_bits=FUNCTIONAL_BITS):
        if A1 == A2:
            raise ConfigError("A1 and A2 must differ (both are %d)" % A1)
        for name, value in (('A1', A1), ('A2', A2)):
            if not is_odd_prime(value):
                raise ConfigError("%s=%d is not an odd prime" % (name, value))
        if max(A1, A2) << functional_bits > WORD_MAX:
            raise ConfigError(
                "codewords of A=%d overflow a 64-bit word" % max(A1, A2))
        self.A1 = A1
        self.A2 = A2
        self.prime_pool = tuple(prime_pool)
        self.functional_bits = functional_bits

    @property
    def bound(self):
        """Exclusive bound on |x| for functional values"""
        return 1 << self.functional_bits

    def as_header(self):
        """Fields of the '#! delta' program header"""
        return {'A1': self.A1, 'A2': self.A2}

    def __eq__(self, other):
        return (isinstance(other, EncodingParams)
                and (self.A1, self.A2, self.functional_bits)
                == (other.A1, other.A2, other.functional_bits))

    def __ne__(self, other):
        return not self.__eq__(other)

    def __repr__(self):
        return "EncodingParams(A1=%d, A2=%d)" % (self.A1, self.A2)


DEFAULT_PARAMS = EncodingParams()


def draw_params(rng, prime_pool=DEFAULT_PRIME_POOL):
    """Pseudo-randomize the code for one build: two distinct constants
    drawn from prime_pool with the numpy Generator rng"""
    for candidate in prime_pool:
        if not is_odd_prime(candidate):
            raise ConfigError("prime pool holds %d, not an odd prime"
                              % candidate)
    first, second = rng.choice(len(prime_pool), size=2, replace=False)
    params = EncodingParams(int(prime_pool[first]), int(prime_pool[second]),
                            prime_pool)
    logging.debug("drew %r", params)
    return params


EncodedPair = collections.namedtuple('EncodedPair', ['c1', 'c2'])


def check_pair(c1, c2, A1, A2):
    """Membership test.  Return None for a code member, else the reason"""
    if c1 % A1:
        return RESIDUE1
    if c2 % A2:
        return RESIDUE2
    if c1 // A1 != c2 // A2:
        return CROSS_MISMATCH
    return None


def _check_range(value, params):
    if not -params.bound < value < params.bound:
        raise RangeError("functional value %d outside |x| < 2**%d"
                         % (value, params.functional_bits))


def encode(value, params=DEFAULT_PARAMS):
    """Map a functional value into the code"""
    _check_range(value, params)
    return EncodedPair(params.A1 * value, params.A2 * value)


def decode_checked(pair, params=DEFAULT_PARAMS):
    """Return the functional value of pair, raising CodeViolation if it is
    not a member of the code"""
    reason = check_pair(pair.c1, pair.c2, params.A1, params.A2)
    if reason is not None:
        raise CodeViolation(reason)
    return pair.c1 // params.A1


def _bounded(pair, params):
    """Reject results whose decoded magnitude leaves the functional range"""
    if abs(pair.c1) >= params.A1 * params.bound \
            or abs(pair.c2) >= params.A2 * params.bound:
        raise RangeError("encoded result %r leaves the functional range"
                         % (pair,))
    return pair


def enc_add(a, b, params=DEFAULT_PARAMS):
    """Encoded addition"""
    return _bounded(EncodedPair(a.c1 + b.c1, a.c2 + b.c2), params)


def enc_sub(a, b, params=DEFAULT_PARAMS):
    """Encoded subtraction"""
    return _bounded(EncodedPair(a.c1 - b.c1, a.c2 - b.c2), params)


def exact_product(x, y, constant):
    """Double-width product of two codewords divided by their constant.
    Return None if the division leaves a remainder"""
    quotient, remainder = divmod(x * y, constant)
    if remainder:
        return None
    return quotient


def enc_mul(a, b, params=DEFAULT_PARAMS):
    """Encoded multiplication"""
    c1 = exact_product(a.c1, b.c1, params.A1)
    if c1 is None:
        raise CodeViolation(RESIDUE1)
    c2 = exact_product(a.c2, b.c2, params.A2)
    if c2 is None:
        raise CodeViolation(RESIDUE2)
    # a corrupted factor survives the division when the other factor is a
    # codeword; membership comes before the range check
    reason = check_pair(c1, c2, params.A1, params.A2)
    if reason is not None:
        raise CodeViolation(reason)
    return _bounded(EncodedPair(c1, c2), params)
