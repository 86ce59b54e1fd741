# -*- coding: utf-8 -*-
#
# This file is part of Hardexec, distributed under the GNU GPLv3.

"""Module providing the seeded random streams.  Every consumer keys its
own stream, so a draw never depends on what other streams consumed"""

import numpy

from .. import ConfigError

# stream keys of the consumers
KEY_BUILD = 0
KEY_CAMPAIGN = 1
KEY_SIMULATION = 2
KEY_ENVELOPE = 3


def check_seed(seed):
    """Reject anything numpy would not take as a 64-bit seed"""
    if seed is None or isinstance(seed, bool) or not isinstance(seed, int) \
            or not 0 <= seed < 1 << 64:
        raise ConfigError("seed must be an integer in [0, 2**64), got %r"
                          % (seed,))
    return seed


def stream(seed, *key):
    """Counter-based generator for (seed, key)"""
    check_seed(seed)
    sequence = numpy.random.SeedSequence(seed, spawn_key=tuple(key))
    return numpy.random.Generator(numpy.random.Philox(sequence))
