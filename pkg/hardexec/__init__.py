# -*- coding: utf-8 -*-
#
# This file is part of Hardexec, distributed under the GNU GPLv3.

"""Hardexec: a desk-scale hardened-execution engine.

Software lock-step with rollback recovery, encoded (AN code) execution,
secure-container envelopes and overflow-tolerant memory, measured by
fault-injection campaigns and a microservice recovery simulator."""


class HardexecError(Exception):

    """Root of every error raised on purpose by Hardexec.  The class
    attribute EXIT_CODE is what the command line exits with"""

    EXIT_CODE = 1


class ConfigError(HardexecError):

    """An option, a configuration file or a parameter set violates its
    invariants"""

    EXIT_CODE = 2
