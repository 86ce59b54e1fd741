# -*- coding: utf-8 -*-
#
# This file is part of Hardexec, distributed under the GNU GPLv3.

"""Module providing the transform lookup and the hardening pipelines"""

import logging

from ..encoding.an_code import draw_params
from .transform import TransformError
from ..util.rng import stream, KEY_BUILD

HARDEN_MODES = ('haft', 'delta', 'both')


def load_transform(name, **options):
    """Return an initialized instance of the transform called name"""
    from .haft import HaftTransform
    from .delta import DeltaTransform
    available_transforms = {'haft': HaftTransform,
                            'delta': DeltaTransform}
    if name in available_transforms:
        logging.debug("Transform to be used found: %s", name)
        return available_transforms[name](**options)
    raise TransformError("Unknown transform: %s    Supported transforms are %s"
                         % (name, ", ".join(sorted(available_transforms))))


def harden(program, mode, seed=None, haft_cfg=None, params=None):
    """Run the pipeline of mode over program.  The encoded modes draw
    their constants from seed unless params is given"""
    if mode not in HARDEN_MODES:
        raise TransformError("Unknown hardening mode: %s" % mode)
    hardened = program
    if mode in ('delta', 'both'):
        if params is None and seed is not None:
            params = draw_params(stream(seed, KEY_BUILD))
        hardened = load_transform('delta', params=params).apply(hardened)
    if mode in ('haft', 'both'):
        hardened = load_transform('haft', cfg=haft_cfg).apply(hardened)
    return hardened
