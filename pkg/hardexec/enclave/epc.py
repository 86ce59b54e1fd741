# -*- coding: utf-8 -*-
#
# This file is part of Hardexec, distributed under the GNU GPLv3.

"""Module providing the enclave page cache cost model"""

import collections
import logging

from .. import ConfigError

PAGE_SIZE = 4096
WORDS_PER_PAGE = PAGE_SIZE // 8


class EpcModel(object):

    """LRU set of resident pages.  Installed as the interpreter's
    cost_hooks: a resident page costs nothing, a miss costs fault_penalty
    and evicts the least recently used page.  epc_pages None means an
    unbounded cache (compulsory misses only)"""

    def __init__(self, epc_pages=22, fault_penalty=1000):
        if epc_pages is not None and epc_pages < 1:
            raise ConfigError("epc_pages must be >= 1, got %d" % epc_pages)
        if fault_penalty < 0:
            raise ConfigError("fault_penalty must be >= 0, got %d"
                              % fault_penalty)
        self.epc_pages = epc_pages
        self.fault_penalty = fault_penalty
        self.resident = collections.OrderedDict()
        self.hits = 0
        self.misses = 0

    def reset(self):
        self.resident.clear()
        self.hits = 0
        self.misses = 0

    def access(self, page_id):
        """Touch page_id.  Return the surcharge in cycles"""
        if page_id in self.resident:
            self.resident.move_to_end(page_id)
            self.hits += 1
            return 0
        self.misses += 1
        if self.epc_pages is not None \
                and len(self.resident) >= self.epc_pages:
            victim, _ = self.resident.popitem(last=False)
            logging.debug("evicting page %s for %s", victim, page_id)
        self.resident[page_id] = True
        return self.fault_penalty

    def surcharge(self, kind, handle, offset):
        """cost_hooks entry point for load, store and alloc"""
        return self.access((handle, offset // WORDS_PER_PAGE))

    def stats(self):
        return {'hits': self.hits, 'misses': self.misses,
                'epc_pages': self.epc_pages,
                'fault_penalty': self.fault_penalty}


def epc_access(epc, page_id):
    """Surcharge of touching page_id in epc"""
    return epc.access(page_id)
