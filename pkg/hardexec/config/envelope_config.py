# -*- coding: utf-8 -*-
#
# This file is part of Hardexec, distributed under the GNU GPLv3.

"""Module providing the secure-container configuration file parser"""

from .configparser import ConfigParser

DEFAULT_ALLOWLIST = ['chan_recv', 'chan_send', 'file_get', 'file_put', 'out']


class EnvelopeConfigParser(ConfigParser):

    """Parser for the envelope JSON configuration"""

    def __init__(self):
        super(EnvelopeConfigParser, self).__init__(
            description="Envelope configuration options")
        epc_options = [
            {'name': 'epc_pages',
             'default': 22,
             'help': "Resident enclave pages (512 words each), null: "
             "unlimited",
             'type': 0},
            {'name': 'fault_penalty',
             'default': 1000,
             'help': "Cycles charged for a non-resident page access",
             'type': 0}]
        self.add_option_list(epc_options)
        self.add_type('epc_pages', type_new=None)
        self.add_delimiter()
        trust_options = [
            {'name': 'allowlist',
             'default': list(DEFAULT_ALLOWLIST),
             'help': "Service calls the contained program may issue",
             'type': []},
            {'name': 'expected_measurements',
             'default': [],
             'help': "Hex digests of the peers accepted at handshake",
             'type': []}]
        self.add_option_list(trust_options)


def load_envelope_config(path):
    """Parse the envelope configuration at path"""
    return EnvelopeConfigParser().parse(path)
