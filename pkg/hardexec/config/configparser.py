# -*- coding: utf-8 -*-
#
# This file is part of Hardexec, distributed under the GNU GPLv3.

"""Module providing the typed option registry for JSON configuration files"""

from __future__ import print_function
import json
import logging

import six

from .. import ConfigError


class ConfigParser(object):

    """Registry of typed options checked against decoded JSON documents.

    Options are declared once, with the JSON types they may take, a help
    line and a default; a document may name only declared options, and
    every option it omits takes its default.

    >>> p = ConfigParser()
    >>> p.add_option("epc_pages", type=0, default=22)
    >>> p.add_option("allowlist", type=[], default=[])
    >>> p.parse_text('{"allowlist": ["out"]}')
    {'allowlist': ['out'], 'epc_pages': 22}

    Nullable options carry a second type:

    >>> p.add_type("epc_pages", type_new=None)
    >>> p.parse_text('{"epc_pages": null}')
    {'epc_pages': None, 'allowlist': []}

    Undeclared names are rejected:

    >>> p.parse_text('{"page_size": 4096}')
    Traceback (most recent call last):
    hardexec.ConfigError: Unrecognized option 'page_size'
    """

    class Option(object):

        """One declared option.  types holds the accepted Python types of
        the decoded value; keys restricts the keys of a dict value"""

        ATTRIBUTES = ('type', 'default', 'help')

        def __init__(self, name, **attributes):
            unknown = set(attributes) - set(self.ATTRIBUTES)
            if unknown:
                raise ValueError("Unknown option attribute(s) for %s: %s"
                                 % (name, ", ".join(sorted(unknown))))
            self.name = name
            self.types = []
            self.keys = []
            self.default = attributes.get('default')
            self.help = attributes.get('help', "")
            if 'type' in attributes:
                self.add_type(attributes['type'])

        def add_type(self, sample):
            """Accept values of the type of sample (None for null)"""
            kind = type(sample)
            self.types.append(kind)
            # a JSON number without a fraction decodes as int
            if kind is float:
                self.types.extend(six.integer_types)

        def add_key(self, key):
            if dict not in self.types:
                raise RuntimeError("Option %s does not take a dict, "
                                   "it takes %s" % (self.name,
                                                    self.type_names()))
            self.keys.append(key)

        def type_names(self):
            return ",".join(kind.__name__ for kind in self.types)

        def accepts(self, value):
            # bool is an int subclass; only take it where it is declared
            if isinstance(value, bool):
                return bool in self.types
            return type(value) in self.types

        def check(self, value, where):
            if not self.accepts(value):
                raise ConfigError(
                    "Option '%s' in %s is %s %r, expected one of (%s)"
                    % (self.name, where, type(value).__name__, value,
                       self.type_names()))
            if isinstance(value, dict):
                extra = [key for key in value if key not in self.keys]
                if extra:
                    raise ConfigError("Option '%s' in %s has unknown key(s) "
                                      "%s" % (self.name, where,
                                              ", ".join(sorted(extra))))

    def __init__(self, description=None):
        if description is not None and not isinstance(description, str):
            raise ValueError("Description must be a string")
        self.description = description
        # None entries are delimiters between option groups in help()
        self.options = []
        self.config_file = None

    def _declared(self):
        return dict((opt.name, opt) for opt in self.options
                    if opt is not None)

    def __getitem__(self, name):
        try:
            return self._declared()[name]
        except KeyError:
            raise RuntimeError("No such option as %s" % name)

    def add_option(self, name, **attributes):
        """Declare name with its type, default and help line"""
        if name in self._declared():
            raise ValueError("Option declared twice: %s" % name)
        self.options.append(ConfigParser.Option(name, **attributes))

    def add_option_list(self, option_list):
        """Declare every option of a list of dicts with name, default, help
        and type"""
        for option in option_list:
            self.add_option(option['name'], default=option['default'],
                            help=option['help'], type=option['type'])

    def add_type(self, name, type_new):
        """Let option name also take values of the type of type_new"""
        self[name].add_type(type_new)

    def add_allowed_key(self, name, key):
        """Allow key in the dict value of option name"""
        self[name].add_key(key)

    def add_delimiter(self):
        """Start a new group of options"""
        self.options.append(None)

    def help(self):
        """Print the options group by group with their types and defaults"""
        print(self.description or "Options:")
        for opt in self.options:
            if opt is None:
                print("")
            else:
                print('  {0:26}; {1:30}; {2:50}, default={3}'.format(
                    opt.name, opt.type_names(), opt.help,
                    json.dumps(opt.default)))

    def parse_document(self, document):
        """Check a decoded document.  Return a dict holding every declared
        option: the document's value or the default"""
        where = self.config_file or "<document>"
        if not isinstance(document, dict):
            raise ConfigError("%s: expected a JSON object at top level"
                              % where)
        declared = self._declared()
        values = {}
        for name in sorted(document):
            if name not in declared:
                raise ConfigError("Unrecognized option '%s'" % name)
            declared[name].check(document[name], where)
            values[name] = document[name]
        for opt in self.options:
            if opt is not None:
                values.setdefault(opt.name, opt.default)
        logging.debug("configuration %s: %s", where, values)
        return values

    def parse_text(self, text):
        """Decode JSON text and check it"""
        try:
            document = json.loads(text)
        except ValueError as error:
            raise ConfigError("Invalid JSON in %s: %s"
                              % (self.config_file or "<document>", error))
        return self.parse_document(document)

    def parse(self, config_file):
        """Read config_file, decode and check it"""
        self.config_file = config_file
        try:
            with open(config_file, "r") as config:
                text = config.read()
        except (IOError, OSError) as error:
            raise ConfigError("Cannot read %s: %s" % (config_file, error))
        return self.parse_text(text)
