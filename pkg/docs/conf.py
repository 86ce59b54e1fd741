# -*- coding: utf-8 -*-
#
# Sphinx configuration of the Hardexec reference manual.

import os
import sys

HERE = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, os.path.dirname(HERE))

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.doctest']
autodoc_member_order = 'bysource'

master_doc = 'index'
source_suffix = '.rst'
exclude_patterns = ['_build']

project = u'Hardexec'
copyright = u'2026, Hardexec developers'

_version = {}
with open(os.path.join(HERE, os.pardir, 'hardexec', '_version.py')) as f:
    exec(f.read(), _version)
version = release = _version.get('__version__', '0.0')

html_theme = 'nature'
man_pages = [('index', 'hardexec', u'harden, run, inject and simulate',
              [u'Hardexec developers'], 1)]
