# -*- coding: utf-8 -*-
#
# BIZ documentation build configuration file.

import os
import re
import sys

sys.path.insert(0, os.path.abspath('..'))

## Version is read from the package without importing it
with open(os.path.join('..', 'BIZ', '__init__.py')) as _init:
    release = re.search(r'^__version__ = [\'"]([^\'"]*)[\'"]',
                        _init.read(), re.M).group(1)
version = '.'.join(release.split('.')[:2])

project = u'BIZ'
copyright = u'2026, BIZ developers'
author = u'BIZ developers'

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.mathjax',
]

## The cluster is never needed to build the docs
autodoc_mock_imports = ["ipyparallel"]
autodoc_member_order = 'bysource'

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'
exclude_patterns = [u'_build', 'Thumbs.db', '.DS_Store']
pygments_style = 'sphinx'

html_theme = 'default'
htmlhelp_basename = 'BIZdoc'

man_pages = [
    (master_doc, 'biz', u'BIZ Documentation', [author], 1)
]
