#!/usr/bin/env python3
#
# pvmw-dp documentation build configuration file.
#
# Only the values that differ from the sphinx-quickstart defaults are set here.

import os
import sys
from typing import Dict

sys.path.insert(0, os.path.abspath('.'))
sys.path.insert(0, os.path.abspath('..'))

from pvmw_dp import VERSION  # noqa: E402

# -- General configuration ------------------------------------------------

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.mathjax', 'sphinxcontrib.apidoc']

# apidoc settings
apidoc_module_dir = '../pvmw_dp'
apidoc_output_dir = 'reference'
apidoc_excluded_paths = ['tests']
apidoc_separate_modules = True

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = 'pvmw-dp'
copyright = '2026, pvmw-dp developers'
author = 'pvmw-dp developers'

# The short X.Y version.
version = '.'.join(VERSION.split('.')[:2])
# The full version, including alpha/beta/rc tags.
release = VERSION

language = 'en'
exclude_patterns = ['_build']
pygments_style = 'sphinx'
todo_include_todos = False

# -- Options for HTML output ----------------------------------------------

html_theme = 'alabaster'
html_static_path = []
htmlhelp_basename = 'pvmw-dpdoc'

# -- Options for LaTeX output ---------------------------------------------

latex_elements: Dict[str, str] = {}
latex_documents = [
    (master_doc, 'pvmw-dp.tex', 'pvmw-dp Documentation', author, 'manual'),
]

# -- Options for manual page output ---------------------------------------

man_pages = [(master_doc, 'pvmw-dp', 'pvmw-dp Documentation', [author], 1)]
