# Sphinx configuration for the XL-RA documentation.

import os
import sys
sys.path.insert(0, os.path.abspath('../..'))

project = 'XL-RA'
author = 'XL-RA developers'
copyright = '2026, ' + author
release = '1.0.0'

# Docstrings are numpy style with underscore-underlined section headers.
extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.napoleon',
    'sphinx.ext.viewcode',
    'sphinx.ext.todo',
]
napoleon_numpy_docstring = True
napoleon_google_docstring = False
autodoc_member_order = 'bysource'
todo_include_todos = True

master_doc = 'index'
exclude_patterns = []
pygments_style = 'sphinx'

html_theme = 'alabaster'
html_static_path = []
