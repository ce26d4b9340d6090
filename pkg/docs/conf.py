# Configuration file for the Sphinx documentation builder of susy-dfs.
import os
import sys
import datetime

sys.path.insert(0, os.path.abspath('..'))
import susy_dfs

# -- General configuration ------------------------------------------------

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.doctest', 'sphinx.ext.coverage',
              'sphinx.ext.imgmath', 'sphinx.ext.viewcode']

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = 'susy-dfs'
author = 'The susy-dfs developers'
this_year = datetime.date.today().year
copyright = '%s, %s' % (this_year, author)

# The version comes from the installed distribution; a source checkout reports an empty string.
version = susy_dfs.__version__ or 'dev'
release = version

language = "en"
exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']
pygments_style = 'sphinx'
todo_include_todos = False

autodoc_member_order = 'bysource'

# -- Options for HTML output ----------------------------------------------

html_theme = 'alabaster'
html_theme_options = {
    'fixed_sidebar': True,
}
html_static_path = ['_static']
htmlhelp_basename = 'susy-dfsdoc'

# -- Options for LaTeX output ---------------------------------------------

latex_elements = {}
latex_documents = [
    (master_doc, 'susy-dfs.tex', 'susy-dfs Documentation', author, 'manual'),
]

# -- Options for manual page output ---------------------------------------

man_pages = [
    (master_doc, 'susy-dfs', 'susy-dfs Documentation', [author], 1)
]

texinfo_documents = [
    (master_doc, 'susy-dfs', 'susy-dfs Documentation', author, 'susy-dfs',
     'Decoherence-free subspaces in oscillator networks.', 'Miscellaneous'),
]

html_sidebars = {'**': ['about.html', 'navigation.html', 'relations.html', 'searchbox.html']}
