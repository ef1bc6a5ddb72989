# Sphinx configuration for the graphdistill docs
import os
import sys

sys.path.insert(0, os.path.dirname(os.getcwd()))

import graphdistill  # noqa: E402

extensions = ["sphinx.ext.autodoc", "sphinx.ext.viewcode"]
templates_path = ["_templates"]
source_suffix = ".rst"
master_doc = "index"

project = "graphdistill"
copyright = "2026, graphdistill developers"
version = graphdistill.__version__
release = graphdistill.__version__

exclude_patterns = ["_build"]
pygments_style = "sphinx"

html_theme = "default"
html_static_path = ["_static"]
htmlhelp_basename = "graphdistilldoc"

man_pages = [
    ("index", "graphdistill", "graphdistill Documentation", ["graphdistill developers"], 1)
]
