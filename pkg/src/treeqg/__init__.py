"""Dependency-tree template induction and overgenerate-and-rank question generation."""

__version__ = "0.1.0"

from treeqg.conllu import DepTree, Token, parse_conllu, serialize_conllu
from treeqg.template import Template, TemplateSet, parse_template_line, render_template

__all__ = [
    "DepTree",
    "Token",
    "parse_conllu",
    "serialize_conllu",
    "Template",
    "TemplateSet",
    "parse_template_line",
    "render_template",
]
