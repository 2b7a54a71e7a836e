"""Corpus-engineering toolkit for historical treebank compilation."""
__version__ = "0.1.0"
