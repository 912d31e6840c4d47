"""Morphosyntactic tagging and joint tagging-parsing with greedy template selection."""

__version__ = "0.1.0"

from tagsel.corpus import Sentence, Token, read_conll, write_conll

__all__ = ["Sentence", "Token", "read_conll", "write_conll", "__version__"]
