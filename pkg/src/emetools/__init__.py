"""Toolkit for Penn-style historical treebanks: PPCEME annotation cleanup,
Early Modern English tokenization, EEBO text extraction, CorpusSearch-style
query cascades, and parser-output scoring."""

__version__ = "0.1.0"

from .errors import DataError  # noqa: F401
from .treebank import (  # noqa: F401
    Internal,
    Leaf,
    NodeLabel,
    Sentence,
    parse_label,
    read_trees,
    render_tree,
    terminal_spans,
)
