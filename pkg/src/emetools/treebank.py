"""Tree data model and bracketed-format I/O for Penn-style historical corpora.

Trees are immutable values: every transformation builds new nodes, so trees
can be shared freely between threads and reused as dictionary keys in
identity-based indexes.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Union

from .errors import LabelError, TreeParseError


@dataclass(frozen=True, slots=True)
class NodeLabel:
    """A parsed constituent or POS label such as ``CP-QUE-MAT`` or ``NP-SBJ-1``.

    ``raw`` preserves the label exactly as read; ``category`` is the first
    dash component, ``function_tags`` the remaining components, and
    ``coindex`` a trailing all-digit component when present.
    """

    raw: str
    category: str
    function_tags: tuple[str, ...] = ()
    coindex: int | None = None

    @property
    def nt_marker(self) -> bool:
        """True for categories rewritten from segmented POS tags (``ADJ_NT``)."""
        return self.category.endswith("_NT")

    def rendered(self) -> str:
        """Rebuild the label text from its parts."""
        parts = [self.category, *self.function_tags]
        if self.coindex is not None:
            parts.append(str(self.coindex))
        return "-".join(parts)


def make_label(category: str, function_tags=(), coindex: int | None = None) -> NodeLabel:
    tags = tuple(function_tags)
    parts = [category, *tags]
    if coindex is not None:
        parts.append(str(coindex))
    return NodeLabel("-".join(parts), category, tags, coindex)


@lru_cache(maxsize=None)
def parse_label(raw: str) -> NodeLabel:
    """Split a label into category, function tags, and trailing coindex.

    Only a trailing all-digit dash component counts as a coindex; digits
    embedded in a component (``ADJ21``) stay part of that component.
    """
    if not raw:
        raise LabelError("empty label")
    if any(ch.isspace() for ch in raw):
        raise LabelError(f"label contains whitespace: {raw!r}")
    parts = raw.split("-")
    if "" in parts:
        # leading/trailing/doubled dashes (e.g. a '-LRB-' style token used as
        # a tag): treat the whole string as an opaque category
        return NodeLabel(raw, raw, (), None)
    coindex = None
    rest = parts[1:]
    if rest and rest[-1].isascii() and rest[-1].isdigit():
        coindex = int(rest[-1])
        rest = rest[:-1]
    return NodeLabel(raw, parts[0], tuple(rest), coindex)


def is_empty_word(word: str) -> bool:
    """Empty categories: traces and null elements (``*T*-1``, ``*con*``, ``0``)."""
    return word.startswith("*") or word == "0"


@dataclass(frozen=True, slots=True)
class Leaf:
    """A terminal ``(POS word)`` node."""

    pos: NodeLabel
    word: str

    @property
    def empty_category(self) -> bool:
        return is_empty_word(self.word)


@dataclass(frozen=True, slots=True)
class Internal:
    """A nonterminal node with at least one child."""

    label: NodeLabel
    children: tuple["Tree", ...]

    def __post_init__(self):
        if not self.children:
            raise ValueError(f"internal node {self.label.raw!r} has no children")


Tree = Union[Internal, Leaf]

# Distinguished label of the PPCEME outer wrapper "( ... (ID ...))"; wrappers
# are unwrapped by read_trees and normally never appear inside sentences.
WRAPPER_LABEL = NodeLabel("", "", (), None)


@dataclass(frozen=True, slots=True)
class Sentence:
    """One tree plus its id and non-empty terminal words.

    ``explicit_id`` records whether the id came from an ``(ID ...)`` node (as
    opposed to being synthesized from the file name and ordinal).
    """

    id: str
    tree: Tree
    tokens: tuple[str, ...]
    explicit_id: bool = False


def make_sentence(sid: str, tree: Tree, explicit_id: bool = False) -> Sentence:
    return Sentence(sid, tree, tuple(token_words(tree)), explicit_id)


def walk(tree: Tree) -> Iterator[Tree]:
    """All nodes in preorder."""
    stack = [tree]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, Internal):
            stack.extend(reversed(node.children))


def leaves(tree: Tree) -> Iterator[Leaf]:
    for node in walk(tree):
        if isinstance(node, Leaf):
            yield node


def token_words(tree: Tree) -> Iterator[str]:
    """Words of non-empty terminals, left to right."""
    for leaf in leaves(tree):
        if not leaf.empty_category:
            yield leaf.word


def raw_label(node: Tree) -> str:
    return node.pos.raw if isinstance(node, Leaf) else node.label.raw


def node_label(node: Tree) -> NodeLabel:
    return node.pos if isinstance(node, Leaf) else node.label


# ---------------------------------------------------------------------------
# Reading


_TOKEN = re.compile(r"[()]|[^\s()]+")


def _byte_offset(text: str, char_pos: int) -> int:
    return len(text[:char_pos].encode("utf-8"))


def read_trees(source, filename: str = "<string>") -> list[Sentence]:
    """Parse bracketed trees from a string or file-like object.

    Accepts plain trees and the PPCEME wrapper convention
    ``( (IP-MAT ...) (ID file,1.2))``; the ID content becomes the sentence id
    and the wrapper/ID nodes are removed.  Sentences without an ID node get a
    synthesized ``filename:ordinal`` id.
    """
    text = source.read() if hasattr(source, "read") else source
    toks = [(m.group(), m.start()) for m in _TOKEN.finditer(text)]
    sentences: list[Sentence] = []
    i = 0
    while i < len(toks):
        tok, pos = toks[i]
        if tok != "(":
            raise TreeParseError(f"expected '(' but found {tok!r}", _byte_offset(text, pos))
        tree, i = _parse_node(toks, i, text)
        sentences.append(_to_sentence(tree, filename, len(sentences) + 1))
    return sentences


def _parse_node(toks, i, text) -> tuple[Tree, int]:
    open_pos = toks[i][1]
    i += 1

    def fail(msg, pos):
        raise TreeParseError(msg, _byte_offset(text, pos))

    if i >= len(toks):
        fail("unbalanced parentheses", open_pos)
    label = None
    if toks[i][0] not in "()":
        label = toks[i][0]
        i += 1
    word = None
    children: list[Tree] = []
    while True:
        if i >= len(toks):
            fail("unbalanced parentheses", open_pos)
        tok, pos = toks[i]
        if tok == ")":
            i += 1
            break
        if tok == "(":
            if word is not None:
                fail("subtree after leaf word", pos)
            child, i = _parse_node(toks, i, text)
            children.append(child)
        else:
            if label is None or children or word is not None:
                fail(f"unexpected token {tok!r}", pos)
            word = tok
            i += 1
    if word is not None:
        return Leaf(parse_label(label), word), i
    if not children:
        fail("leaf with no word" if label is not None else "empty node", open_pos)
    if label is None:
        return Internal(WRAPPER_LABEL, tuple(children)), i
    return Internal(parse_label(label), tuple(children)), i


def _id_text(node: Tree) -> str:
    if isinstance(node, Leaf):
        return node.word
    return " ".join(leaf.word for leaf in leaves(node))


def _to_sentence(tree: Tree, filename: str, ordinal: int) -> Sentence:
    sid = f"{filename}:{ordinal}"
    explicit = False
    if isinstance(tree, Internal) and tree.label is WRAPPER_LABEL:
        content = []
        for child in tree.children:
            if node_label(child).category == "ID":
                sid = _id_text(child)
                explicit = True
            else:
                content.append(child)
        if len(content) == 1:
            tree = content[0]
        elif content:
            tree = Internal(WRAPPER_LABEL, tuple(content))
        # wrapper containing only an ID node: keep the wrapper so nothing
        # is silently lost; real corpora never do this
    return make_sentence(sid, tree, explicit)


def read_trees_file(path) -> list[Sentence]:
    with open(path, encoding="utf-8") as fh:
        return read_trees(fh, filename=os.path.basename(str(path)))


# ---------------------------------------------------------------------------
# Writing


def render_tree(tree: Tree) -> str:
    """Canonical single-space, single-line rendering; labels via ``raw``."""
    if isinstance(tree, Leaf):
        return f"({tree.pos.raw} {tree.word})"
    inner = " ".join(render_tree(c) for c in tree.children)
    return f"({tree.label.raw} {inner})"


def render_sentence(sentence: Sentence, include_id: bool | None = None) -> str:
    """Render one sentence; explicit ids are written back as an ID wrapper."""
    if include_id is None:
        include_id = sentence.explicit_id
    body = render_tree(sentence.tree)
    if include_id:
        return f"( {body} (ID {sentence.id}))"
    return body


def write_sentences(sentences, fh, include_id: bool | None = None) -> None:
    for sentence in sentences:
        fh.write(render_sentence(sentence, include_id))
        fh.write("\n")


# ---------------------------------------------------------------------------
# Terminal spans


class SpanIndex:
    """Preorder node table with parent links and inclusive terminal spans.

    Non-empty terminals are numbered 0..n-1 left to right; every node's span
    is ``(start, end)`` over its non-empty terminal descendants, or ``None``
    for nodes dominating only empty categories.  Lookup is by node identity.
    """

    __slots__ = ("tree", "nodes", "parents", "spans", "terminals", "_by_id")

    def __init__(self, tree: Tree):
        self.tree = tree
        self.nodes: list[Tree] = []
        self.parents: list[int | None] = []
        self.spans: list[tuple[int, int] | None] = []
        self.terminals: list[int] = []
        self._by_id: dict[int, int] = {}
        self._build(tree, None)

    def _build(self, node: Tree, parent: int | None) -> tuple[int, int] | None:
        n = len(self.nodes)
        self.nodes.append(node)
        self.parents.append(parent)
        self.spans.append(None)
        self._by_id[id(node)] = n
        if isinstance(node, Leaf):
            if node.empty_category:
                return None
            k = len(self.terminals)
            self.terminals.append(n)
            self.spans[n] = (k, k)
            return self.spans[n]
        span = None
        for child in node.children:
            child_span = self._build(child, n)
            if child_span is not None:
                span = child_span if span is None else (span[0], child_span[1])
        self.spans[n] = span
        return span

    def index_of(self, node: Tree) -> int:
        return self._by_id[id(node)]

    def span(self, node: Tree) -> tuple[int, int] | None:
        return self.spans[self.index_of(node)]

    def items(self):
        return zip(self.nodes, self.spans)

    def __len__(self) -> int:
        return len(self.nodes)


def terminal_spans(tree: Tree) -> SpanIndex:
    """Annotate every node with its span over non-empty terminals."""
    return SpanIndex(tree)
