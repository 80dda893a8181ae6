"""PPCEME corpus normalization: POS-tag simplification, segmented-token
rewriting, metadata removal, function-tag filtering, and corpus splitting."""

from __future__ import annotations

import logging
import os
import re
from dataclasses import dataclass

from .treebank import (
    Internal,
    Leaf,
    NodeLabel,
    Sentence,
    Tree,
    make_label,
    make_sentence,
    node_label,
    walk,
)

log = logging.getLogger(__name__)

RETAINED_FUNCTION_TAGS = frozenset(
    {"MAT", "SUB", "IMP", "INF", "QUE", "SBJ", "ACC", "DTV", "VOC", "PRN"}
)
EXCLUDED_RARE_TAGS = frozenset({"YYY", "ELAB", "XXX", "TPC", "TAG"})
METADATA_LABELS = frozenset({"CODE", "META", "REF", "BREAK"})


@dataclass(frozen=True)
class TransformConfig:
    retained_function_tags: frozenset[str] = RETAINED_FUNCTION_TAGS
    excluded_rare_tags: frozenset[str] = EXCLUDED_RARE_TAGS
    metadata_labels: frozenset[str] = METADATA_LABELS

    def __post_init__(self):
        overlap = self.retained_function_tags & self.excluded_rare_tags
        if overlap:
            raise ValueError(f"tags both retained and excluded: {sorted(overlap)}")


DEFAULT_CONFIG = TransformConfig()


def simplify_complex_tag(tag: str) -> str:
    """Reduce a complex POS tag to its rightmost component (``PRO+N`` -> ``N``)."""
    return tag.rsplit("+", 1)[-1]


def _with_category(label: NodeLabel, category: str) -> NodeLabel:
    if category == label.category:
        return label
    return make_label(category, label.function_tags, label.coindex)


# segmented POS tags carry a part-count/position pair: exactly two digits
_SEGMENT = re.compile(r"^(?P<base>.*\D)(?P<digits>\d{2})$")


def rewrite_segmented(tree: Tree) -> Tree:
    """Strip the digits from numbered segment tags (``ADJ21``) and mark their
    parent with ``_NT``, e.g. ``(ADJ (ADJ21 a) (ADJ22 lone))`` becomes
    ``(ADJ_NT (ADJ a) (ADJ lone))``."""
    if isinstance(tree, Leaf):
        m = _SEGMENT.match(tree.pos.category)
        return Leaf(_with_category(tree.pos, m["base"]), tree.word) if m else tree
    children = []
    seg_bases = []
    for child in tree.children:
        if isinstance(child, Leaf):
            m = _SEGMENT.match(child.pos.category)
            if m:
                seg_bases.append(m["base"])
                child = Leaf(_with_category(child.pos, m["base"]), child.word)
            children.append(child)
        else:
            children.append(rewrite_segmented(child))
    label = tree.label
    if seg_bases:
        if len(set(seg_bases)) > 1:
            log.warning(
                "inconsistent segment bases %s under %s", sorted(set(seg_bases)), label.raw
            )
        label = _with_category(label, label.category + "_NT")
    return Internal(label, tuple(children))


def normalize_tags(tree: Tree) -> Tree:
    """Full POS normalization: complex-tag simplification, MD0 -> MD, then the
    segmented-token rewrite.  Idempotent."""

    def fix_leaves(node: Tree) -> Tree:
        if isinstance(node, Leaf):
            category = simplify_complex_tag(node.pos.category)
            if category == "MD0":
                category = "MD"
            return Leaf(_with_category(node.pos, category), node.word)
        return Internal(node.label, tuple(fix_leaves(c) for c in node.children))

    return rewrite_segmented(fix_leaves(tree))


@dataclass(frozen=True)
class DroppedSentence:
    sentence: Sentence
    reason: str


class _IllFormed(Exception):
    pass


def _rewrite_parens(node: Tree) -> Tree:
    if isinstance(node, Leaf):
        if node.pos.category == "CODE":
            if node.word == "<paren>":
                return Leaf(make_label("OPAREN"), "-LRB-")
            if node.word == "<$$paren>":
                return Leaf(make_label("CPAREN"), "-RRB-")
        return node
    return Internal(node.label, tuple(_rewrite_parens(c) for c in node.children))


def _remove_metadata(node: Tree, labels: frozenset[str]) -> Tree | None:
    if isinstance(node, Leaf):
        return None if node.pos.category in labels else node
    if node.label.category in labels:
        return None
    kept = tuple(c for c in (_remove_metadata(ch, labels) for ch in node.children) if c)
    if not kept:
        raise _IllFormed
    return Internal(node.label, kept)


def _contains_category(tree: Tree, category: str) -> bool:
    return any(node_label(n).category == category for n in walk(tree))


def strip_metadata(
    sentences, cfg: TransformConfig = DEFAULT_CONFIG
) -> tuple[list[Sentence], list[DroppedSentence]]:
    """Rewrite CODE parentheses to real brackets, then drop or clean trees
    carrying metadata.

    Dropped: trees rooted in META, trees containing a BREAK element, and
    trees where removing a CODE/META/REF subtree would leave a node with no
    children.  Elsewhere the metadata subtrees are simply removed.
    """
    removable = cfg.metadata_labels - {"BREAK"}
    kept: list[Sentence] = []
    dropped: list[DroppedSentence] = []
    for sentence in sentences:
        tree = _rewrite_parens(sentence.tree)
        sentence = make_sentence(sentence.id, tree, sentence.explicit_id)
        root = tree.label.category if isinstance(tree, Internal) else tree.pos.category
        if root == "META":
            dropped.append(DroppedSentence(sentence, "META-rooted"))
            continue
        if "BREAK" in cfg.metadata_labels and _contains_category(tree, "BREAK"):
            dropped.append(DroppedSentence(sentence, "BREAK"))
            continue
        if root in removable:
            dropped.append(DroppedSentence(sentence, "metadata-rooted"))
            continue
        try:
            cleaned = _remove_metadata(tree, removable)
        except _IllFormed:
            dropped.append(DroppedSentence(sentence, "metadata-removal-ill-formed"))
            continue
        if cleaned is None:
            dropped.append(DroppedSentence(sentence, "metadata-rooted"))
            continue
        kept.append(make_sentence(sentence.id, cleaned, sentence.explicit_id))
    return kept, dropped


def filter_function_tags(tree: Tree, cfg: TransformConfig = DEFAULT_CONFIG) -> Tree:
    """Keep only the retained function tags on nonterminals; POS labels and
    coindices are untouched."""
    if isinstance(tree, Leaf):
        return tree
    label = tree.label
    tags = tuple(t for t in label.function_tags if t in cfg.retained_function_tags)
    if tags != label.function_tags:
        label = make_label(label.category, tags, label.coindex)
    return Internal(label, tuple(filter_function_tags(c, cfg) for c in tree.children))


@dataclass(frozen=True)
class SplitAssignment:
    partition: str  # train | dev | test
    file: str


def partition_for(path: str) -> str:
    """Dev files start with ``l``, test files with ``e``; everything else trains."""
    name = os.path.basename(path)
    if name.startswith("l"):
        return "dev"
    if name.startswith("e"):
        return "test"
    return "train"


def split_corpus(files) -> list[SplitAssignment]:
    return [SplitAssignment(partition_for(f), f) for f in files]
