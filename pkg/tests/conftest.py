"""Shared test helpers: deterministic random generators for trees, labels,
and gold/pred tree pairs, plus brute-force oracles kept independent of the
library code paths they check."""

import random
from collections import Counter
from pathlib import Path

import pytest

from emetools.treebank import Internal, Leaf, Tree, make_label, parse_label

DATA = Path(__file__).parent / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA


# ---------------------------------------------------------------------------
# Random generation

_CATEGORIES = ["IP", "NP", "CP", "PP", "ADJP", "VP", "ADVP", "WNP"]
_TAGS = ["MAT", "SUB", "SBJ", "ACC", "PRN", "QUE", "SPE", "LOC", "DTV"]
_POS = ["N", "VB", "PRO", "ADJ", "P", "D", "NEG", "DOD", "VBP", "NPR", "Q"]
_WORDS = [
    "they", "do", "not", "perish", "king", "cut", "vnto", "lone",
    "muche", "he", "citie", "gouernment", "dutie", "thee",
]
_EMPTY_WORDS = ["*T*-1", "0", "*con*", "*exp*", "*"]


def random_label(rng: random.Random):
    category = rng.choice(_CATEGORIES)
    tags = rng.sample(_TAGS, k=rng.choice([0, 0, 0, 1, 1, 2]))
    coindex = rng.randint(1, 3) if rng.random() < 0.15 else None
    return make_label(category, tags, coindex)


def random_leaf(rng: random.Random, allow_empty=True, allow_punct=True) -> Leaf:
    roll = rng.random()
    if allow_empty and roll < 0.12:
        return Leaf(parse_label(rng.choice(["C", "NP-ACC", "ADVP"])), rng.choice(_EMPTY_WORDS))
    if allow_punct and roll < 0.22:
        word = rng.choice([".", ",", "?"])
        return Leaf(parse_label("." if word in ".?" else ","), word)
    return Leaf(parse_label(rng.choice(_POS)), rng.choice(_WORDS))


def random_tree(rng: random.Random, depth=0, allow_empty=True, allow_punct=True) -> Tree:
    if depth >= 4 or (depth > 0 and rng.random() < 0.35):
        return random_leaf(rng, allow_empty, allow_punct)
    n_children = rng.randint(1, 4)
    children = tuple(
        random_tree(rng, depth + 1, allow_empty, allow_punct) for _ in range(n_children)
    )
    return Internal(random_label(rng), children)


def random_segmentable_tree(rng: random.Random, depth=0) -> Tree:
    """Trees that may carry complex (PRO+N), segmented (ADJ21), and MD0 tags,
    for exercising tag normalization."""
    if depth >= 3 or (depth > 0 and rng.random() < 0.3):
        roll = rng.random()
        if roll < 0.15:
            pos = rng.choice(["PRO+N", "WPRO+ADV+ADV", "ADJ+NS", "P+N"])
        elif roll < 0.3:
            pos = rng.choice(["ADJ21", "ADJ22", "N21", "N22"])
        elif roll < 0.35:
            pos = "MD0"
        else:
            pos = rng.choice(_POS)
        return Leaf(parse_label(pos), rng.choice(_WORDS))
    children = tuple(
        random_segmentable_tree(rng, depth + 1) for _ in range(rng.randint(1, 3))
    )
    return Internal(random_label(rng), children)


def random_tree_pair(rng: random.Random, max_terminals=12):
    """A gold/pred pair over the same terminal yield but with independently
    random bracketings; each side may add its own empty-category leaves."""
    n = rng.randint(1, max_terminals)
    words = []
    for _ in range(n):
        if rng.random() < 0.15:
            word = rng.choice([".", ","])
            words.append((word, word))
        else:
            words.append((rng.choice(_POS), rng.choice(_WORDS)))

    def leaves_for():
        out = [Leaf(parse_label(pos), word) for pos, word in words]
        for _ in range(rng.randint(0, 2)):
            at = rng.randint(0, len(out))
            out.insert(at, Leaf(parse_label(rng.choice(["C", "NP-ACC"])),
                                rng.choice(_EMPTY_WORDS)))
        return out

    def bracket(leaves, depth=0):
        if len(leaves) == 1:
            leaf = leaves[0]
            if rng.random() < 0.3 and depth > 0:
                return Internal(random_label(rng), (leaf,))
            return leaf
        k = rng.randint(2, min(4, len(leaves)))
        cuts = sorted(rng.sample(range(1, len(leaves)), k - 1))
        bounds = [0, *cuts, len(leaves)]
        parts = [leaves[a:b] for a, b in zip(bounds, bounds[1:])]
        return Internal(random_label(rng), tuple(bracket(p, depth + 1) for p in parts))

    def as_tree():
        leaves = leaves_for()
        tree = bracket(leaves)
        if isinstance(tree, Leaf):
            tree = Internal(random_label(rng), (tree,))
        return tree

    return as_tree(), as_tree()


# ---------------------------------------------------------------------------
# Brute-force oracles


def oracle_leaves(tree: Tree):
    if isinstance(tree, Leaf):
        return [tree]
    out = []
    for child in tree.children:
        out.extend(oracle_leaves(child))
    return out


def oracle_nodes(tree: Tree):
    out = [tree]
    if isinstance(tree, Internal):
        for child in tree.children:
            out.extend(oracle_nodes(child))
    return out


def oracle_spans(tree: Tree):
    """Independent span computation: position every non-empty leaf in the
    global yield, then take min/max per node over its own leaf list."""
    positions = {}
    for k, leaf in enumerate(
        l for l in oracle_leaves(tree) if not (l.word.startswith("*") or l.word == "0")
    ):
        positions[id(leaf)] = k
    spans = {}
    for node in oracle_nodes(tree):
        own = [positions[id(l)] for l in oracle_leaves(node) if id(l) in positions]
        spans[id(node)] = (min(own), max(own)) if own else None
    return spans


def oracle_bracket_counts(tree: Tree, delete_pos=frozenset({".", ","})) -> Counter:
    """Independent (category, span) multiset: filter the flat leaf list, then
    enumerate internal nodes."""
    kept = [
        l
        for l in oracle_leaves(tree)
        if not (l.word.startswith("*") or l.word == "0")
        and l.pos.category not in delete_pos
    ]
    position = {id(l): k for k, l in enumerate(kept)}
    counts: Counter = Counter()
    for node in oracle_nodes(tree):
        if isinstance(node, Leaf):
            continue
        own = [position[id(l)] for l in oracle_leaves(node) if id(l) in position]
        if own:
            counts[(node.label.category, min(own), max(own))] += 1
    return counts


def oracle_bracket_score(gold: Tree, pred: Tree):
    gb = oracle_bracket_counts(gold)
    pb = oracle_bracket_counts(pred)
    matched = sum(min(count, pb[key]) for key, count in gb.items())
    return matched, sum(gb.values()), sum(pb.values())
