import random

import pytest

from emetools.transform import (
    TransformConfig,
    filter_function_tags,
    normalize_tags,
    partition_for,
    rewrite_segmented,
    simplify_complex_tag,
    split_corpus,
    strip_metadata,
)
from emetools.treebank import (
    Internal,
    Leaf,
    make_sentence,
    read_trees,
    render_tree,
    token_words,
    walk,
)

from conftest import random_segmentable_tree, random_tree


class TestSimplifyComplexTag:
    @pytest.mark.parametrize(
        "tag,expected",
        [("PRO+N", "N"), ("WPRO+ADV+ADV", "ADV"), ("ADJ+NS", "NS"), ("N", "N")],
    )
    def test_rightmost_component(self, tag, expected):
        assert simplify_complex_tag(tag) == expected

    def test_never_contains_plus(self):
        rng = random.Random(1)
        parts = ["PRO", "N", "ADV", "WPRO", "ADJ", "NS"]
        for _ in range(200):
            tag = "+".join(rng.choices(parts, k=rng.randint(1, 4)))
            assert "+" not in simplify_complex_tag(tag)


class TestRewriteSegmented:
    def test_segmented_pair(self):
        tree = read_trees("(ADJ (ADJ21 a) (ADJ22 lone))")[0].tree
        assert render_tree(rewrite_segmented(tree)) == "(ADJ_NT (ADJ a) (ADJ lone))"

    def test_plain_leaf_unchanged(self):
        tree = read_trees("(NP (ADJ alone))")[0].tree
        assert rewrite_segmented(tree) == tree

    def test_no_numbered_tags_identity(self):
        tree = read_trees("(IP-MAT (NP-SBJ (PRO they)) (VB perish))")[0].tree
        assert rewrite_segmented(tree) == tree

    def test_three_digit_suffix_not_a_segment_tag(self):
        tree = read_trees("(X (ADJ213 a))")[0].tree
        assert rewrite_segmented(tree) == tree

    def test_inconsistent_bases_still_stripped(self, caplog):
        tree = read_trees("(X (ADJ21 a) (N22 b))")[0].tree
        with caplog.at_level("WARNING"):
            out = rewrite_segmented(tree)
        assert render_tree(out) == "(X_NT (ADJ a) (N b))"
        assert any("inconsistent" in r.message for r in caplog.records)

    def test_function_tags_survive_nt_marking(self):
        tree = read_trees("(NP-SBJ (PRO21 my) (PRO22 selfe))")[0].tree
        assert render_tree(rewrite_segmented(tree)) == "(NP_NT-SBJ (PRO my) (PRO selfe))"


class TestNormalizeTags:
    def test_complex_tag(self):
        tree = read_trees("(NP (PRO+N hymself))")[0].tree
        assert render_tree(normalize_tags(tree)) == "(NP (N hymself))"

    def test_md0(self):
        tree = read_trees("(IP (MD0 can))")[0].tree
        assert render_tree(normalize_tags(tree)) == "(IP (MD can))"

    def test_already_normalized_fixpoint(self):
        tree = read_trees("(IP-MAT (NP-SBJ (PRO they)) (VB perish))")[0].tree
        assert normalize_tags(tree) == tree

    def test_idempotent_on_random_trees(self):
        rng = random.Random(5)
        for _ in range(300):
            tree = random_segmentable_tree(rng)
            once = normalize_tags(tree)
            assert normalize_tags(once) == once


class TestStripMetadata:
    def _sentences(self, text):
        return read_trees(text)

    def test_meta_rooted_dropped(self):
        kept, dropped = strip_metadata(self._sentences("(META (NP (N stage)))"))
        assert kept == []
        assert len(dropped) == 1
        assert dropped[0].reason == "META-rooted"

    def test_paren_rewrite(self):
        kept, dropped = strip_metadata(
            self._sentences("(IP-MAT (CODE <paren>) (FW x) (CODE <$$paren>))")
        )
        assert not dropped
        assert render_tree(kept[0].tree) == "(IP-MAT (OPAREN -LRB-) (FW x) (CPAREN -RRB-))"

    def test_clean_tree_kept_unchanged(self):
        sents = self._sentences("(IP-MAT (NP-SBJ (PRO they)) (VB perish))")
        kept, dropped = strip_metadata(sents)
        assert kept == sents and not dropped

    def test_code_leaf_removed(self):
        kept, dropped = strip_metadata(self._sentences("(IP (CODE <font>) (VB go))"))
        assert not dropped
        assert render_tree(kept[0].tree) == "(IP (VB go))"
        assert kept[0].tokens == ("go",)

    def test_code_removal_leaving_childless_node_drops_tree(self):
        kept, dropped = strip_metadata(self._sentences("(IP (NP (CODE <x>)) (VB go))"))
        assert kept == []
        assert dropped[0].reason == "metadata-removal-ill-formed"

    def test_break_dropped(self):
        kept, dropped = strip_metadata(self._sentences("(IP (BREAK x) (VB go))"))
        assert kept == []
        assert dropped[0].reason == "BREAK"

    def test_conservation_and_no_metadata_left(self):
        rng = random.Random(11)
        labels = ["CODE", "META", "REF", "BREAK"]
        sents = []
        for k in range(200):
            tree = random_tree(rng)
            if rng.random() < 0.5 and isinstance(tree, Internal):
                extra = Leaf(read_trees(f"(X ({rng.choice(labels)} zz))")[0].tree.children[0].pos, "zz")
                tree = Internal(tree.label, tree.children + (extra,))
            sents.append(make_sentence(f"s{k}", tree))
        kept, dropped = strip_metadata(sents)
        assert len(kept) + len(dropped) == len(sents)
        for s in kept:
            for node in walk(s.tree):
                label = node.pos if hasattr(node, "pos") else node.label
                assert label.category not in ("CODE", "META", "REF", "BREAK")


class TestFilterFunctionTags:
    def test_unretained_tag_removed(self):
        tree = read_trees("(IP-SUB-SPE-PRN (VB go))")[0].tree
        assert render_tree(filter_function_tags(tree)) == "(IP-SUB-PRN (VB go))"

    def test_retained_tags_kept(self):
        tree = read_trees("(CP-QUE-MAT (VB go))")[0].tree
        assert filter_function_tags(tree) == tree

    def test_no_tags_untouched(self):
        tree = read_trees("(NP (N king))")[0].tree
        assert filter_function_tags(tree) == tree

    def test_coindex_preserved(self):
        tree = read_trees("(NP-SPE-1 (N king))")[0].tree
        assert render_tree(filter_function_tags(tree)) == "(NP-1 (N king))"

    def test_leaf_pos_untouched(self):
        tree = read_trees("(NP (NPR-X king))")[0].tree
        assert filter_function_tags(tree) == tree

    def test_structure_invariants_on_random_trees(self):
        rng = random.Random(13)
        for _ in range(200):
            tree = random_tree(rng)
            out = filter_function_tags(tree)
            for before, after in zip(walk(tree), walk(out)):
                if isinstance(before, Leaf):
                    assert before == after
                else:
                    assert before.label.category == after.label.category
                    assert before.label.coindex == after.label.coindex
                    assert len(before.children) == len(after.children)
            assert list(token_words(tree)) == list(token_words(out))

    def test_disjointness_validated(self):
        with pytest.raises(ValueError):
            TransformConfig(
                retained_function_tags=frozenset({"MAT"}),
                excluded_rare_tags=frozenset({"MAT"}),
            )


class TestSplitCorpus:
    def test_prefix_rule(self):
        got = split_corpus(["locke.psd", "essex.psd", "milton.psd"])
        assert [a.partition for a in got] == ["dev", "test", "train"]

    def test_empty(self):
        assert split_corpus([]) == []

    def test_uses_basename(self):
        assert partition_for("/corpus/essex-1580.psd") == "test"
        assert partition_for("corpus/milton.psd") == "train"
