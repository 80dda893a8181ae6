"""Scorers for parser output against gold trees: evalb-style labeled
brackets, function tags on matched brackets, and query-hit diffs."""

from __future__ import annotations

import csv
import logging
from collections import Counter
from dataclasses import dataclass, field

from .errors import ScoreContractError
from .query import QUERY_ALIASES, HitRecord
from .treebank import Internal, Leaf, Sentence, Tree

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvalParams:
    delete_pos_labels: frozenset[str] = frozenset({".", ","})
    strip_function_tags: bool = True
    strip_coindices: bool = True


DEFAULT_PARAMS = EvalParams()


def load_eval_params(path, base: EvalParams = DEFAULT_PARAMS) -> EvalParams:
    """Read scorer settings from an evalb-style parameter file.

    Recognized lines: ``DELETE_LABEL <tag>`` (one per deleted POS tag,
    replacing the default set), ``KEEP_FUNCTION_TAGS``, ``KEEP_COINDICES``.
    ``#`` starts a comment.
    """
    deleted: list[str] = []
    strip_ftags = base.strip_function_tags
    strip_coindices = base.strip_coindices
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if parts[0] == "DELETE_LABEL" and len(parts) == 2:
                deleted.append(parts[1])
            elif parts[0] == "KEEP_FUNCTION_TAGS" and len(parts) == 1:
                strip_ftags = False
            elif parts[0] == "KEEP_COINDICES" and len(parts) == 1:
                strip_coindices = False
            else:
                raise ScoreContractError(f"{path}:{lineno}: cannot parse {line!r}")
    return EvalParams(
        delete_pos_labels=frozenset(deleted) if deleted else base.delete_pos_labels,
        strip_function_tags=strip_ftags,
        strip_coindices=strip_coindices,
    )


def prf(match: int, gold: int, pred: int) -> tuple[float, float, float]:
    """Recall, precision, F1 as percentages.

    Empty-vs-empty scores 100 across the board; a single zero denominator
    zeroes that metric and the F1.
    """
    if match > gold or match > pred:
        raise ScoreContractError(f"match {match} exceeds gold {gold} or pred {pred}")
    if gold == 0 and pred == 0:
        return (100.0, 100.0, 100.0)
    recall = 100.0 * match / gold if gold else 0.0
    precision = 100.0 * match / pred if pred else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return (recall, precision, f1)


# ---------------------------------------------------------------------------
# Bracket scoring


@dataclass(frozen=True)
class BracketScore:
    matched: int
    gold_count: int
    pred_count: int

    @property
    def recall(self) -> float:
        return prf(self.matched, self.gold_count, self.pred_count)[0]

    @property
    def precision(self) -> float:
        return prf(self.matched, self.gold_count, self.pred_count)[1]

    @property
    def f1(self) -> float:
        return prf(self.matched, self.gold_count, self.pred_count)[2]

    def __add__(self, other: "BracketScore") -> "BracketScore":
        return BracketScore(
            self.matched + other.matched,
            self.gold_count + other.gold_count,
            self.pred_count + other.pred_count,
        )


class YieldMismatch(ScoreContractError):
    pass


def _prune(tree: Tree, params: EvalParams) -> Tree | None:
    """Drop empty-category and punctuation terminals; prune nodes left
    childless."""
    if isinstance(tree, Leaf):
        if tree.empty_category or tree.pos.category in params.delete_pos_labels:
            return None
        return tree
    children = tuple(c for c in (_prune(ch, params) for ch in tree.children) if c)
    if not children:
        return None
    return Internal(tree.label, children)


def _yield_words(tree: Tree | None) -> list[str]:
    if tree is None:
        return []
    if isinstance(tree, Leaf):
        return [tree.word]
    out: list[str] = []
    for child in tree.children:
        out.extend(_yield_words(child))
    return out


def _score_label(label, params: EvalParams) -> str:
    if params.strip_function_tags and params.strip_coindices:
        return label.category
    parts = [label.category]
    if not params.strip_function_tags:
        parts.extend(label.function_tags)
    if not params.strip_coindices and label.coindex is not None:
        parts.append(str(label.coindex))
    return "-".join(parts)


def _brackets(tree: Tree, params: EvalParams) -> Counter:
    """Multiset of (label, start, end) for all nonterminals, root included,
    preterminals excluded (terminals are the preterminals here)."""
    out: Counter = Counter()

    def rec(node: Tree, start: int) -> int:
        if isinstance(node, Leaf):
            return start + 1
        end = start
        for child in node.children:
            end = rec(child, end)
        out[(_score_label(node.label, params), start, end - 1)] += 1
        return end

    rec(tree, 0)
    return out


def _check_yields(gold: Sentence, pred: Sentence, params: EvalParams):
    gt = _prune(gold.tree, params)
    pt = _prune(pred.tree, params)
    gw, pw = _yield_words(gt), _yield_words(pt)
    if not gw or gw != pw:
        raise YieldMismatch(
            f"terminal yields differ for {gold.id!r}: gold {gw!r} vs pred {pw!r}"
        )
    return gt, pt


def score_brackets(gold: Sentence, pred: Sentence, params: EvalParams = DEFAULT_PARAMS) -> BracketScore:
    """Labeled-bracket match counts for one sentence pair."""
    gt, pt = _check_yields(gold, pred, params)
    gb, pb = _brackets(gt, params), _brackets(pt, params)
    return BracketScore(sum((gb & pb).values()), sum(gb.values()), sum(pb.values()))


# ---------------------------------------------------------------------------
# Function-tag scoring


@dataclass
class FtagScore:
    """Per-tag (matched, gold, pred) counts from brackets whose bare label and
    span match in gold and pred."""

    per_tag: dict[str, list[int]] = field(default_factory=dict)  # tag -> [m, g, p]

    def _row(self, tag: str) -> list[int]:
        return self.per_tag.setdefault(tag, [0, 0, 0])

    def merge(self, other: "FtagScore") -> "FtagScore":
        for tag, (m, g, p) in other.per_tag.items():
            row = self._row(tag)
            row[0] += m
            row[1] += g
            row[2] += p
        return self

    def prf(self, tag: str) -> tuple[float, float, float]:
        m, g, p = self.per_tag[tag]
        return prf(m, g, p)

    def tags(self) -> list[str]:
        return sorted(self.per_tag)


def _bare_brackets_with_tags(tree: Tree) -> dict[tuple[str, int, int], list[frozenset[str]]]:
    out: dict[tuple[str, int, int], list[frozenset[str]]] = {}

    def rec(node: Tree, start: int) -> int:
        if isinstance(node, Leaf):
            return start + 1
        end = start
        for child in node.children:
            end = rec(child, end)
        key = (node.label.category, start, end - 1)
        out.setdefault(key, []).append(frozenset(node.label.function_tags))
        return end

    rec(tree, 0)
    return out


def score_function_tags(gold: Sentence, pred: Sentence, params: EvalParams = DEFAULT_PARAMS) -> FtagScore:
    """Compare function tags on the nonterminals whose bare labels match:
    a tag on both sides is a match, gold-only a recall error, pred-only a
    precision error."""
    gt, pt = _check_yields(gold, pred, params)
    gold_map = _bare_brackets_with_tags(gt)
    pred_map = _bare_brackets_with_tags(pt)
    score = FtagScore()
    for key, gold_tagsets in gold_map.items():
        pred_tagsets = pred_map.get(key)
        if not pred_tagsets:
            continue
        for g_tags, p_tags in zip(gold_tagsets, pred_tagsets):
            for tag in g_tags | p_tags:
                row = score._row(tag)
                if tag in g_tags and tag in p_tags:
                    row[0] += 1
                    row[1] += 1
                    row[2] += 1
                elif tag in g_tags:
                    row[1] += 1
                else:
                    row[2] += 1
    return score


# ---------------------------------------------------------------------------
# Corpus-level driving


@dataclass
class CorpusBracketReport:
    totals: BracketScore
    skipped: list[tuple[str, str]] = field(default_factory=list)  # (sentence id, error)


def score_bracket_corpus(gold, pred, params: EvalParams = DEFAULT_PARAMS) -> CorpusBracketReport:
    report = CorpusBracketReport(BracketScore(0, 0, 0))
    for g, p in zip(gold, pred):
        try:
            report.totals += score_brackets(g, p, params)
        except YieldMismatch as exc:
            report.skipped.append((g.id, str(exc)))
    return report


@dataclass
class CorpusFtagReport:
    totals: FtagScore
    skipped: list[tuple[str, str]] = field(default_factory=list)


def score_ftag_corpus(gold, pred, params: EvalParams = DEFAULT_PARAMS) -> CorpusFtagReport:
    report = CorpusFtagReport(FtagScore())
    for g, p in zip(gold, pred):
        try:
            report.totals.merge(score_function_tags(g, p, params))
        except YieldMismatch as exc:
            report.skipped.append((g.id, str(exc)))
    return report


def pair_sentences(gold, pred) -> list[tuple[Sentence, Sentence]]:
    """Align two corpora by explicit sentence id when available, else by
    position; mismatched sentence sets are a hard error listing the ids."""
    gold, pred = list(gold), list(pred)
    gold_ids = [s.id for s in gold]
    pred_ids = [s.id for s in pred]
    explicit = all(s.explicit_id for s in gold) and all(s.explicit_id for s in pred)
    if explicit:
        if sorted(gold_ids) != sorted(pred_ids):
            only_gold = sorted(set(gold_ids) - set(pred_ids))[:10]
            only_pred = sorted(set(pred_ids) - set(gold_ids))[:10]
            raise ScoreContractError(
                f"sentence sets differ; only in gold: {only_gold}, only in pred: {only_pred}"
            )
        by_id = {s.id: s for s in pred}
        return [(g, by_id[g.id]) for g in gold]
    if len(gold) != len(pred):
        raise ScoreContractError(
            f"corpora have different sizes ({len(gold)} gold vs {len(pred)} pred) "
            "and no explicit sentence ids to align by"
        )
    return list(zip(gold, pred))


# ---------------------------------------------------------------------------
# Query-hit diffing


@dataclass(frozen=True)
class QueryCounts:
    gold_hits: int
    pred_hits: int
    match: int

    @property
    def miss(self) -> int:
        return self.gold_hits - self.match

    @property
    def false_alarm(self) -> int:
        return self.pred_hits - self.match

    def prf(self) -> tuple[float, float, float]:
        return prf(self.match, self.gold_hits, self.pred_hits)


@dataclass
class QueryDiff:
    per_query: dict[str, QueryCounts]


def _dedupe(hits, side: str) -> dict[tuple[str, str, int], HitRecord]:
    out: dict[tuple[str, str, int], HitRecord] = {}
    for hit in hits:
        if hit.key in out:
            log.warning("duplicate %s hit key %s; ignoring duplicate", side, hit.key)
            continue
        out[hit.key] = hit
    return out


def diff_query_hits(gold_hits, pred_hits) -> QueryDiff:
    """Per-query match/miss/false-alarm counts; hits match when their
    (sentence_id, query, anchor_index) keys are equal."""
    gold_keys = _dedupe(gold_hits, "gold")
    pred_keys = _dedupe(pred_hits, "pred")
    order: list[str] = []
    for key in list(gold_keys) + list(pred_keys):
        if key[1] not in order:
            order.append(key[1])
    diff = QueryDiff({})
    for query in order:
        g = {k for k in gold_keys if k[1] == query}
        p = {k for k in pred_keys if k[1] == query}
        diff.per_query[query] = QueryCounts(len(g), len(p), len(g & p))
    return diff


# ---------------------------------------------------------------------------
# Hit TSV I/O

HIT_COLUMNS = ("query", "sentence_id", "anchor_index", "span_start", "span_end", "clause_label")


def write_hits(hits, fh) -> None:
    writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
    writer.writerow(HIT_COLUMNS)
    for hit in hits:
        writer.writerow(
            (hit.query, hit.sentence_id, hit.anchor_index,
             hit.clause_span[0], hit.clause_span[1], hit.clause_label)
        )


def read_hits(fh) -> list[HitRecord]:
    """Read a hit TSV; the table-style alias ``ignore-inverted`` is folded
    into ``inverted``."""
    reader = csv.reader(fh, delimiter="\t")
    rows = list(reader)
    if not rows:
        return []
    if rows[0] == list(HIT_COLUMNS):
        rows = rows[1:]
    hits = []
    for row in rows:
        if not row:
            continue
        query, sid, anchor, start, end, label = row
        query = QUERY_ALIASES.get(query, query)
        hits.append(HitRecord(sid, query, int(anchor), (int(start), int(end)), label))
    return hits
