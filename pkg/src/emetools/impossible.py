"""Detector for parser-output structures that never occur in well-formed
training trees, e.g. a matrix IP immediately over a finite IP-SUB.

Rules are data: the same text format as query suites, minus the ``anchor``
lines, so the inventory can be extended without code changes."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .query import Expr, LabelMatcher, _solutions, parse_suite_text, raw_label
from .treebank import Sentence, terminal_spans


@dataclass(frozen=True)
class StructureRule:
    name: str
    root_pattern: LabelMatcher
    body: Expr
    description: str = ""


@dataclass(frozen=True)
class ScanReport:
    sentence_id: str
    rule: str
    span: tuple[int, int]
    label: str


IMPOSSIBLE_RULES_TEXT = """\
# structures unattested in well-formed training treebanks
def finVerb = DOD|DOP|HVD|HVP|VBD|VBP
def subject = NP-SBJ*

query matrix-ip-over-finite-sub on IP-MAT*:
    node i = IP-SUB*, i child-of root
    leaf v = finVerb, v in-clause i

query question-cp-with-bare-verb on CP-QUE-MAT*:
    leaf v = finVerb, v child-of root

query clause-with-double-subject on IP*|CP*:
    node s1 = subject, s1 child-of root
    node s2 = subject, s2 child-of root, s1 is-not s2
"""

_DESCRIPTIONS = {
    "matrix-ip-over-finite-sub": "a matrix IP immediately dominating a finite IP-SUB",
    "question-cp-with-bare-verb": "a question CP dominating a finite verb with no IP in between",
    "clause-with-double-subject": "a clause with two or more subject children",
}


def rules_from_text(text: str) -> list[StructureRule]:
    suite = parse_suite_text(text)
    return [
        StructureRule(q.name, q.root_pattern, q.body, _DESCRIPTIONS.get(q.name, ""))
        for q in suite.cascade
    ]


def load_rules(path) -> list[StructureRule]:
    with open(path, encoding="utf-8") as fh:
        return rules_from_text(fh.read())


def builtin_impossible_rules() -> list[StructureRule]:
    return rules_from_text(IMPOSSIBLE_RULES_TEXT)


def scan_sentence(sentence: Sentence, rules) -> list[ScanReport]:
    """Report every (node, rule) pair that matches; unlike query cascades
    there is no claiming, so one node may fire several rules."""
    idx = terminal_spans(sentence.tree)
    reports: list[ScanReport] = []
    for n in range(len(idx.nodes)):
        raw = raw_label(idx.nodes[n])
        for rule in rules:
            if not rule.root_pattern.matches(raw):
                continue
            if next(_solutions(rule.body, idx, {"root": n}), None) is None:
                continue
            span = idx.spans[n] or (-1, -1)
            reports.append(ScanReport(sentence.id, rule.name, span, raw))
    return reports


def scan(corpus, rules) -> list[ScanReport]:
    reports: list[ScanReport] = []
    for sentence in corpus:
        reports.extend(scan_sentence(sentence, rules))
    return reports


def summarize(reports) -> Counter:
    return Counter(r.rule for r in reports)
