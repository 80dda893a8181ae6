"""CorpusSearch-style query engine over bracketed trees.

Queries are boolean combinations of dominance and precedence relations,
organized into first-match-wins cascades: each tree node is claimed by the
first query in the cascade it satisfies.  The built-in suites classify
do-support configurations in declarative clauses (``inverted``, ``do-not``,
``verb-not`` over IP roots) and questions (``non-inverted``, ``do-subj``,
``verb-subj`` over CP-QUE-MAT roots).

Suite file format (line oriented, ``#`` comments allowed)::

    def finClause = IP-MAT*|IP-SUB*
    def finVerb = DOD|DOP|HVD|HVP|VBD|VBP

    query inverted on finClause:
        leaf f = finVerb, f child-of root
        node s = NP-SBJ*, s child-of root
        f precedes s
        anchor f

``def`` names a tag class (``|``-separated label globs; ``*`` only as a
suffix).  A ``query`` block binds variables against the distinguished
``root`` node: ``leaf``/``node`` lines are existential bindings, ``some`` /
``none`` prefixes make a binding a scoped (negated) existential, bare lines
are relation conditions, and ``anchor`` names the leaf variable reported in
hits.  Pattern items containing a lowercase letter are tag-class references
(unknown names are a load error); all-uppercase items are label globs.

Relations: ``A child-of B`` (A is a child of B), ``A in B`` (proper
descendant), ``A in-clause B`` (descendant with no intervening IP or CP
node), ``A precedes B``, ``A iprecedes B`` (immediately precedes, skipping
empty categories), ``A is-not B`` (distinct nodes).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union

from .errors import SuiteError
from .treebank import Leaf, NodeLabel, Sentence, SpanIndex, Tree, raw_label, terminal_spans

CLAUSE_CATEGORIES = frozenset({"IP", "CP"})

# Table-style reports elsewhere call the helper query "ignore-inverted"
QUERY_ALIASES = {"ignore-inverted": "inverted"}


# ---------------------------------------------------------------------------
# Label patterns


def label_matches(label: Union[NodeLabel, str], pattern: str) -> bool:
    """Exact glob match on the raw label; ``*`` as a suffix matches prefixes."""
    raw = label if isinstance(label, str) else label.raw
    if pattern.endswith("*"):
        return raw.startswith(pattern[:-1])
    return raw == pattern


def _validate_glob(glob: str) -> str:
    if not glob:
        raise SuiteError("empty label glob")
    if "*" in glob[:-1]:
        raise SuiteError(f"'*' is only allowed as a suffix: {glob!r}")
    return glob


@dataclass(frozen=True)
class TagClass:
    """A named group of label globs, e.g. ``finVerb = DOD|DOP|...``."""

    name: str
    members_or_globs: tuple[str, ...]

    def __post_init__(self):
        if not self.members_or_globs:
            raise SuiteError(f"tag class {self.name!r} has no members")


class LabelMatcher:
    """A compiled ``|``-pattern with tag-class references expanded to globs."""

    __slots__ = ("source", "globs")

    def __init__(self, source: str, globs: tuple[str, ...]):
        self.source = source
        self.globs = globs

    def matches(self, raw: str) -> bool:
        return any(label_matches(raw, g) for g in self.globs)

    def __repr__(self):
        return f"LabelMatcher({self.source!r})"


def _is_class_ref(item: str) -> bool:
    # defs are written in camelCase/lowercase, labels in uppercase
    return any(ch.islower() for ch in item)


def compile_pattern(source: str, defs: dict[str, TagClass]) -> LabelMatcher:
    globs: list[str] = []

    def expand(item: str, seen: tuple[str, ...]):
        item = item.strip()
        if not item:
            raise SuiteError(f"empty item in pattern {source!r}")
        if _is_class_ref(item):
            if item in seen:
                raise SuiteError(f"circular tag-class reference: {item!r}")
            if item not in defs:
                raise SuiteError(f"unknown tag class {item!r} in pattern {source!r}")
            for member in defs[item].members_or_globs:
                expand(member, seen + (item,))
        else:
            globs.append(_validate_glob(item))

    for part in source.split("|"):
        expand(part, ())
    return LabelMatcher(source, tuple(globs))


# ---------------------------------------------------------------------------
# Query expressions

REL_KINDS = ("child-of", "in", "in-clause", "precedes", "iprecedes", "is-not")


@dataclass(frozen=True)
class Rel:
    kind: str
    left: str
    right: str


@dataclass(frozen=True)
class LabelIs:
    var: str
    matcher: LabelMatcher


@dataclass(frozen=True)
class IsLeaf:
    var: str


@dataclass(frozen=True)
class Exists:
    var: str
    matcher: LabelMatcher
    leaf_only: bool
    body: "Expr | None" = None


@dataclass(frozen=True)
class Not:
    expr: "Expr"


@dataclass(frozen=True)
class And:
    parts: tuple["Expr", ...]


@dataclass(frozen=True)
class Or:
    parts: tuple["Expr", ...]


Expr = Union[Rel, LabelIs, IsLeaf, Exists, Not, And, Or]


@dataclass(frozen=True)
class Query:
    name: str
    root_pattern: LabelMatcher
    body: Expr
    anchor: str | None = None


@dataclass(frozen=True)
class QuerySuite:
    defs: tuple[TagClass, ...]
    cascade: tuple[Query, ...]

    def __post_init__(self):
        names = [q.name for q in self.cascade]
        if len(set(names)) != len(names):
            raise SuiteError(f"duplicate query names: {names}")


@dataclass(frozen=True)
class HitRecord:
    """One query match; ``(sentence_id, query, anchor_index)`` is the key
    compared between gold and predicted corpora."""

    sentence_id: str
    query: str
    anchor_index: int
    clause_span: tuple[int, int]
    clause_label: str

    @property
    def key(self) -> tuple[str, str, int]:
        return (self.sentence_id, self.query, self.anchor_index)


# ---------------------------------------------------------------------------
# Relations over a SpanIndex


def _category(node: Tree) -> str:
    return node.pos.category if isinstance(node, Leaf) else node.label.category


def _is_ancestor(idx: SpanIndex, ancestor: int, descendant: int) -> bool:
    p = idx.parents[descendant]
    while p is not None:
        if p == ancestor:
            return True
        p = idx.parents[p]
    return False


def _in_clause(idx: SpanIndex, ancestor: int, descendant: int) -> bool:
    p = idx.parents[descendant]
    while p is not None and p != ancestor:
        if _category(idx.nodes[p]) in CLAUSE_CATEGORIES:
            return False
        p = idx.parents[p]
    return p == ancestor


def dominates_within_clause(idx: SpanIndex, ancestor: Tree, descendant: Tree) -> bool:
    """Proper descent with no intervening IP or CP node on the path."""
    return _in_clause(idx, idx.index_of(ancestor), idx.index_of(descendant))


def _rel_holds(idx: SpanIndex, kind: str, a: int, b: int) -> bool:
    if kind == "child-of":
        return idx.parents[a] == b
    if kind == "in":
        return _is_ancestor(idx, b, a)
    if kind == "in-clause":
        return _in_clause(idx, b, a)
    if kind == "is-not":
        return a != b
    sa, sb = idx.spans[a], idx.spans[b]
    if sa is None or sb is None:
        return False
    if kind == "precedes":
        return sa[1] < sb[0]
    if kind == "iprecedes":
        return sb[0] == sa[1] + 1
    raise SuiteError(f"unknown relation {kind!r}")


# ---------------------------------------------------------------------------
# Evaluation


def _solutions(expr: Expr, idx: SpanIndex, env: dict[str, int]) -> Iterator[dict[str, int]]:
    if isinstance(expr, And):
        def conj(i, e):
            if i == len(expr.parts):
                yield e
                return
            for e2 in _solutions(expr.parts[i], idx, e):
                yield from conj(i + 1, e2)

        yield from conj(0, env)
    elif isinstance(expr, Or):
        for part in expr.parts:
            yield from _solutions(part, idx, env)
    elif isinstance(expr, Not):
        if next(_solutions(expr.expr, idx, env), None) is None:
            yield env
    elif isinstance(expr, Exists):
        for n, node in enumerate(idx.nodes):
            if expr.leaf_only and not isinstance(node, Leaf):
                continue
            if not expr.matcher.matches(raw_label(node)):
                continue
            bound = {**env, expr.var: n}
            if expr.body is None:
                yield bound
            else:
                yield from _solutions(expr.body, idx, bound)
    elif isinstance(expr, Rel):
        if _rel_holds(idx, expr.kind, _lookup(env, expr.left), _lookup(env, expr.right)):
            yield env
    elif isinstance(expr, LabelIs):
        if expr.matcher.matches(raw_label(idx.nodes[_lookup(env, expr.var)])):
            yield env
    elif isinstance(expr, IsLeaf):
        if isinstance(idx.nodes[_lookup(env, expr.var)], Leaf):
            yield env
    else:
        raise SuiteError(f"unknown expression node {expr!r}")


def _lookup(env: dict[str, int], var: str) -> int:
    try:
        return env[var]
    except KeyError:
        raise SuiteError(f"unbound variable {var!r}") from None


def satisfiable(query: Query, idx: SpanIndex, root: int) -> bool:
    return next(_solutions(query.body, idx, {"root": root}), None) is not None


def _best_anchor(query: Query, idx: SpanIndex, root: int) -> int | None:
    """Leftmost terminal index bound to the anchor over all solutions."""
    best = None
    for env in _solutions(query.body, idx, {"root": root}):
        span = idx.spans[env[query.anchor]]
        if span is None:
            continue  # empty-category terminals never anchor a hit
        if best is None or span[0] < best:
            best = span[0]
    return best


def run_cascade(suite: QuerySuite, sentence: Sentence) -> list[HitRecord]:
    """Classify every node of the sentence: the first query in the cascade
    whose root pattern and body are satisfied claims the node and emits one
    hit, anchored at the leftmost satisfying binding of the anchor variable."""
    for query in suite.cascade:
        if query.anchor is None:
            raise SuiteError(f"query {query.name!r} has no anchor; cannot emit hits")
    idx = terminal_spans(sentence.tree)
    hits: list[HitRecord] = []
    for n in range(len(idx.nodes)):
        raw = raw_label(idx.nodes[n])
        for query in suite.cascade:
            if not query.root_pattern.matches(raw):
                continue
            anchor = _best_anchor(query, idx, n)
            if anchor is None:
                continue
            span = idx.spans[n]
            hits.append(HitRecord(sentence.id, query.name, anchor, span, raw))
            break
    hits.sort(key=lambda h: (h.anchor_index, h.query, h.clause_span))
    return hits


def run_suite(suite: QuerySuite, sentences) -> list[HitRecord]:
    hits: list[HitRecord] = []
    for sentence in sentences:
        hits.extend(run_cascade(suite, sentence))
    return hits


# ---------------------------------------------------------------------------
# Suite text format

_DEF_LINE = re.compile(r"^def\s+(\S+)\s*=\s*(.+)$")
_QUERY_LINE = re.compile(r"^query\s+(\S+)\s+on\s+(\S+)\s*:\s*$")
_BIND_LINE = re.compile(r"^(some\s+|none\s+)?(leaf|node)\s+(\w+)\s*=\s*([^,]+)(?:,\s*(.+))?$")
_COND = re.compile(r"^(\w+)\s+(child-of|in-clause|in|precedes|iprecedes|is-not)\s+(\w+)$")
_VAR = re.compile(r"^\w+$")


@dataclass
class _Binding:
    scope: str  # "", "some", "none"
    leaf_only: bool
    var: str
    pattern: str
    conds: list[tuple[str, str, str]]


def _parse_cond(text: str, lineno: int) -> tuple[str, str, str]:
    m = _COND.match(text.strip())
    if not m:
        raise SuiteError(f"line {lineno}: cannot parse condition {text!r}")
    return (m.group(1), m.group(2), m.group(3))


def _build_query(
    name: str,
    root_pattern: str,
    bindings: list[_Binding],
    conds: list[tuple[str, str, str]],
    anchor: str | None,
    defs: dict[str, TagClass],
) -> Query:
    bound = {"root"}
    for b in bindings:
        if b.var in bound:
            raise SuiteError(f"query {name!r}: variable {b.var!r} bound twice")
        for a, kind, c in b.conds:
            for var in (a, c):
                if var != b.var and var not in bound:
                    raise SuiteError(f"query {name!r}: {var!r} used before binding")
        if b.scope == "":
            bound.add(b.var)
    for a, kind, c in conds:
        for var in (a, c):
            if var not in bound:
                raise SuiteError(f"query {name!r}: {var!r} used before binding")
    if anchor is not None:
        anchored = [b for b in bindings if b.var == anchor and b.scope == ""]
        if not anchored or not anchored[0].leaf_only:
            raise SuiteError(f"query {name!r}: anchor {anchor!r} must be a top-level leaf binding")

    def rels(pairs) -> tuple[Expr, ...]:
        return tuple(Rel(kind, a, c) for a, kind, c in pairs)

    innermost: list[Expr] = list(rels(conds))
    for b in bindings:
        if b.scope == "":
            continue
        inner = Exists(b.var, compile_pattern(b.pattern, defs), b.leaf_only,
                       And(rels(b.conds)) if b.conds else None)
        innermost.append(Not(inner) if b.scope == "none" else inner)
    expr: Expr = And(tuple(innermost))
    for b in reversed([b for b in bindings if b.scope == ""]):
        body: Expr = And(rels(b.conds) + (expr,)) if b.conds else expr
        expr = Exists(b.var, compile_pattern(b.pattern, defs), b.leaf_only, body)
    return Query(name, compile_pattern(root_pattern, defs), expr, anchor)


def parse_suite_text(text: str) -> QuerySuite:
    """Parse the line-oriented suite format; see the module docstring."""
    defs: dict[str, TagClass] = {}
    queries: list[Query] = []
    current: dict | None = None

    def flush():
        nonlocal current
        if current is not None:
            queries.append(
                _build_query(
                    current["name"], current["root"], current["bindings"],
                    current["conds"], current["anchor"], defs,
                )
            )
            current = None

    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].rstrip()
        stripped = line.strip()
        if not stripped:
            continue
        m = _DEF_LINE.match(stripped)
        if m:
            flush()
            name, members = m.group(1), tuple(p.strip() for p in m.group(2).split("|"))
            if name in defs:
                raise SuiteError(f"line {lineno}: duplicate def {name!r}")
            defs[name] = TagClass(name, members)
            continue
        m = _QUERY_LINE.match(stripped)
        if m:
            flush()
            current = {"name": m.group(1), "root": m.group(2), "bindings": [],
                       "conds": [], "anchor": None}
            continue
        if current is None:
            raise SuiteError(f"line {lineno}: unexpected line outside a query block: {stripped!r}")
        if stripped.startswith("anchor"):
            var = stripped[len("anchor"):].strip()
            if not _VAR.match(var):
                raise SuiteError(f"line {lineno}: bad anchor {var!r}")
            current["anchor"] = var
            continue
        m = _BIND_LINE.match(stripped)
        if m:
            scope = (m.group(1) or "").strip()
            conds = []
            if m.group(5):
                conds = [_parse_cond(c, lineno) for c in m.group(5).split(",")]
            current["bindings"].append(
                _Binding(scope, m.group(2) == "leaf", m.group(3), m.group(4).strip(), conds)
            )
            continue
        current["conds"].append(_parse_cond(stripped, lineno))
    flush()
    return QuerySuite(tuple(defs.values()), tuple(queries))


def load_suite(path) -> QuerySuite:
    with open(path, encoding="utf-8") as fh:
        return parse_suite_text(fh.read())


# ---------------------------------------------------------------------------
# Built-in suites

_DEFS = """\
def finClause = IP-MAT*|IP-SUB*
def subject = NP-SBJ*
def inf = BE|DO|HV|VB
def finDo = DOD|DOP
def finVerb = DOD|DOP|HVD|HVP|VBD|VBP
def part = DAN|HAN|VAN|BEN|DON|HVN|VBN
"""


def declarative_suite_text(relaxed_adjacency: bool = False, deep_search: bool = False) -> str:
    """Queries for do-support in declarative clauses, over finite IP roots.

    ``relaxed_adjacency`` lets the finite verb merely precede NEG instead of
    immediately preceding it; ``deep_search`` locates the verb, NEG, and
    subject anywhere within the clause rather than as immediate children.
    """
    adj = "precedes" if relaxed_adjacency else "iprecedes"
    at = "in-clause" if deep_search else "child-of"
    return f"""\
# do-support queries for declarative clauses (finite IP roots);
# 'inverted' skims off inverted-subject clauses first
{_DEFS}
query inverted on finClause:
    leaf f = finVerb, f {at} root
    node s = subject, s {at} root
    f precedes s
    anchor f

query do-not on finClause:
    leaf d = finDo, d {at} root
    leaf n = NEG, n {at} root
    d {adj} n
    some leaf w = inf|part, w in-clause root, n precedes w
    anchor d

query verb-not on finClause:
    leaf f = finVerb, f {at} root
    leaf n = NEG, n {at} root
    f {adj} n
    none leaf w = inf|part, w in-clause root
    anchor f
"""


def question_suite_text(deep_search: bool = False) -> str:
    """Queries for do-support in questions, over CP-QUE-MAT roots."""
    at = "in-clause" if deep_search else "child-of"
    return f"""\
# do-support queries for question clauses (CP-QUE-MAT roots)
{_DEFS}
query non-inverted on CP-QUE-MAT*:
    node i = IP-SUB*, i child-of root
    node s = subject, s {at} i
    leaf f = finVerb, f {at} i
    s precedes f
    anchor f

query do-subj on CP-QUE-MAT*:
    node i = IP-SUB*, i child-of root
    leaf d = finDo, d {at} i
    node s = subject, s {at} i
    d precedes s
    some leaf w = inf|part, w in-clause i, s precedes w
    anchor d

query verb-subj on CP-QUE-MAT*:
    node i = IP-SUB*, i child-of root
    leaf f = finVerb, f {at} i
    node s = subject, s {at} i
    f precedes s
    none leaf w = inf|part, w in-clause i
    anchor f
"""


def builtin_declarative_suite(relaxed_adjacency: bool = False, deep_search: bool = False) -> QuerySuite:
    return parse_suite_text(declarative_suite_text(relaxed_adjacency, deep_search))


def builtin_question_suite(deep_search: bool = False) -> QuerySuite:
    return parse_suite_text(question_suite_text(deep_search))


BUILTIN_SUITES = {
    "declarative": builtin_declarative_suite,
    "questions": builtin_question_suite,
}


def builtin_suite(name: str) -> QuerySuite:
    try:
        return BUILTIN_SUITES[name]()
    except KeyError:
        raise SuiteError(f"unknown built-in suite {name!r}") from None
