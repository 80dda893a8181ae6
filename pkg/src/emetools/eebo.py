"""Text extraction, normalization, and sentence segmentation for EEBO-style
XML.

Only the text inside keep elements (``<P>`` by default) is retained; NOTE,
SPEAKER, and L subtrees are discarded, and ``<GAP>`` markers for illegible
spans are replaced inline by a placeholder character.  Rare-character
filtering is corpus-global: count characters over the whole corpus first
(pass 1), then segment and filter (pass 2).
"""

from __future__ import annotations

import unicodedata
import xml.etree.ElementTree as ET
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .errors import ExtractionError
from . import tokenizer as _tok


@dataclass(frozen=True)
class ExtractionConfig:
    keep_elements: frozenset[str] = frozenset({"P"})
    drop_elements: frozenset[str] = frozenset({"NOTE", "SPEAKER", "L"})
    gap_placeholder: str = "•"
    rare_char_threshold: int = 200
    max_sentence_tokens: int = 800
    terminal_punct: frozenset[str] = frozenset({".", "!", "?"})
    # EEBO header layout varies between releases; these names are matched
    # case-insensitively anywhere under the header element
    gap_element: str = "GAP"
    header_element: str = "HEADER"
    title_element: str = "TITLE"
    author_element: str = "AUTHOR"
    date_element: str = "DATE"
    id_element: str = "IDNO"

    def __post_init__(self):
        if self.rare_char_threshold <= 0 or self.max_sentence_tokens <= 0:
            raise ValueError("thresholds must be positive")
        if len(self.gap_placeholder) != 1:
            raise ValueError("gap placeholder must be a single character")


DEFAULT_CONFIG = ExtractionConfig()


@dataclass(frozen=True)
class Document:
    id: str
    title: str
    author: str
    date: str
    paragraphs: tuple[str, ...]


def _local_name(element) -> str:
    tag = element.tag
    if not isinstance(tag, str):
        return ""
    return tag.rsplit("}", 1)[-1].upper()


def _clean(text: str) -> str:
    return unicodedata.normalize("NFC", " ".join(text.split()))


def _paragraph_text(element, drop: set[str], gap: str, placeholder: str) -> str:
    parts: list[str] = []

    def collect(el):
        if el.text:
            parts.append(el.text)
        for child in el:
            name = _local_name(child)
            if name == gap:
                # gaps mark OCR failures, usually inside a word: butt the
                # placeholder directly against the surrounding text
                if parts:
                    parts[-1] = parts[-1].rstrip()
                parts.append(child.get("DISP") or child.get("disp") or placeholder)
                if child.tail:
                    parts.append(child.tail.lstrip())
                continue
            if name in drop:
                if child.tail:
                    parts.append(child.tail)
                continue
            collect(child)
            if child.tail:
                parts.append(child.tail)

    collect(element)
    return _clean("".join(parts))


def _first_text(root, name: str) -> str:
    want = name.upper()
    for el in root.iter():
        if _local_name(el) == want:
            return _clean("".join(el.itertext()))
    return ""


def extract_document(xml, cfg: ExtractionConfig = DEFAULT_CONFIG, doc_id: str | None = None) -> Document:
    """Extract header fields and paragraph text from one XML document.

    ``xml`` may be a string of XML or a file-like object.  Missing header
    fields come back as empty strings; malformed XML raises ExtractionError
    with the parser's line/column position.
    """
    try:
        if isinstance(xml, str):
            root = ET.fromstring(xml)
        else:
            root = ET.parse(xml).getroot()
    except ET.ParseError as exc:
        raise ExtractionError(f"malformed XML at {exc.position}: {exc}") from exc

    header = root
    for el in root.iter():
        if _local_name(el) == cfg.header_element.upper():
            header = el
            break
    title = _first_text(header, cfg.title_element)
    author = _first_text(header, cfg.author_element)
    date = _first_text(header, cfg.date_element)
    if doc_id is None:
        doc_id = _first_text(header, cfg.id_element)

    keep = {name.upper() for name in cfg.keep_elements}
    drop = {name.upper() for name in cfg.drop_elements}
    gap = cfg.gap_element.upper()

    paragraphs: list[str] = []

    def walk(el, inside_keep: bool):
        name = _local_name(el)
        if name in drop:
            return
        if name in keep and not inside_keep:
            text = _paragraph_text(el, drop, gap, cfg.gap_placeholder)
            if text:
                paragraphs.append(text)
            return
        for child in el:
            walk(child, inside_keep)

    walk(root, False)
    return Document(doc_id or "", title, author, date, tuple(paragraphs))


@dataclass
class CharFrequencyTable:
    """Corpus-wide character counts over retained paragraph text."""

    counts: Counter = field(default_factory=Counter)

    def add_document(self, doc: Document) -> None:
        for paragraph in doc.paragraphs:
            self.counts.update(paragraph)

    def merge(self, other: "CharFrequencyTable") -> "CharFrequencyTable":
        self.counts.update(other.counts)
        return self

    def total(self) -> int:
        return sum(self.counts.values())


def build_char_table(docs: Iterable[Document]) -> CharFrequencyTable:
    table = CharFrequencyTable()
    for doc in docs:
        table.add_document(doc)
    return table


@dataclass(frozen=True)
class SegmentedSentence:
    id: str
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class ExcludedSentence:
    id: str
    tokens: tuple[str, ...]
    reason: str  # "too_long" | "rare_char"


def segment_sentences(
    doc: Document,
    cfg: ExtractionConfig = DEFAULT_CONFIG,
    tokenizer: Callable[[str], Sequence[str]] | None = None,
    char_table: CharFrequencyTable | None = None,
) -> tuple[list[SegmentedSentence], list[ExcludedSentence]]:
    """Split each paragraph into sentences after every terminal-punctuation
    token, then filter by length and (when a table is given) rare characters.

    Length is checked before rare characters, so only one reason is recorded.
    Passing ``char_table=None`` skips the rare-character filter.
    """
    if tokenizer is None:
        tokenizer = lambda text: _tok.tokenize(text).tokens

    kept: list[SegmentedSentence] = []
    excluded: list[ExcludedSentence] = []

    def finish(tokens: list[str], p_idx: int, s_idx: int) -> None:
        sid = f"{doc.id}:{p_idx}:{s_idx}"
        toks = tuple(tokens)
        if len(toks) > cfg.max_sentence_tokens:
            excluded.append(ExcludedSentence(sid, toks, "too_long"))
        elif char_table is not None and any(
            char_table.counts[ch] < cfg.rare_char_threshold for tok in toks for ch in tok
        ):
            excluded.append(ExcludedSentence(sid, toks, "rare_char"))
        else:
            kept.append(SegmentedSentence(sid, toks))

    for p_idx, paragraph in enumerate(doc.paragraphs, start=1):
        result = tokenizer(paragraph)
        tokens = list(getattr(result, "tokens", result))
        current: list[str] = []
        s_idx = 1
        for token in tokens:
            current.append(token)
            if token in cfg.terminal_punct:
                finish(current, p_idx, s_idx)
                current = []
                s_idx += 1
        if current:
            finish(current, p_idx, s_idx)
    return kept, excluded
