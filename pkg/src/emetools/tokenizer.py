"""Deterministic tokenizer for Early Modern English raw text, following
PPCEME tokenization conventions.

The rules, applied to each whitespace-delimited chunk:

* possessives stay attached (``Queen's``);
* sentence/clause punctuation is split off, except inside abbreviations
  (``Mr.``), hyphenated names (``Fitz-Morris``), Roman numerals, and special
  cases such as ``&c``;
* a leading ``th'`` (either apostrophe) is split into its own token
  (``th'exchaung`` -> ``th' exchaung``), but ``th`` without an apostrophe is
  never split (``thynkyth`` stays whole) and ``its`` stays one token;
* Roman numerals are kept whole, including the period-studded style of the
  period (``.xiiii.C.``) and terminal ``j`` for ``i`` (``v.C.xlviij``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

DEFAULT_ABBREVIATIONS = frozenset({"Mr.", "Mrs.", "&c"})

APOSTROPHES = "'’"
SPLIT_PUNCT = frozenset(".,;:!?\"()")
_ROMAN_CHARS = frozenset("ivxlcdmIVXLCDM")
_WORD = re.compile(r"\S+")


@dataclass(frozen=True)
class TokenizerConfig:
    abbreviations: frozenset[str] = DEFAULT_ABBREVIATIONS
    split_th_apostrophe: bool = True
    its_one_token: bool = True
    roman_numeral_j_variant: bool = True

    def __post_init__(self):
        for abbr in self.abbreviations:
            if not abbr or any(ch.isspace() for ch in abbr):
                raise ValueError(f"bad abbreviation entry: {abbr!r}")


DEFAULT_CONFIG = TokenizerConfig()


@dataclass(frozen=True)
class TokenizedText:
    """Tokens plus their (start, end) byte offsets into the source text."""

    tokens: tuple[str, ...]
    source_offsets: tuple[tuple[int, int], ...]


def is_roman_numeral(token: str, cfg: TokenizerConfig = DEFAULT_CONFIG) -> bool:
    """True for Roman numerals, optionally with leading/trailing/internal
    periods and (when enabled) group-final ``j``.

    Ordinary words spelled from Roman letters ("civil", "mix") are rejected:
    a token only qualifies when it carries a period, a j-final group, or
    mixed-case letters.
    """
    groups = [g for g in token.split(".") if g]
    if not groups:
        return False
    j_allowed = "jJ" if cfg.roman_numeral_j_variant else ""
    for group in groups:
        core = group.rstrip(j_allowed) if j_allowed else group
        if not all(ch in _ROMAN_CHARS for ch in core):
            return False
    letters = "".join(groups)
    has_j_final = bool(j_allowed) and any(g[-1] in "jJ" for g in groups)
    mixed_case = letters != letters.lower() and letters != letters.upper()
    return "." in token or has_j_final or mixed_case


def _roman_keep_whole(chunk: str, cfg: TokenizerConfig) -> bool:
    # a trailing period is numeral-internal only in the bracketing style
    # (".xiiii.C."); otherwise it is sentence punctuation and must split
    if not is_roman_numeral(chunk, cfg):
        return False
    if chunk.endswith(".") and not chunk.startswith("."):
        return False
    return True


def _split_chunk(chunk: str, offset: int, cfg: TokenizerConfig, out: list) -> None:
    if not chunk:
        return
    if chunk in cfg.abbreviations or _roman_keep_whole(chunk, cfg):
        out.append((chunk, offset))
        return
    if not cfg.its_one_token and chunk.lower() == "its":
        out.append((chunk[:2], offset))
        out.append((chunk[2:], offset + 2))
        return
    if len(chunk) > 1 and chunk[0] in SPLIT_PUNCT:
        out.append((chunk[0], offset))
        _split_chunk(chunk[1:], offset + 1, cfg, out)
        return
    if len(chunk) > 1 and chunk[-1] in SPLIT_PUNCT:
        _split_chunk(chunk[:-1], offset, cfg, out)
        out.append((chunk[-1], offset + len(chunk) - 1))
        return
    if (
        cfg.split_th_apostrophe
        and len(chunk) > 3
        and chunk[:2].lower() == "th"
        and chunk[2] in APOSTROPHES
    ):
        out.append((chunk[:3], offset))
        _split_chunk(chunk[3:], offset + 3, cfg, out)
        return
    out.append((chunk, offset))


def tokenize(text: str, cfg: TokenizerConfig = DEFAULT_CONFIG) -> TokenizedText:
    """Tokenize; total on any input.  Tokens are contiguous slices of the
    source, so joining them reproduces the input minus whitespace."""
    byte_at = [0]
    for ch in text:
        byte_at.append(byte_at[-1] + len(ch.encode("utf-8")))
    tokens: list[str] = []
    offsets: list[tuple[int, int]] = []
    pieces: list[tuple[str, int]] = []
    for m in _WORD.finditer(text):
        pieces.clear()
        _split_chunk(m.group(), m.start(), cfg, pieces)
        for tok, start in pieces:
            tokens.append(tok)
            offsets.append((byte_at[start], byte_at[start + len(tok)]))
    return TokenizedText(tuple(tokens), tuple(offsets))


def load_abbreviations(path) -> frozenset[str]:
    """One abbreviation per line; blank lines and ``#`` comments ignored."""
    entries = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                entries.add(line)
    return frozenset(entries)
