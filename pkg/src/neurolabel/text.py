"""Low-level text machinery: tokenisation, sentence segmentation and
phrase-with-wildcard trigger matching.

Everything here is deterministic and case-insensitive. Trigger patterns are
deliberately not regular expressions: a pattern is a literal token sequence
in which ``*`` matches exactly one token, which keeps the shipped ruleset
auditable by clinicians.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

_TOKEN_RE = re.compile(r"[A-Za-z0-9']+")

# Sentence-final punctuation followed by whitespace and an upper-case letter
# or digit (or end of text) ends a sentence, unless the preceding token is a
# known abbreviation.
_ABBREVIATIONS = frozenset(
    {"e.g.", "i.e.", "eg.", "ie.", "cf.", "vs.", "dr.", "mr.", "mrs.", "approx.", "t1.", "t2."}
)

_CLAUSE_CHARS = frozenset(",;:")


@dataclass(frozen=True)
class Token:
    """One word-like unit with character offsets into the source text."""

    norm: str
    start: int
    end: int


def tokenize(text: str) -> list[Token]:
    """Split ``text`` into lower-cased alphanumeric tokens.

    Apostrophes are dropped from the normalised form ("Rathke's" matches
    "rathkes") but offsets always refer to the original text.
    """
    tokens = []
    for m in _TOKEN_RE.finditer(text):
        norm = m.group(0).lower().replace("'", "")
        if norm:
            tokens.append(Token(norm, m.start(), m.end()))
    return tokens


def clause_ids(text: str, tokens: list[Token]) -> list[int]:
    """Assign each token a clause index; clauses split on , ; : within a sentence."""
    ids = []
    clause = 0
    cursor = 0
    for tok in tokens:
        for ch in text[cursor : tok.start]:
            if ch in _CLAUSE_CHARS:
                clause += 1
        ids.append(clause)
        cursor = tok.end
    return ids


@dataclass(frozen=True)
class SentenceSpan:
    """A sentence slice of the normalised source text."""

    text: str
    start: int
    end: int


def segment(text: str) -> list[SentenceSpan]:
    """Split normalised text into sentences.

    A split happens after ``. ! ?`` followed by whitespace and an upper-case
    letter or digit, or at end of text. A fixed abbreviation list never
    splits. Empty input yields an empty list.
    """
    if not text.strip():
        return []
    spans: list[SentenceSpan] = []
    sentence_start = 0
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in ".!?":
            j = i + 1
            while j < n and text[j] in ".!?":
                j += 1
            k = j
            while k < n and text[k].isspace():
                k += 1
            boundary = k >= n or (k > j and (text[k].isupper() or text[k].isdigit()))
            if boundary and ch == "." and _is_abbreviation(text, i):
                boundary = False
            if boundary:
                spans.append(_strip_span(text, sentence_start, j))
                sentence_start = k
                i = k
                continue
            i = j
        else:
            i += 1
    if sentence_start < n:
        spans.append(_strip_span(text, sentence_start, n))
    return [s for s in spans if s.text]


def _is_abbreviation(text: str, dot_index: int) -> bool:
    start = dot_index
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    word = text[start : dot_index + 1].lower()
    return word in _ABBREVIATIONS


def _strip_span(text: str, start: int, end: int) -> SentenceSpan:
    while start < end and text[start].isspace():
        start += 1
    while end > start and text[end - 1].isspace():
        end -= 1
    return SentenceSpan(text[start:end], start, end)


class TriggerPattern:
    """A compiled phrase pattern: literal tokens with single-token ``*`` wildcards."""

    __slots__ = ("phrase", "tokens")

    def __init__(self, phrase: str):
        parts: list[str] = []
        for raw in phrase.split():
            if raw == "*":
                parts.append("*")
            else:
                parts.extend(t.norm for t in tokenize(raw))
        if not parts:
            raise ValueError(f"trigger pattern is empty: {phrase!r}")
        if all(p == "*" for p in parts):
            raise ValueError(f"trigger pattern is all wildcards: {phrase!r}")
        self.phrase = phrase
        self.tokens = tuple(parts)

    def __len__(self) -> int:
        return len(self.tokens)

    def find(self, tokens: list[Token]) -> list[tuple[int, int]]:
        """Return (first_token, last_token_exclusive) index pairs of all matches."""
        width = len(self.tokens)
        out = []
        for i in range(len(tokens) - width + 1):
            if all(p == "*" or p == tokens[i + k].norm for k, p in enumerate(self.tokens)):
                out.append((i, i + width))
        return out


def compile_phrases(phrases) -> list[TriggerPattern]:
    return [TriggerPattern(p) for p in phrases]


def find_phrase_spans(patterns: list[TriggerPattern], tokens: list[Token]) -> list[tuple[int, int]]:
    """All (start, end) token index pairs matched by any pattern in the list."""
    spans = []
    for pat in patterns:
        spans.extend(pat.find(tokens))
    return spans
