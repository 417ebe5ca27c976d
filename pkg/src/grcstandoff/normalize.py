"""Encoding normalization for extracted Greek text.

Two passes, always in this order: Unicode NFC, then apostrophe unification.
The apostrophe pass maps every codepoint used for elision or coronis onto
MODIFIER LETTER APOSTROPHE (U+02BC). Word-final ASCII apostrophes and right
single quotation marks are ambiguous with closing quotes, so they are only
rewritten when the elided word is listed in an :class:`ElisionLexicon`.
"""

import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .chars import (
    AMBIGUOUS_APOSTROPHES,
    COMBINING_COMMA_ABOVE,
    KORONIS,
    MODIFIER_APOSTROPHE,
    is_vowel,
    is_word_char,
)

SUBSTITUTED = (COMBINING_COMMA_ABOVE, KORONIS, "'", "’")

_CANDIDATES = re.compile("[̓᾽'’]")


def nfc_normalize(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def clusters(text: str):
    """Yield (start, end) spans of a base character plus trailing combining marks."""
    n = len(text)
    i = 0
    while i < n:
        j = i + 1
        while j < n and unicodedata.combining(text[j]):
            j += 1
        yield i, j
        i = j


def count_nfc_changes(text: str) -> int:
    """Number of character clusters that NFC rewrites."""
    if unicodedata.is_normalized("NFC", text):
        return 0
    return sum(
        1 for i, j in clusters(text) if not unicodedata.is_normalized("NFC", text[i:j])
    )


def _to_modifier(form):
    if form and form[-1] in AMBIGUOUS_APOSTROPHES | {KORONIS, COMBINING_COMMA_ABOVE}:
        return form[:-1] + MODIFIER_APOSTROPHE
    return form


@dataclass(frozen=True)
class ElisionLexicon:
    """Elided word forms, each stored NFC-normalized and ending in U+02BC."""

    entries: frozenset = frozenset()

    def __post_init__(self):
        normalized = frozenset(_to_modifier(nfc_normalize(e.strip())) for e in self.entries)
        for entry in normalized:
            if len(entry) < 2 or entry[-1] != MODIFIER_APOSTROPHE:
                raise ValueError(f"elision entry must be a stem plus apostrophe: {entry!r}")
        object.__setattr__(self, "entries", normalized)

    def __contains__(self, form):
        return _to_modifier(form) in self.entries

    def __len__(self):
        return len(self.entries)

    @classmethod
    def from_lines(cls, lines):
        forms = []
        for line in lines:
            line = line.strip()
            if line and not line.startswith("#"):
                forms.append(line)
        return cls(frozenset(forms))

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as f:
            return cls.from_lines(f)

    @classmethod
    def default(cls):
        text = resources.files("grcstandoff.data").joinpath("elision.txt").read_text("utf-8")
        return cls.from_lines(text.splitlines())


@dataclass
class NormalizationReport:
    nfc_changes: int = 0
    apostrophe_substitutions: Counter = field(default_factory=Counter)
    untouched_ambiguous: int = 0

    @property
    def introduced_apostrophes(self):
        return sum(self.apostrophe_substitutions.values())

    def merge(self, other):
        self.nfc_changes += other.nfc_changes
        self.apostrophe_substitutions.update(other.apostrophe_substitutions)
        self.untouched_ambiguous += other.untouched_ambiguous
        return self

    def as_dict(self):
        out = {"nfc_changes": self.nfc_changes}
        for cp in SUBSTITUTED:
            out[f"apostrophe_U+{ord(cp):04X}"] = self.apostrophe_substitutions.get(cp, 0)
        out["untouched_ambiguous"] = self.untouched_ambiguous
        return out

    def to_text(self):
        return "".join(f"{k} = {v}\n" for k, v in self.as_dict().items())


def _attached_to_vowel(text, i):
    j = i - 1
    while j >= 0 and unicodedata.combining(text[j]):
        j -= 1
    return j >= 0 and is_vowel(text[j])


def normalize_apostrophes(text: str, lexicon: ElisionLexicon):
    """Unify apostrophe codepoints on NFC text. Returns (text, report).

    Every substitution is one character for one character, so offsets into
    the input stay valid for the output.
    """
    report = NormalizationReport()
    chars = None
    n = len(text)
    for m in _CANDIDATES.finditer(text):
        i = m.start()
        ch = text[i]
        if ch == KORONIS:
            replace = True
        elif ch == COMBINING_COMMA_ABOVE:
            # on a vowel it is a smooth breathing NFC could not compose
            replace = not _attached_to_vowel(text, i)
        else:
            if i == 0 or not is_word_char(text[i - 1]):
                continue
            if i + 1 < n and is_word_char(text[i + 1]):
                continue
            start = i
            while start > 0 and is_word_char(text[start - 1]):
                start -= 1
            replace = text[start:i] + MODIFIER_APOSTROPHE in lexicon.entries
            if not replace:
                report.untouched_ambiguous += 1
        if replace:
            if chars is None:
                chars = list(text)
            chars[i] = MODIFIER_APOSTROPHE
            report.apostrophe_substitutions[ch] += 1
    return ("".join(chars) if chars is not None else text), report


def normalize(text: str, lexicon: ElisionLexicon):
    """NFC followed by apostrophe unification; the report covers both passes."""
    nfc_changes = count_nfc_changes(text)
    out, report = normalize_apostrophes(nfc_normalize(text), lexicon)
    report.nfc_changes = nfc_changes
    return out, report


def load_lexicon(path=None):
    return ElisionLexicon.load(Path(path)) if path else ElisionLexicon.default()
