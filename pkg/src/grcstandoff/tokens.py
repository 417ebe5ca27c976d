"""Rule-based morphosyntactic tokenization.

Graphic words are maximal runs of characters that are neither whitespace
nor punctuation; every punctuation character is a token of its own. Words
listed in the crasis lexicon are split in two: offsets cover the real
characters of the base text while ``form`` carries the restored words
(``κἐκεῖνος`` -> ``κ`` + ``ἐκεῖνος`` with forms ``καὶ`` and ``ἐκεῖνος``).
"""

import logging
import re
import unicodedata
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import NamedTuple

from .chars import COMBINING_COMMA_ABOVE, GREEK_VOWELS, PUNCTUATION
from .normalize import nfc_normalize

log = logging.getLogger(__name__)

_PUNCT_CLASS = "".join(re.escape(c) for c in sorted(PUNCTUATION))
TOKEN_RE = re.compile(rf"[{_PUNCT_CLASS}]|[^\s{_PUNCT_CLASS}]+")
WORD_RE = re.compile(rf"[^\s{_PUNCT_CLASS}]+")


@dataclass(frozen=True)
class TokenSpan:
    id: str
    start: int
    length: int
    surface: str
    form: str

    @property
    def end(self):
        """1-based offset one past the last character."""
        return self.start + self.length


class CrasisEntry(NamedTuple):
    first_form: str
    second_form: str
    split_index: int


class CrasisLexicon:
    """Mapping crasis word form -> :class:`CrasisEntry`.

    File format: tab-separated ``crasis<TAB>first<TAB>second<TAB>split``,
    ``#`` comment lines and blank lines ignored. ``split`` counts the
    characters of the NFC crasis form assigned to the first token.
    """

    def __init__(self, entries=None):
        self.entries = {}
        for form, entry in (entries or {}).items():
            self.add(form, *entry)

    def add(self, form, first_form, second_form, split_index):
        form = nfc_normalize(form)
        split_index = int(split_index)
        if not 1 <= split_index < len(form):
            raise ValueError(f"{form}: split index {split_index} outside 1..{len(form) - 1}")
        if not first_form or not second_form:
            raise ValueError(f"{form}: both restored forms must be non-empty")
        self.entries[form] = CrasisEntry(nfc_normalize(first_form), nfc_normalize(second_form), split_index)

    def get(self, form):
        return self.entries.get(form)

    def __contains__(self, form):
        return form in self.entries

    def __len__(self):
        return len(self.entries)

    @classmethod
    def from_lines(cls, lines):
        lex = cls()
        for lineno, line in enumerate(lines, 1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 4:
                raise ValueError(f"crasis lexicon line {lineno}: expected 4 tab-separated columns")
            lex.add(*cols)
        return lex

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as f:
            return cls.from_lines(f)

    @classmethod
    def default(cls):
        text = resources.files("grcstandoff.data").joinpath("crasis.tsv").read_text("utf-8")
        return cls.from_lines(text.splitlines())


def load_crasis(path=None):
    return CrasisLexicon.load(Path(path)) if path else CrasisLexicon.default()


def tokenize(base, crasis=None):
    text = base.text if hasattr(base, "text") else base
    crasis = crasis if crasis is not None else CrasisLexicon()
    tokens = []
    for m in TOKEN_RE.finditer(text):
        surface = m.group()
        start = m.start() + 1
        entry = crasis.get(surface)
        if entry is None:
            tokens.append(TokenSpan(f"t{len(tokens) + 1}", start, len(surface), surface, surface))
            continue
        cut = entry.split_index
        tokens.append(TokenSpan(f"t{len(tokens) + 1}", start, cut, surface[:cut], entry.first_form))
        tokens.append(
            TokenSpan(f"t{len(tokens) + 1}", start + cut, len(surface) - cut, surface[cut:], entry.second_form)
        )
    return tokens


def has_coronis(word):
    """True if a smooth-breathing mark sits on a vowel preceded by a consonant.

    A breathing on the second vowel of a word-initial diphthong (``αὐτός``)
    is an ordinary breathing, not a coronis.
    """
    consonant_seen = False
    on_vowel = False
    for ch in unicodedata.normalize("NFD", word):
        if unicodedata.combining(ch):
            if ch == COMBINING_COMMA_ABOVE and on_vowel and consonant_seen:
                return True
        else:
            on_vowel = ch in GREEK_VOWELS
            if not on_vowel:
                consonant_seen = True
    return False


def detect_crasis_candidates(base):
    """Every graphic word (in text order, repeats included) carrying a coronis."""
    text = base.text if hasattr(base, "text") else base
    return [m.group() for m in WORD_RE.finditer(text) if has_coronis(m.group())]
