"""Character classes shared by normalization, tokenization and segmentation."""

import unicodedata

MODIFIER_APOSTROPHE = "ʼ"
COMBINING_COMMA_ABOVE = "̓"
KORONIS = "᾽"
ASCII_APOSTROPHE = "'"
RIGHT_SINGLE_QUOTE = "’"
AMBIGUOUS_APOSTROPHES = frozenset({ASCII_APOSTROPHE, RIGHT_SINGLE_QUOTE})

MIDDLE_DOT = "·"
# the NFC images of GREEK QUESTION MARK and GREEK ANO TELEIA
SENTENCE_BOUNDARIES = frozenset({".", ";", MIDDLE_DOT})

CLOSING_WRAPPERS = frozenset({")", "]", "}", "»", "”", RIGHT_SINGLE_QUOTE, "›", "⟩"})

# Every member is a one-character token of its own. U+02BC is deliberately
# absent: it is the elision mark and stays inside its word.
PUNCTUATION = frozenset(
    {".", ",", ";", MIDDLE_DOT, "(", ")", "[", "]", '"', "«", "»", "—", "?"}
    | {":", "!", "{", "}", "–", "‘", "“", "”", "‹", "›", "⟨", "⟩"}
    | AMBIGUOUS_APOSTROPHES
)

GREEK_VOWELS = frozenset("αεηιουωΑΕΗΙΟΥΩ")


def is_word_char(ch):
    return not ch.isspace() and ch not in PUNCTUATION


def base_letter(ch):
    """Return the first code point of the canonical decomposition of `ch`."""
    return unicodedata.normalize("NFD", ch)[0]


def is_vowel(ch):
    return base_letter(ch) in GREEK_VOWELS
