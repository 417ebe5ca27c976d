"""Sentence segmentation over a token sequence."""

from dataclasses import dataclass

from .chars import CLOSING_WRAPPERS, SENTENCE_BOUNDARIES


@dataclass(frozen=True)
class SentenceSpan:
    id: str
    first_token: str
    last_token: str


def segment(tokens):
    """Close a sentence after each ``.``, ``;`` or ``·`` token.

    A boundary absorbs the closing brackets and quotes that directly follow
    it, so ``ἔφη . )`` ends on the parenthesis whichever order the edition
    uses. Trailing tokens without a boundary form a final sentence.
    """
    sentences = []
    n = len(tokens)
    first = 0
    i = 0
    while i < n:
        if tokens[i].surface in SENTENCE_BOUNDARIES:
            while i + 1 < n and tokens[i + 1].surface in CLOSING_WRAPPERS:
                i += 1
            sentences.append(SentenceSpan(f"s{len(sentences) + 1}", tokens[first].id, tokens[i].id))
            first = i + 1
        i += 1
    if first < n:
        sentences.append(SentenceSpan(f"s{len(sentences) + 1}", tokens[first].id, tokens[-1].id))
    return sentences


def sentence_members(sentences, tokens):
    """Expand spans to lists of token ids, in order."""
    position = {t.id: i for i, t in enumerate(tokens)}
    return [
        [tokens[j].id for j in range(position[s.first_token], position[s.last_token] + 1)]
        for s in sentences
    ]
