"""Ingest external morphosyntactic annotation and align it to the token layer.

External file layout (UTF-8, one token per line, tab-separated)::

    ID  FORM  LEMMA  MORPH  HEAD  REL

``ID`` runs 1..n within a sentence, ``MORPH`` is a 9-character AGDT tag,
``HEAD`` is a token ``ID`` of the same sentence or 0 for the root. Blank
lines end sentences; lines starting with ``#`` are ignored.

Rows are aligned to tokens purely by (sentence ordinal, token ordinal).
"""

import logging
from dataclasses import dataclass
from importlib import resources
from typing import NamedTuple

from .errors import (
    BadHead,
    BadMorphTag,
    FormMismatch,
    InvalidGraph,
    MalformedRow,
    SentenceCountMismatch,
    TokenCountMismatch,
)
from .graph import (
    ROOT,
    SENTENCE_LAYER,
    TOKEN_LAYER,
    FeatureLayer,
    RelationLayer,
    validate,
)

log = logging.getLogger(__name__)

COLUMNS = ("ID", "FORM", "LEMMA", "MORPH", "HEAD", "REL")
EMPTY = "-"


class Tagset:
    """Allowed characters for each of the nine tag positions."""

    def __init__(self, positions):
        if len(positions) != 9:
            raise ValueError("an AGDT tagset has nine positions")
        self.names = [name for name, _ in positions]
        self.allowed = [frozenset(chars) | {EMPTY} for _, chars in positions]

    @classmethod
    def default(cls):
        text = resources.files("grcstandoff.data").joinpath("agdt_tagset.tsv").read_text("utf-8")
        rows = []
        for line in text.splitlines():
            if line.strip() and not line.startswith("#"):
                _pos, name, chars = line.split("\t")
                rows.append((name, chars))
        return cls(rows)

    def problems(self, tag):
        if len(tag) != 9:
            return [f"{tag!r} has {len(tag)} characters, expected 9"]
        return [
            f"{tag!r}: {ch!r} not allowed for {self.names[i]} (position {i + 1})"
            for i, ch in enumerate(tag)
            if ch not in self.allowed[i]
        ]


@dataclass(frozen=True)
class MorphTag:
    value: str

    @property
    def pos(self):
        return self.value[0]

    @property
    def features(self):
        return self.value[1:]

    def check(self, tagset=None):
        bad = (tagset or DEFAULT_TAGSET).problems(self.value)
        if bad:
            raise BadMorphTag("; ".join(bad))
        return self


DEFAULT_TAGSET = Tagset.default()


class ExternalRow(NamedTuple):
    id: int
    form: str
    lemma: str
    morph: MorphTag
    head: int
    relation: str


class ExternalSentence(NamedTuple):
    ordinal: int
    rows: tuple


def parse_external(content, tagset=None):
    """Parse an external annotation file's text into :class:`ExternalSentence` objects."""
    tagset = tagset or DEFAULT_TAGSET
    sentences = []
    block = []

    def close():
        if not block:
            return
        n = len(block)
        for lineno, row in block:
            if not 0 <= row.head <= n:
                raise BadHead(f"line {lineno}: head {row.head} outside 0..{n}")
        sentences.append(ExternalSentence(len(sentences) + 1, tuple(r for _, r in block)))
        block.clear()

    for lineno, line in enumerate(content.splitlines(), 1):
        if line.startswith("#"):
            continue
        if not line.strip():
            close()
            continue
        cols = line.split("\t")
        if len(cols) != len(COLUMNS):
            raise MalformedRow(f"line {lineno}: {len(cols)} columns, expected {len(COLUMNS)}")
        tid, form, lemma, morph, head, rel = (c.strip() for c in cols)
        try:
            tid = int(tid)
        except ValueError:
            raise MalformedRow(f"line {lineno}: token id {tid!r} is not an integer") from None
        if tid != len(block) + 1:
            raise MalformedRow(f"line {lineno}: token id {tid}, expected {len(block) + 1}")
        if not form or not lemma or not rel:
            raise MalformedRow(f"line {lineno}: empty FORM, LEMMA or REL")
        try:
            head = int(head)
        except ValueError:
            raise BadHead(f"line {lineno}: head {head!r} is not an integer") from None
        try:
            tag = MorphTag(morph).check(tagset)
        except BadMorphTag as e:
            raise BadMorphTag(f"line {lineno}: {e}") from None
        block.append((lineno, ExternalRow(tid, form, lemma, tag, head, rel)))
    close()
    return sentences


def read_external(path, tagset=None):
    with open(path, encoding="utf-8") as f:
        return parse_external(f.read(), tagset)


def token_forms(graph):
    text = graph.base.text
    forms = graph.layers["form"].values if "form" in graph.layers else {}
    out = {}
    for tid, (start, length) in graph.layers[TOKEN_LAYER].marks.items():
        out[tid] = forms.get(tid) or text[start - 1:start - 1 + length]
    return out


def align(graph, external, strict=False):
    """Add ``lemma``, ``morph``, ``dep`` and ``deprel`` layers to `graph` in place.

    Returns the list of :class:`FormMismatch` diagnostics; with ``strict``
    the first mismatch is raised instead.
    """
    if SENTENCE_LAYER not in graph.layers:
        raise SentenceCountMismatch("graph has no sentence layer")
    sentences = graph.sentence_token_ids()
    if len(sentences) != len(external):
        raise SentenceCountMismatch(f"graph has {len(sentences)} sentences, external file {len(external)}")
    forms = token_forms(graph)
    lemma, morph, deprel, edges, mismatches = {}, {}, {}, [], []
    for ordinal, (ids, ext) in enumerate(zip(sentences, external), 1):
        if len(ids) != len(ext.rows):
            raise TokenCountMismatch(ordinal, len(ids), len(ext.rows))
        for tid, row in zip(ids, ext.rows):
            if row.form != forms[tid]:
                problem = FormMismatch(tid, forms[tid], row.form)
                if strict:
                    raise problem
                mismatches.append(problem)
            lemma[tid] = row.lemma
            morph[tid] = row.morph.value
            deprel[tid] = row.relation
            edges.append((tid, ROOT if row.head == 0 else ids[row.head - 1]))
    new = [
        FeatureLayer("lemma", TOKEN_LAYER, lemma),
        FeatureLayer("morph", TOKEN_LAYER, morph),
        RelationLayer("dep", TOKEN_LAYER, edges),
        FeatureLayer("deprel", TOKEN_LAYER, deprel),
    ]
    trial = graph.without(*(layer.name for layer in new))
    for layer in new:
        trial.add_layer(layer)
    names = {layer.name for layer in new}
    violations = [v for v in validate(trial) if v.layer in names]
    if violations:
        raise InvalidGraph(violations)
    for layer in new:
        graph.add_layer(layer)
    if mismatches:
        log.warning("%s: %d form mismatches (first: %s)", graph.base.document_id, len(mismatches), mismatches[0])
    return mismatches
