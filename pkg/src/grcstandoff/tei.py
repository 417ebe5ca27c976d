"""Text extraction from EpiDoc TEI documents.

The body of a TEI document is flattened into one base string. Content of
paratext elements (notes, apparatus, bibliography, ...) is dropped, content
of textual elements is kept, and ``<choice>`` keeps exactly one alternative.
While flattening, whitespace runs collapse to one space and each run of
text is NFC-normalized; every character of the result stays traceable to a
text node of the source document through :attr:`BaseText.source_map`.

Offsets in the source map are 1-based, both in the base text and inside
text nodes. Node paths are XPath location paths with explicit positional
predicates, e.g. ``/tei:TEI[1]/tei:text[1]/tei:body[1]/tei:div[1]/tei:p[2]/text()[1]``,
and evaluate against the parsed source with the ``tei`` prefix bound to the
TEI namespace.
"""

import bisect
import logging
import re
import unicodedata
from dataclasses import dataclass, field, replace
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import NamedTuple, Optional

from lxml import etree

from .errors import ConfigError, MissingBody, OutOfRange
from .chars import MODIFIER_APOSTROPHE
from .normalize import SUBSTITUTED, ElisionLexicon, clusters, normalize_apostrophes

log = logging.getLogger(__name__)

TEI_NS = "http://www.tei-c.org/ns/1.0"
NSMAP = {"tei": TEI_NS}

_RUNS = re.compile(r"\s+|\S+")


class ElementRule(NamedTuple):
    name: str
    attr: Optional[str] = None
    value: Optional[str] = None

    @classmethod
    def parse(cls, spec):
        m = re.fullmatch(r"\s*([\w.-]+)\s*(?:\[\s*([\w:.-]+)\s*=\s*['\"]?([^'\"\]]*)['\"]?\s*\])?\s*", spec)
        if not m:
            raise ConfigError(f"bad element rule: {spec!r}")
        return cls(*m.groups())

    def matches(self, name, el):
        if name != self.name:
            return False
        return self.attr is None or el.get(self.attr) == self.value

    def __str__(self):
        return self.name if self.attr is None else f"{self.name}[{self.attr}={self.value}]"


@dataclass(frozen=True)
class ElementPolicy:
    discard: frozenset = frozenset()
    keep: frozenset = frozenset()
    block: frozenset = frozenset()
    choice_preferences: tuple = ()

    def __post_init__(self):
        overlap = self.discard & self.keep
        if overlap:
            raise ConfigError(f"elements both kept and discarded: {sorted(map(str, overlap))}")
        for pair in self.choice_preferences:
            if len(pair) != 2 or pair[0] == pair[1]:
                raise ConfigError(f"choice preference needs one winner and one loser: {pair!r}")

    def _match(self, rules, name, el):
        return any(r.matches(name, el) for r in rules)

    def is_discarded(self, name, el):
        return self._match(self.discard, name, el)

    def is_known(self, name, el):
        return self._match(self.keep, name, el) or self._match(self.discard, name, el)

    def is_block(self, name):
        return any(r.name == name for r in self.block)

    @classmethod
    def parse(cls, text):
        values = {}
        pending = ""
        for raw in text.splitlines():
            line = raw.strip()
            if not pending and (not line or line.startswith("#")):
                continue
            if line.endswith("\\"):
                pending += line[:-1] + " "
                continue
            line, pending = pending + line, ""
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"expected 'key = values': {raw!r}")
            key = key.strip()
            if key not in ("discard", "keep", "block", "choice"):
                raise ConfigError(f"unknown policy key {key!r}")
            items = [v.strip() for v in value.split(",") if v.strip()]
            values.setdefault(key, []).extend(items)
        prefs = []
        for item in values.get("choice", []):
            winner, sep, loser = item.partition(">")
            if not sep:
                raise ConfigError(f"choice preference must read 'winner > loser': {item!r}")
            prefs.append((winner.strip(), loser.strip()))
        return cls(
            discard=frozenset(ElementRule.parse(v) for v in values.get("discard", [])),
            keep=frozenset(ElementRule.parse(v) for v in values.get("keep", [])),
            block=frozenset(ElementRule.parse(v) for v in values.get("block", [])),
            choice_preferences=tuple(prefs),
        )

    @classmethod
    def load(cls, path):
        return cls.parse(Path(path).read_text(encoding="utf-8"))

    @classmethod
    def default(cls):
        return cls.parse(resources.files("grcstandoff.data").joinpath("policy.cfg").read_text("utf-8"))


class SourceSegment(NamedTuple):
    """One entry of the offset map.

    ``exact`` segments copy node characters one-to-one, so any offset inside
    them maps to the matching node offset. Other segments are atomic: a
    whitespace run collapsed to a space, an NFC-rewritten cluster, or a
    ``synthetic`` separator inserted at a block boundary (``node_length`` 0,
    ``node_path`` naming the block element).
    """

    text_start: int
    text_length: int
    node_path: str
    node_start: int
    node_length: int
    exact: bool = True
    synthetic: bool = False

    @property
    def text_end(self):
        return self.text_start + self.text_length


@dataclass(frozen=True)
class BaseText:
    document_id: str
    text: str
    source_map: tuple = ()
    nfc_changes: int = field(default=0, compare=False)

    def __len__(self):
        return len(self.text)

    @cached_property
    def _starts(self):
        return [s.text_start for s in self.source_map]

    @cached_property
    def _by_path(self):
        index = {}
        for seg in self.source_map:
            if not seg.synthetic:
                index.setdefault(seg.node_path, []).append(seg)
        return {path: ([s.node_start for s in segs], segs) for path, segs in index.items()}

    def segment_at(self, offset):
        if not 1 <= offset <= len(self.text):
            raise OutOfRange(f"offset {offset} outside 1..{len(self.text)}")
        if not self.source_map:
            raise OutOfRange("base text has no source map")
        return self.source_map[bisect.bisect_right(self._starts, offset) - 1]

    def offset_from_source(self, node_path, offset_in_node):
        """Inverse of :func:`map_offset_to_source` for offsets that start a segment or fall in an exact one."""
        starts, segs = self._by_path.get(node_path, ((), ()))
        k = bisect.bisect_right(starts, offset_in_node) - 1
        if k >= 0:
            seg = segs[k]
            if seg.exact and offset_in_node < seg.node_start + seg.node_length:
                return seg.text_start + offset_in_node - seg.node_start
            if offset_in_node == seg.node_start:
                return seg.text_start
        raise OutOfRange(f"no base offset for {node_path} @ {offset_in_node}")


def map_offset_to_source(base, offset):
    """Return ``(node_path, offset_in_node)`` for a 1-based base-text offset."""
    seg = base.segment_at(offset)
    if seg.exact:
        return seg.node_path, seg.node_start + offset - seg.text_start
    return seg.node_path, seg.node_start


def element_path(node_path):
    """Strip a trailing ``/text()[k]`` step, leaving the owning element's path."""
    head, sep, tail = node_path.rpartition("/")
    return head if tail.startswith("text()") else node_path


def localname(el):
    tag = el.tag
    return tag[tag.index("}") + 1:] if tag[0] == "{" else tag


def _step(el):
    tag = el.tag
    if tag.startswith("{" + TEI_NS + "}"):
        return "tei:" + tag[len(TEI_NS) + 2:]
    if tag[0] == "{":
        ns, name = tag[1:].split("}")
        return f"*[local-name()='{name}' and namespace-uri()='{ns}']"
    return tag


class _PathIndex:
    def __init__(self):
        self._paths = {}

    def __call__(self, el):
        path = self._paths.get(el)
        if path is None:
            parent = el.getparent()
            if parent is None:
                path = f"/{_step(el)}[1]"
                self._paths[el] = path
            else:
                base = self(parent)
                counts = {}
                for sib in parent:
                    if isinstance(sib.tag, str):
                        counts[sib.tag] = counts.get(sib.tag, 0) + 1
                        self._paths[sib] = f"{base}/{_step(sib)}[{counts[sib.tag]}]"
                path = self._paths[el]
        return path


class _Builder:
    def __init__(self):
        self.parts = []
        self.length = 0
        self.last = ""
        self.segments = []
        self.nfc_changes = 0

    def _add(self, text, path, node_start, node_length, exact, synthetic=False):
        seg = SourceSegment(self.length + 1, len(text), path, node_start, node_length, exact, synthetic)
        prev = self.segments[-1] if self.segments else None
        if (
            exact and prev is not None and prev.exact and not prev.synthetic
            and prev.node_path == path
            and prev.node_start + prev.node_length == node_start
        ):
            self.segments[-1] = prev._replace(
                text_length=prev.text_length + len(text), node_length=prev.node_length + node_length
            )
        else:
            self.segments.append(seg)
        self.parts.append(text)
        self.length += len(text)
        self.last = text[-1]

    def separate(self, path):
        if self.length and self.last != " ":
            self._add(" ", path, 1, 0, exact=False, synthetic=True)

    def emit(self, s, path):
        for m in _RUNS.finditer(s):
            run = m.group()
            start = m.start() + 1
            if run[0].isspace():
                if self.length and self.last != " ":
                    self._add(" ", path, start, len(run), exact=run == " ")
            elif unicodedata.is_normalized("NFC", run):
                self._add(run, path, start, len(run), exact=True)
            else:
                self._emit_unnormalized(run, path, start)

    def _emit_unnormalized(self, run, path, start):
        whole = unicodedata.normalize("NFC", run)
        pieces = [(i, j, unicodedata.normalize("NFC", run[i:j])) for i, j in clusters(run)]
        if "".join(p for _, _, p in pieces) != whole:
            self.nfc_changes += 1
            self._add(whole, path, start, len(run), exact=False)
            return
        for i, j, norm in pieces:
            if norm == run[i:j]:
                self._add(norm, path, start + i, j - i, exact=True)
            else:
                self.nfc_changes += 1
                self._add(norm, path, start + i, j - i, exact=False)

    def finish(self):
        if self.length and self.last == " ":
            seg = self.segments[-1]
            if seg.text_length > 1:
                self.segments[-1] = seg._replace(text_length=seg.text_length - 1, node_length=seg.node_length - 1)
            else:
                self.segments.pop()
            self.parts[-1] = self.parts[-1][:-1]
            self.length -= 1
        return "".join(self.parts), tuple(self.segments)


def _bodies(root):
    found = []
    for el in root.iter(f"{{{TEI_NS}}}body", "body"):
        anc = el.getparent()
        while anc is not None and localname(anc) != "body":
            anc = anc.getparent()
        if anc is None:
            found.append(el)
    return found


def classify_and_extract(document, policy=None, document_id=None):
    """Flatten the TEI body of `document` (an lxml tree or root element) into a :class:`BaseText`."""
    policy = policy or ElementPolicy.default()
    root = document.getroot() if hasattr(document, "getroot") else document
    if document_id is None:
        document_id = document_id_from_path(getattr(root.getroottree().docinfo, "URL", None) or "document")
    bodies = _bodies(root)
    if not bodies:
        raise MissingBody(f"{document_id}: no <body> element")

    paths = _PathIndex()
    out = _Builder()
    unknown = set()

    def walk(el):
        name = localname(el)
        if policy.is_discarded(name, el):
            return
        if not policy.is_known(name, el):
            unknown.add(name)
        block = policy.is_block(name)
        if block:
            out.separate(paths(el))
        winner = _choose(el, policy) if name == "choice" else None
        base = None
        k = 0
        if el.text:
            k += 1
            base = paths(el)
            out.emit(el.text, f"{base}/text()[{k}]")
        for child in el:
            if isinstance(child.tag, str) and (winner is None or child is winner):
                walk(child)
            if child.tail:
                k += 1
                base = base or paths(el)
                out.emit(child.tail, f"{base}/text()[{k}]")
        if block:
            out.separate(paths(el))

    for body in bodies:
        out.separate(paths(body))
        walk(body)
    if unknown:
        log.info("%s: kept content of unlisted elements: %s", document_id, ", ".join(sorted(unknown)))
    text, segments = out.finish()
    if not unicodedata.is_normalized("NFC", text):
        log.warning("%s: markup splits a combining sequence; base text is not fully NFC", document_id)
    return BaseText(document_id, text, segments, nfc_changes=out.nfc_changes)


def _choose(choice, policy):
    children = [c for c in choice if isinstance(c.tag, str)]
    names = {}
    for c in children:
        names.setdefault(localname(c), c)
    for winner, _loser in policy.choice_preferences:
        if winner in names:
            return names[winner]
    return children[0] if children else None


def document_id_from_path(path):
    name = Path(str(path)).name
    return name[:-4] if name.lower().endswith(".xml") else name


def parse_tei(source):
    """Parse a TEI file path or bytes into an lxml tree."""
    parser = etree.XMLParser(no_network=True, huge_tree=True, remove_blank_text=False)
    if isinstance(source, (bytes, bytearray)):
        return etree.ElementTree(etree.fromstring(bytes(source), parser))
    return etree.parse(str(source), parser)


def load_base_text(path, policy=None):
    tree = parse_tei(path)
    return tree, classify_and_extract(tree, policy, document_id_from_path(path))


def node_text(tree, node_path):
    result = tree.xpath(node_path, namespaces=NSMAP)
    if not result:
        raise OutOfRange(f"path does not resolve: {node_path}")
    node = result[0]
    return node if isinstance(node, str) else None


def _same_modulo_apostrophes(source, produced):
    if len(source) != len(produced):
        return False
    return all(
        a == b or (b == MODIFIER_APOSTROPHE and a in SUBSTITUTED) for a, b in zip(source, produced)
    )


def verify_source_map(base, tree):
    """Check the source map of `base` against the parsed source; returns problem strings."""
    problems = []
    expected = 1
    cache = {}
    for seg in base.source_map:
        if seg.text_start != expected:
            problems.append(f"gap or overlap at text offset {expected}")
        expected = seg.text_end
        if seg.node_path not in cache:
            cache[seg.node_path] = tree.xpath(seg.node_path, namespaces=NSMAP)
        found = cache[seg.node_path]
        if not found:
            problems.append(f"unresolvable path {seg.node_path}")
            continue
        if seg.synthetic:
            if base.text[seg.text_start - 1:seg.text_end - 1] != " ":
                problems.append(f"synthetic segment at {seg.text_start} is not a space")
            continue
        source = str(found[0])[seg.node_start - 1:seg.node_start - 1 + seg.node_length]
        produced = base.text[seg.text_start - 1:seg.text_end - 1]
        rebuilt = " " if source.isspace() else unicodedata.normalize("NFC", source)
        if seg.exact and len(source) != len(produced) or not _same_modulo_apostrophes(rebuilt, produced):
            problems.append(f"segment at {seg.text_start}: node {source!r} vs text {produced!r}")
    if expected != len(base.text) + 1:
        problems.append(f"map covers 1..{expected - 1}, text has {len(base.text)} characters")
    return problems


def extract_normalized(document, policy=None, lexicon=None, document_id=None):
    """Extract the base text and unify apostrophes; returns ``(BaseText, NormalizationReport)``.

    Apostrophe substitution is one-to-one, so the source map of the raw
    extraction stays valid.
    """
    raw = classify_and_extract(document, policy, document_id)
    text, report = normalize_apostrophes(raw.text, lexicon or ElisionLexicon.default())
    report.nfc_changes = raw.nfc_changes
    return replace(raw, text=text), report
