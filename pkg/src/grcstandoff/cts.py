"""CTS passage citations for tokens.

The reference declaration in the TEI header (``refsDecl[@n='CTS']``) gives
one ``cRefPattern`` per citation depth, each with an XPath replacement
pattern holding ``$1``..``$n`` placeholders. The deepest pattern is parsed
into location steps; a token's citation is then read off the ancestor chain
of its source node by matching that chain against the steps, which is
equivalent to evaluating the substituted XPath per token but linear in the
size of the document.
"""

import logging
import re
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .errors import NoCtsDeclaration, UnsupportedTemplate
from .tei import NSMAP, TEI_NS, element_path, localname

log = logging.getLogger(__name__)

_PLACEHOLDER = re.compile(r"\$(\d+)")
_STEP = re.compile(r"^(?:([\w-]+):)?([\w.-]+)((?:\[[^\]]*\])*)$")
_CONDITION = re.compile(r"""^\s*@([\w:.-]+)\s*=\s*(['"])(.*?)\2\s*$""")


class Condition(NamedTuple):
    attr: str
    value: str
    level: Optional[int] = None  # placeholder number when value is "$k"


class Step(NamedTuple):
    prefix: Optional[str]
    name: str
    conditions: tuple

    @property
    def level(self):
        for c in self.conditions:
            if c.level is not None:
                return c.level
        return None

    def matches(self, el):
        if not isinstance(el.tag, str) or localname(el) != self.name:
            return False
        if self.prefix == "tei" and el.tag[0] == "{" and not el.tag.startswith("{" + TEI_NS):
            return False
        return all(c.level is not None or el.get(c.attr) == c.value for c in self.conditions)


def _split_steps(path):
    steps, depth, quote, cur = [], 0, None, []
    for ch in path:
        if quote:
            quote = None if ch == quote else quote
        elif ch in "'\"":
            quote = ch
        elif ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        elif ch == "/" and depth == 0:
            steps.append("".join(cur))
            cur = []
            continue
        cur.append(ch)
    steps.append("".join(cur))
    return steps


def parse_template(template):
    """Parse an absolute child-axis XPath into :class:`Step` objects."""
    if not template.startswith("/") or "//" in template:
        raise UnsupportedTemplate(f"need an absolute child-axis path: {template!r}")
    steps = []
    for raw in _split_steps(template)[1:]:
        m = _STEP.match(raw.strip())
        if not m:
            raise UnsupportedTemplate(f"cannot parse step {raw!r}")
        prefix, name, preds = m.groups()
        conditions = []
        for pred in re.findall(r"\[([^\]]*)\]", preds):
            for part in re.split(r"\s+and\s+", pred):
                c = _CONDITION.match(part)
                if not c:
                    raise UnsupportedTemplate(f"unsupported predicate [{pred}]")
                attr, _, value = c.groups()
                ph = _PLACEHOLDER.fullmatch(value)
                conditions.append(Condition(attr, value, int(ph.group(1)) if ph else None))
        steps.append(Step(prefix, name, tuple(conditions)))
    return tuple(steps)


def _strip_pointer(pattern):
    pattern = pattern.strip()
    if pattern.startswith("#xpointer("):
        pattern = pattern[len("#xpointer("):]
        if pattern.endswith(")"):
            pattern = pattern[:-1]
    # tolerate one stray closing parenthesis after the path
    while pattern.endswith(")") and pattern.count(")") > pattern.count("("):
        pattern = pattern[:-1]
    return pattern.strip()


@dataclass(frozen=True)
class CtsScheme:
    division_names: tuple
    xpath_template: str
    document_id: str = ""
    steps: tuple = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        numbers = [int(n) for n in _PLACEHOLDER.findall(self.xpath_template)]
        if numbers != list(range(1, len(numbers) + 1)):
            raise UnsupportedTemplate(f"placeholders must run $1..$n in order: {self.xpath_template!r}")
        if len(numbers) != len(self.division_names):
            raise UnsupportedTemplate(
                f"{len(numbers)} placeholders but {len(self.division_names)} division names"
            )
        if not self.steps:
            object.__setattr__(self, "steps", parse_template(self.xpath_template))

    @property
    def depth(self):
        return len(self.division_names)

    def xpath_for(self, components):
        """Substitute citation components into the template, truncated to their depth."""
        k = len(components)
        if k == 0 or k > self.depth:
            raise ValueError(f"citation depth {k} not in 1..{self.depth}")
        parts = _split_steps(self.xpath_template)
        out = [parts[0]]
        for raw, step in zip(parts[1:], self.steps):
            out.append(raw)
            if step.level == k:
                break
        path = "/".join(out)
        for i, value in enumerate(components, 1):
            path = path.replace(f"${i}", value)
        return path


@dataclass(frozen=True)
class CtsCitation:
    components: tuple = ()

    def __str__(self):
        return ".".join(self.components)

    def __bool__(self):
        return bool(self.components)

    @classmethod
    def parse(cls, text):
        return cls(tuple(text.split("."))) if text else cls()


def parse_scheme(document, document_id=""):
    root = document.getroot() if hasattr(document, "getroot") else document
    decls = [
        el for el in root.iter(f"{{{TEI_NS}}}refsDecl", "refsDecl")
        if el.get("n") == "CTS"
    ]
    if not decls:
        raise NoCtsDeclaration(f"{document_id or 'document'}: no refsDecl[@n='CTS']")
    patterns = []
    for decl in decls:
        for pat in decl.iter(f"{{{TEI_NS}}}cRefPattern", "cRefPattern"):
            rp = pat.get("replacementPattern")
            if rp:
                template = _strip_pointer(rp)
                patterns.append((len(set(_PLACEHOLDER.findall(template))), pat.get("n"), template))
    if not patterns:
        raise NoCtsDeclaration(f"{document_id or 'document'}: CTS refsDecl has no replacement patterns")
    depth, deepest_name, template = max(patterns, key=lambda p: p[0])
    names = []
    for level in range(1, depth + 1):
        named = [n for d, n, _ in patterns if d == level and n]
        names.append(named[0] if named else f"level{level}")
    if deepest_name:
        names[-1] = deepest_name
    return CtsScheme(tuple(names), template, document_id)


def _cite_element(el, scheme):
    chain = []
    while el is not None:
        chain.append(el)
        el = el.getparent()
    chain.reverse()
    components = []
    fallbacks = 0
    for step, node in zip(scheme.steps, chain):
        if not step.matches(node):
            break
        for c in step.conditions:
            if c.level is None:
                continue
            value = node.get(c.attr)
            if value is None:
                siblings = [s for s in node.itersiblings(preceding=True) if step.matches(s)]
                value = str(len(siblings) + 1)
                fallbacks += 1
            components.append(value)
    return CtsCitation(tuple(components)), fallbacks


def assign_citations(base, tokens, scheme, document):
    """Map each token id to the :class:`CtsCitation` of the division holding it."""
    cache = {}
    citations = {}
    uncited = []
    fallbacks = 0
    for tok in tokens:
        path = element_path(base.segment_at(tok.start).node_path)
        cit = cache.get(path)
        if cit is None:
            el = document.xpath(path, namespaces=NSMAP)[0]
            cit, n = _cite_element(el, scheme)
            fallbacks += n
            cache[path] = cit
        citations[tok.id] = cit
        if not cit:
            uncited.append(tok.id)
    if uncited:
        log.warning(
            "%s: %d tokens outside any CTS division (first: %s)",
            base.document_id, len(uncited), ", ".join(uncited[:5]),
        )
    if fallbacks:
        log.warning("%s: %d divisions lack @n, cited by sibling position", base.document_id, fallbacks)
    return citations


def resolve_citation(document, scheme, citation):
    """Evaluate the substituted template; returns the selected elements."""
    return document.xpath(scheme.xpath_for(citation.components), namespaces=NSMAP)
