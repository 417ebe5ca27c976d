"""In-memory standoff annotation graph.

A graph holds one :class:`~grcstandoff.tei.BaseText` and named layers:

* :class:`MarkLayer` -- marks pointing either at 1-based ``(start, length)``
  character ranges of the base text or at ids of another mark layer;
* :class:`FeatureLayer` -- string values keyed by ids of a mark layer;
* :class:`RelationLayer` -- directed ``(dependent, head)`` edges over a mark
  layer, where the head may be :data:`ROOT`.

Every layer references exactly one other layer or the base text, so the
layers form a reference graph that must stay acyclic. :func:`validate`
reports violations as data; :meth:`AnnotationGraph.add_layer` refuses layers
that would break referential integrity.
"""

from collections import Counter, deque
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .errors import CycleIntroduced, DanglingReference, DuplicateLayerName

ROOT = "0"
TEXT = "text"  # pseudo layer name of the base text
TOKEN_LAYER = "tok"
SENTENCE_LAYER = "sent"
MORPH_LENGTH = 9


@dataclass
class MarkLayer:
    name: str
    marks: dict = field(default_factory=dict)
    target_layer: Optional[str] = None  # None: marks are (start, length) into the base text

    @property
    def depends_on(self):
        return self.target_layer or TEXT


@dataclass
class FeatureLayer:
    name: str
    base_layer: str
    values: dict = field(default_factory=dict)

    @property
    def depends_on(self):
        return self.base_layer


@dataclass
class RelationLayer:
    name: str
    base_layer: str
    edges: list = field(default_factory=list)

    @property
    def depends_on(self):
        return self.base_layer

    def __eq__(self, other):
        if not isinstance(other, RelationLayer):
            return NotImplemented
        return (
            self.name == other.name
            and self.base_layer == other.base_layer
            and Counter(map(tuple, self.edges)) == Counter(map(tuple, other.edges))
        )

    def heads(self):
        return {dep: head for dep, head in self.edges}


class Violation(NamedTuple):
    code: str
    layer: str
    message: str

    def __str__(self):
        return f"[{self.code}] {self.layer}: {self.message}"


class AnnotationGraph:
    def __init__(self, base, layers=()):
        self.base = base
        self.layers = {}
        for layer in layers:
            self.add_layer(layer)

    def __repr__(self):
        return f"AnnotationGraph({self.base.document_id!r}, layers={list(self.layers)})"

    def __eq__(self, other):
        if not isinstance(other, AnnotationGraph):
            return NotImplemented
        return (
            self.base.document_id == other.base.document_id
            and self.base.text == other.base.text
            and self.layers == other.layers
        )

    def __getitem__(self, name):
        return self.layers[name]

    def __contains__(self, name):
        return name in self.layers

    def add_layer(self, layer):
        if layer.name in self.layers or layer.name == TEXT:
            raise DuplicateLayerName(layer.name)
        dep = layer.depends_on
        if dep == layer.name:
            raise CycleIntroduced(f"{layer.name} references itself")
        if dep != TEXT and dep not in self.layers:
            raise DanglingReference(f"{layer.name} references missing layer {dep!r}")
        if not isinstance(layer, MarkLayer) or layer.target_layer is not None:
            if not isinstance(self.layers.get(dep), MarkLayer):
                raise DanglingReference(f"{layer.name} must reference a mark layer, not {dep!r}")
            known = self.layers[dep].marks
            missing = [i for i in _referenced_ids(layer) if i not in known]
            if missing:
                raise DanglingReference(f"{layer.name}: unknown ids in {dep}: {missing[:5]}")
        self.layers[layer.name] = layer
        if find_layer_cycle(self.layers):
            del self.layers[layer.name]
            raise CycleIntroduced(layer.name)
        return self

    def without(self, *names):
        kept = [layer for name, layer in self.layers.items() if name not in names]
        return AnnotationGraph(self.base, kept)

    def layer_depth(self, name):
        """Number of reference hops from layer `name` down to the base text."""
        depth = 0
        while name != TEXT:
            name = self.layers[name].depends_on
            depth += 1
        return depth

    def token_ids(self):
        return list(self.layers[TOKEN_LAYER].marks)

    def sentence_token_ids(self):
        return [list(t) for t in self.layers[SENTENCE_LAYER].marks.values()]

    def validate(self):
        return validate(self)


def _referenced_ids(layer):
    if isinstance(layer, MarkLayer):
        for target in layer.marks.values():
            yield from target
    elif isinstance(layer, FeatureLayer):
        yield from layer.values
    else:
        for dep, head in layer.edges:
            yield dep
            if head != ROOT:
                yield head


def find_layer_cycle(layers):
    """DFS over the layer reference graph; returns a cycle as a list of names or None."""
    state = {}
    for start in layers:
        if start in state:
            continue
        path = []
        node = start
        while node in layers and node not in state:
            state[node] = "open"
            path.append(node)
            node = layers[node].depends_on
        if node in layers and state.get(node) == "open":
            return path[path.index(node):]
        for n in path:
            state[n] = "done"
    return None


def dependency_cycles(edges):
    """Nodes left after Kahn's algorithm on head -> dependent edges.

    The result is empty exactly when the edge set has no directed cycle.
    """
    indegree = Counter()
    children = {}
    nodes = set()
    for dep, head in edges:
        nodes.update((dep, head))
        indegree[dep] += 1
        children.setdefault(head, []).append(dep)
    queue = deque(n for n in nodes if indegree[n] == 0)
    seen = 0
    while queue:
        n = queue.popleft()
        seen += 1
        for c in children.get(n, ()):
            indegree[c] -= 1
            if indegree[c] == 0:
                queue.append(c)
    if seen == len(nodes):
        return set()
    return {n for n in nodes if indegree[n] > 0}


def validate(graph):
    """Check every structural invariant of `graph`; returns a list of :class:`Violation`."""
    out = []
    layers = graph.layers
    text = graph.base.text

    for name, layer in layers.items():
        dep = layer.depends_on
        if dep != TEXT and dep not in layers:
            out.append(Violation("dangling-layer", name, f"references missing layer {dep!r}"))
    cycle = find_layer_cycle(layers)
    if cycle:
        out.append(Violation("layer-cycle", cycle[0], " -> ".join(cycle)))

    tok = layers.get(TOKEN_LAYER)
    if not isinstance(tok, MarkLayer) or tok.target_layer is not None:
        out.append(Violation("token-layer", TOKEN_LAYER, "graph needs exactly one character-range token layer"))
        tok = None

    for name, layer in layers.items():
        if isinstance(layer, MarkLayer):
            if layer.target_layer is None:
                out.extend(_check_ranges(layer, text))
            else:
                out.extend(_check_id_marks(layer, layers))
        elif isinstance(layer, FeatureLayer):
            out.extend(_check_features(layer, layers))
        elif isinstance(layer, RelationLayer):
            out.extend(_check_relation(layer, layers))

    if tok is not None:
        out.extend(_check_token_partition(tok, text))
        sent = layers.get(SENTENCE_LAYER)
        if sent is not None:
            out.extend(_check_sentence_partition(sent, tok))
    return out


def _check_ranges(layer, text):
    out = []
    n = len(text)
    for mid, target in layer.marks.items():
        try:
            start, length = target
        except (TypeError, ValueError):
            out.append(Violation("bad-target", layer.name, f"{mid}: {target!r} is not (start, length)"))
            continue
        if start < 1 or length < 1 or start + length - 1 > n:
            out.append(Violation("offset", layer.name, f"{mid}: range ({start}, {length}) outside 1..{n}"))
    return out


def _check_id_marks(layer, layers):
    target = layers.get(layer.target_layer)
    if not isinstance(target, MarkLayer):
        return [Violation("dangling-layer", layer.name, f"target {layer.target_layer!r} is not a mark layer")]
    out = []
    for mid, ids in layer.marks.items():
        if not ids:
            out.append(Violation("empty-mark", layer.name, f"{mid} references nothing"))
        for i in ids:
            if i not in target.marks:
                out.append(Violation("dangling-id", layer.name, f"{mid} -> {i} not in {layer.target_layer}"))
    return out


def _check_features(layer, layers):
    base = layers.get(layer.base_layer)
    known = base.marks if isinstance(base, MarkLayer) else {}
    out = []
    for key, value in layer.values.items():
        if key not in known:
            out.append(Violation("dangling-id", layer.name, f"{key} not in {layer.base_layer}"))
        if layer.name == "morph" and len(value) != MORPH_LENGTH:
            out.append(Violation("morph-length", layer.name, f"{key}: {value!r} is not {MORPH_LENGTH} characters"))
        if layer.name == "lemma" and (not value or any(c.isspace() for c in value)):
            out.append(Violation("lemma-form", layer.name, f"{key}: {value!r} is not a single word form"))
    return out


def _check_relation(layer, layers):
    base = layers.get(layer.base_layer)
    known = base.marks if isinstance(base, MarkLayer) else {}
    out = []
    heads = Counter()
    for dep, head in layer.edges:
        heads[dep] += 1
        if dep not in known:
            out.append(Violation("dangling-id", layer.name, f"dependent {dep} not in {layer.base_layer}"))
        if head != ROOT and head not in known:
            out.append(Violation("dangling-id", layer.name, f"head {head} not in {layer.base_layer}"))
        if dep == ROOT:
            out.append(Violation("root-dependent", layer.name, "ROOT cannot be a dependent"))
    for dep, count in sorted(heads.items()):
        if count > 1:
            out.append(Violation("multiple-heads", layer.name, f"{dep} has {count} heads"))
    cyclic = dependency_cycles(layer.edges)
    if cyclic:
        out.append(Violation("dependency-cycle", layer.name, f"cycle through {sorted(cyclic)[:8]}"))
    children = {}
    for dep, head in layer.edges:
        children.setdefault(head, []).append(dep)
    reached = {ROOT}
    todo = [ROOT]
    while todo:
        for c in children.get(todo.pop(), ()):
            if c not in reached:
                reached.add(c)
                todo.append(c)
    unrooted = sorted({d for d, _ in layer.edges} - reached - cyclic)
    if unrooted:
        out.append(Violation("unrooted", layer.name, f"no path to ROOT from {unrooted[:8]}"))

    sent = layers.get(SENTENCE_LAYER)
    if isinstance(sent, MarkLayer) and sent.target_layer == layer.base_layer:
        where = {t: s for s, ids in sent.marks.items() for t in ids}
        for dep, head in layer.edges:
            if head != ROOT and where.get(dep) != where.get(head):
                out.append(Violation("cross-sentence", layer.name, f"{dep} -> {head} crosses sentences"))
    return out


def _check_token_partition(tok, text):
    out = []
    covered = bytearray(len(text))
    prev_end = 1
    prev_id = None
    for tid, target in tok.marks.items():
        try:
            start, length = target
        except (TypeError, ValueError):
            continue
        if start < prev_end:
            out.append(Violation("token-order", tok.name, f"{tid} starts before the end of {prev_id}"))
        prev_end, prev_id = start + length, tid
        surface = text[start - 1:start - 1 + length]
        if any(c.isspace() for c in surface):
            out.append(Violation("token-whitespace", tok.name, f"{tid} covers whitespace"))
        for i in range(max(start - 1, 0), min(start - 1 + length, len(text))):
            covered[i] += 1
    uncovered = [i + 1 for i, c in enumerate(text) if not c.isspace() and not covered[i]]
    if uncovered:
        out.append(Violation("token-coverage", tok.name, f"uncovered characters at {uncovered[:8]}"))
    return out


def _check_sentence_partition(sent, tok):
    if sent.target_layer != TOKEN_LAYER:
        return [Violation("sentence-layer", sent.name, "sentences must reference the token layer")]
    order = list(tok.marks)
    flat = [i for ids in sent.marks.values() for i in ids]
    if flat != order:
        return [Violation("sentence-partition", sent.name, "sentences do not partition the tokens in order")]
    return []
