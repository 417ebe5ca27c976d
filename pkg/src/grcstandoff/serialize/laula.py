"""LAULA XML: a compact standoff dialect that points into the original TEI.

The layer structure mirrors PAULA, but repeating element and attribute
names are one character long (see ``data/laula_names.tsv``), metadata lives
in attributes rather than comments, and there is no separate base text
file: character-range marks address text nodes of the source TEI file.

A character-range mark file carries a node table ``<N>`` whose k-th ``<n
p="..."/>`` child holds the XPath of a TEI text node. Each mark then reads
``<m i="t1" n="k" o="OFFSET" l="LENGTH"/>``: the mark starts at 1-based
OFFSET inside node k and spans LENGTH base-text characters. Id-set marks
list their targets in ``h``, contiguous runs shortened to ``first..last``.

The annotation set header records the source file name (``s``) and the
SHA-256 of the base text (``c``) so readers can detect a base text rebuilt
with a different policy or lexicon.
"""

from importlib import resources
from pathlib import Path

from ..errors import MalformedPointer, OutOfRange, SourceMapMissing, UnvalidatedGraph
from ..graph import TEXT, AnnotationGraph, FeatureLayer, MarkLayer, RelationLayer, validate
from ..tei import extract_normalized, map_offset_to_source, parse_tei
from .common import (
    ANNO,
    XML_NS,
    attr,
    compress_ids,
    expand_ids,
    file_name,
    layer_order,
    parse_file,
    text_sha256,
    write_file,
)
from .paula import FileSet, find_document_id

_XML_DECL = '<?xml version="1.0" encoding="UTF-8"?>\n'
VERSION = "1.1"


def load_name_table():
    """Return ``(elements, attributes)`` PAULA -> LAULA name mappings."""
    elements, attributes = {}, {}
    text = resources.files("grcstandoff.data").joinpath("laula_names.tsv").read_text("utf-8")
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        kind, paula, laula = line.split("\t")[:3]
        if kind == "element":
            elements[paula] = laula
        elif kind == "attribute":
            attributes[paula] = laula
    for table in (elements, attributes):
        if len(set(table.values())) != len(table):
            raise ValueError("LAULA name table is not one-to-one")
    return elements, attributes


ELEMENTS, ATTRIBUTES = load_name_table()
E = ELEMENTS
A = ATTRIBUTES


def _open(paula_id, **extra):
    head = " ".join(f"{k}={attr(v)}" for k, v in extra.items())
    return [
        _XML_DECL,
        f"<{E['paula']} {A['version']}={attr(VERSION)}>\n",
        f"<{E['header']} {A['paula_id']}={attr(paula_id)}{' ' + head if head else ''}/>\n",
    ]


def _close(out):
    out.append(f"</{E['paula']}>\n")
    return "".join(out)


def _char_mark_file(doc, layer, base, source_name):
    nodes = {}
    rows = []
    for mid, (start, length) in layer.marks.items():
        path, offset = map_offset_to_source(base, start)
        k = nodes.setdefault(path, len(nodes) + 1)
        rows.append(f'<{E["mark"]} {A["id"]}={attr(mid)} n="{k}" o="{offset}" l="{length}"/>\n')
    out = _open(f"{doc}.{layer.name}")
    out.append("<N>\n")
    out.extend(f"<n p={attr(path)}/>\n" for path in nodes)
    out.append("</N>\n")
    out.append(f"<{E['markList']} {A['type']}={attr(layer.name)} {A['xml:base']}={attr(source_name)}>\n")
    out.extend(rows)
    out.append(f"</{E['markList']}>\n")
    return _close(out)


def _id_mark_file(doc, layer, graph):
    order = {i: k for k, i in enumerate(graph.layers[layer.target_layer].marks)}
    out = _open(f"{doc}.{layer.name}")
    out.append(
        f"<{E['markList']} {A['type']}={attr(layer.name)} "
        f"{A['xml:base']}={attr(file_name(doc, layer.target_layer))}>\n"
    )
    for mid, ids in layer.marks.items():
        out.append(f"<{E['mark']} {A['id']}={attr(mid)} {A['xlink:href']}={attr(compress_ids(ids, order))}/>\n")
    out.append(f"</{E['markList']}>\n")
    return _close(out)


def _feat_file(doc, layer):
    out = _open(f"{doc}.{layer.name}")
    out.append(
        f"<{E['featList']} {A['type']}={attr(layer.name)} "
        f"{A['xml:base']}={attr(file_name(doc, layer.base_layer))}>\n"
    )
    for key, value in layer.values.items():
        out.append(f"<{E['feat']} {A['xlink:href']}={attr(key)} {A['value']}={attr(value)}/>\n")
    out.append(f"</{E['featList']}>\n")
    return _close(out)


def _rel_file(doc, layer):
    out = _open(f"{doc}.{layer.name}")
    out.append(
        f"<{E['relList']} {A['type']}={attr(layer.name)} "
        f"{A['xml:base']}={attr(file_name(doc, layer.base_layer))}>\n"
    )
    for dep, head in layer.edges:
        out.append(f"<{E['rel']} {A['xlink:href']}={attr(head)} {A['target']}={attr(dep)}/>\n")
    out.append(f"</{E['relList']}>\n")
    return _close(out)


def _source_name(graph, tei):
    if tei is None:
        return f"{graph.base.document_id}.xml"
    if hasattr(tei, "docinfo"):
        url = tei.docinfo.URL
        return Path(url).name if url else f"{graph.base.document_id}.xml"
    return Path(str(tei)).name


def laula_files(graph, tei=None, check=True):
    violations = validate(graph) if check else []
    if violations:
        raise UnvalidatedGraph(violations)
    base = graph.base
    if base.text and not base.source_map:
        raise SourceMapMissing(base.document_id)
    doc = base.document_id
    source = _source_name(graph, tei)
    files = []
    for name, layer in layer_order(graph.layers.items()):
        if isinstance(layer, MarkLayer):
            if layer.target_layer is None:
                content = _char_mark_file(doc, layer, base, source)
            else:
                content = _id_mark_file(doc, layer, graph)
        elif isinstance(layer, FeatureLayer):
            content = _feat_file(doc, layer)
        else:
            content = _rel_file(doc, layer)
        files.append((file_name(doc, name), content))
    out = _open(f"{doc}.{ANNO}", s=source, c=text_sha256(base.text))
    out.append(f'<{E["structList"]} {A["type"]}="annoSet">\n<{E["struct"]} {A["id"]}="anno_1">\n')
    for n, (name, _) in enumerate(files, 1):
        out.append(f'  <{E["rel"]} {A["id"]}="rel_{n}" {A["xlink:href"]}={attr(name)}/>\n')
    out.append(f"</{E['struct']}>\n</{E['structList']}>\n")
    files.append((file_name(doc, ANNO), _close(out)))
    return files


def write_laula(graph, tei, directory, check=True):
    """Write the LAULA file set; `tei` is the source tree or path (only its file name is recorded)."""
    files = laula_files(graph, tei, check)
    for name, content in files:
        write_file(directory, name, content)
    return FileSet(str(directory), tuple(n for n, _ in files))


def read_laula(directory, tei, policy=None, lexicon=None, document_id=None):
    """Rebuild the graph from a LAULA file set and its source TEI (tree or path).

    `policy` and `lexicon` must be those used when the set was written.
    """
    document_id = document_id or find_document_id(directory)
    anno = parse_file(directory, file_name(document_id, ANNO))
    header = anno.find(E["header"])
    source, checksum = header.get("s"), header.get("c")
    tree = tei if hasattr(tei, "getroot") else parse_tei(tei)
    base, _ = extract_normalized(tree, policy, lexicon, document_id)
    if text_sha256(base.text) != checksum:
        raise MalformedPointer(f"{document_id}: base text rebuilt from TEI does not match the LAULA checksum")
    n = len(base.text)

    names = [el.get(A["xlink:href"]) for el in anno.iter(E["rel"])]
    parsed = []
    by_file = {source: TEXT}
    lists = (E["markList"], E["featList"], E["relList"])
    for name in names:
        root = parse_file(directory, name)
        lst = next((c for c in root if c.tag in lists), None)
        if lst is None:
            raise MalformedPointer(f"{name}: no mark, feature or relation list")
        parsed.append((name, root, lst))
        by_file[name] = lst.get(A["type"])

    layers = []
    for name, root, lst in parsed:
        ltype = lst.get(A["type"])
        base_file = lst.get(A["xml:base"]) or lst.get(f"{{{XML_NS}}}base")
        if base_file not in by_file:
            raise MalformedPointer(f"{name} references unknown file {base_file!r}")
        target = by_file[base_file]
        if lst.tag == E["markList"]:
            marks = {}
            if target == TEXT:
                table = root.find("N")
                paths = [el.get("p") for el in table] if table is not None else []
                for m in lst.iter(E["mark"]):
                    mid = m.get(A["id"])
                    if mid in marks:
                        raise MalformedPointer(f"{name}: duplicate id {mid}")
                    try:
                        k, offset, length = int(m.get("n")), int(m.get("o")), int(m.get("l"))
                        if not 1 <= k <= len(paths):
                            raise MalformedPointer(f"{name}: {mid}: node {k} not in node table")
                        start = base.offset_from_source(paths[k - 1], offset)
                    except (TypeError, ValueError, OutOfRange) as e:
                        raise MalformedPointer(f"{name}: {mid}: {e}") from None
                    if length < 1 or start + length - 1 > n:
                        raise MalformedPointer(f"{name}: {mid}: range ({start}, {length}) outside 1..{n}")
                    marks[mid] = (start, length)
                layers.append(MarkLayer(ltype, marks))
            else:
                ordered = None
                for m in lst.iter(E["mark"]):
                    if ordered is None:
                        ordered = _ids_of(parsed, target)
                    marks[m.get(A["id"])] = tuple(expand_ids(m.get(A["xlink:href"]), ordered))
                layers.append(MarkLayer(ltype, marks, target))
        elif lst.tag == E["featList"]:
            values = {f.get(A["xlink:href"]): f.get(A["value"], "") for f in lst.iter(E["feat"])}
            layers.append(FeatureLayer(ltype, target, values))
        else:
            edges = [(r.get(A["target"]), r.get(A["xlink:href"])) for r in lst.iter(E["rel"])]
            layers.append(RelationLayer(ltype, target, edges))
    ordered_layers = layer_order([(layer.name, layer) for layer in layers])
    graph = AnnotationGraph(base, [layer for _, layer in ordered_layers])
    return graph


def _ids_of(parsed, layer_name):
    for _name, _root, lst in parsed:
        if lst.tag == E["markList"] and lst.get(A["type"]) == layer_name:
            return [m.get(A["id"]) for m in lst.iter(E["mark"])]
    raise MalformedPointer(f"no mark layer {layer_name!r}")
