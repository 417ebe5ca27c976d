"""PAULA XML file sets.

One document becomes one directory of files named ``<doc>.<layer>.xml``:

* ``<doc>.text.xml`` -- the base text as the sole content of ``<body>``;
* one ``markList`` file per mark layer, character ranges written as
  ``#xpointer(string-range(//body,'',START,LENGTH))`` with 1-based START;
* one ``featList`` file per feature layer and one ``relList`` file per
  relation layer (``xlink:href`` = head, ``target`` = dependent, head ``#0``
  standing for the root);
* ``<doc>.anno.xml`` -- the annotation set listing every other file.

The sentence layer is never written to PAULA.
"""

import re
from pathlib import Path
from typing import NamedTuple
from xml.sax.saxutils import escape

from ..errors import InvalidGraph, MalformedPointer, MissingFile, UnvalidatedGraph
from ..graph import (
    SENTENCE_LAYER,
    TEXT,
    AnnotationGraph,
    FeatureLayer,
    MarkLayer,
    RelationLayer,
    validate,
)
from ..tei import BaseText
from .common import (
    ANNO,
    RESERVED,
    XLINK_NS,
    XML_NS,
    attr,
    comment,
    file_name,
    layer_order,
    parse_file,
    write_file,
)

POINTER = "#xpointer(string-range(//body,'',{start},{length}))"
_POINTER_RE = re.compile(r"#xpointer\(string-range\(//body,'',(\d+),(\d+)\)\)")
_HEADER = '<?xml version="1.0" encoding="UTF-8" standalone="no"?>\n<!DOCTYPE paula SYSTEM "paula_{kind}.dtd">\n'
_XLINK = f'xmlns:xlink="{XLINK_NS}"'

OMITTED_LAYERS = (SENTENCE_LAYER,)


class FileSet(NamedTuple):
    directory: str
    files: tuple


def _open(kind, paula_id, extra=""):
    return [_HEADER.format(kind=kind), '<paula version="1.1">\n', f"<header paula_id={attr(paula_id)}{extra}/>\n"]


def pointer(start, length):
    return POINTER.format(start=start, length=length)


def _text_file(doc, text):
    out = _open("text", f"{doc}.text", ' type="text"')
    out.append(f"<body>{escape(text)}</body>\n</paula>\n")
    return "".join(out)


def _mark_file(doc, layer, graph):
    base = file_name(doc, TEXT if layer.target_layer is None else layer.target_layer)
    out = _open("mark", f"{doc}.{layer.name}")
    out.append(f"<markList {_XLINK} type={attr(layer.name)} xml:base={attr(base)}>\n")
    text = graph.base.text
    if layer.target_layer is None:
        for mid, (start, length) in layer.marks.items():
            surface = text[start - 1:start - 1 + length]
            out.append(f"<mark id={attr(mid)} xlink:href={attr(pointer(start, length))}/>{comment(surface)}\n")
    else:
        for mid, ids in layer.marks.items():
            href = "(" + ",".join(f"#{i}" for i in ids) + ")"
            out.append(f"<mark id={attr(mid)} xlink:href={attr(href)}/>\n")
    out.append("</markList>\n</paula>\n")
    return "".join(out)


def _feat_file(doc, layer):
    out = _open("feat", f"{doc}.{layer.name}")
    out.append(
        f"<featList {_XLINK} type={attr(layer.name)} xml:base={attr(file_name(doc, layer.base_layer))}>\n"
    )
    for key, value in layer.values.items():
        out.append(f"<feat xlink:href={attr('#' + key)} value={attr(value)}/>\n")
    out.append("</featList>\n</paula>\n")
    return "".join(out)


def _rel_file(doc, layer):
    out = _open("rel", f"{doc}.{layer.name}")
    out.append(
        f"<relList {_XLINK} type={attr(layer.name)} xml:base={attr(file_name(doc, layer.base_layer))}>\n"
    )
    for n, (dep, head) in enumerate(layer.edges, 1):
        out.append(f"<rel id={attr(f'{layer.name}_{n}')} xlink:href={attr('#' + head)} target={attr('#' + dep)}/>\n")
    out.append("</relList>\n</paula>\n")
    return "".join(out)


def _anno_file(doc, names):
    out = _open("struct", f"{doc}.{ANNO}")
    out.append(f'<structList {_XLINK} type="annoSet">\n<struct id="anno_1">\n')
    for n, name in enumerate(names, 1):
        out.append(f"  <rel id=\"rel_{n}\" xlink:href={attr(name)}/>\n")
    out.append("</struct>\n</structList>\n</paula>\n")
    return "".join(out)


def paula_files(graph, check=True):
    """Render the file set as an ordered list of (file name, content) pairs.

    The graph must validate; pass ``check=False`` only for a graph the
    caller has just validated itself.
    """
    violations = validate(graph) if check else []
    if violations:
        raise UnvalidatedGraph(violations)
    doc = graph.base.document_id
    files = [(file_name(doc, TEXT), _text_file(doc, graph.base.text))]
    for name, layer in layer_order(graph.layers.items()):
        if name in OMITTED_LAYERS:
            continue
        if name in RESERVED:
            raise InvalidGraph([f"layer name {name!r} is reserved"])
        if isinstance(layer, MarkLayer):
            content = _mark_file(doc, layer, graph)
        elif isinstance(layer, FeatureLayer):
            content = _feat_file(doc, layer)
        else:
            content = _rel_file(doc, layer)
        files.append((file_name(doc, name), content))
    files.append((file_name(doc, ANNO), _anno_file(doc, [n for n, _ in files])))
    return files


def write_paula(graph, directory, check=True):
    files = paula_files(graph, check)
    for name, content in files:
        write_file(directory, name, content)
    return FileSet(str(directory), tuple(n for n, _ in files))


def _listed_files(directory, document_id):
    root = parse_file(directory, file_name(document_id, ANNO))
    return [el.get(f"{{{XLINK_NS}}}href") for el in root.iter("rel")]


def find_document_id(directory, suffix=f".{ANNO}.xml"):
    found = sorted(p.name[: -len(suffix)] for p in Path(directory).glob(f"*{suffix}"))
    if len(found) != 1:
        raise MissingFile(f"{directory}: expected one *{suffix} file, found {len(found)}")
    return found[0]


def _ref(href):
    if not href or not href.startswith("#"):
        raise MalformedPointer(f"bad id reference {href!r}")
    return href[1:]


def read_paula(directory, document_id=None):
    document_id = document_id or find_document_id(directory)
    names = _listed_files(directory, document_id)
    text_name = file_name(document_id, TEXT)
    if text_name not in names:
        raise MissingFile(f"{text_name} not listed in annotation set")
    body = parse_file(directory, text_name).find("body")
    if body is None or len(body):
        raise MalformedPointer(f"{text_name}: <body> missing or contains markup")
    base = BaseText(document_id, body.text or "")
    n = len(base.text)

    parsed = []
    by_file = {}
    for name in names:
        if name in (text_name, file_name(document_id, ANNO)):
            continue
        root = parse_file(directory, name)
        lst = next((c for c in root if c.tag in ("markList", "featList", "relList")), None)
        if lst is None:
            raise MalformedPointer(f"{name}: no markList, featList or relList")
        parsed.append((name, lst))
        by_file[name] = lst.get("type")
    by_file[text_name] = TEXT

    layers = []
    for name, lst in parsed:
        ltype = lst.get("type")
        base_file = lst.get(f"{{{XML_NS}}}base")
        if base_file not in by_file:
            raise MissingFile(f"{name} references {base_file!r}, which is not in the annotation set")
        target = by_file[base_file]
        if lst.tag == "markList":
            marks = {}
            for mark in lst.iter("mark"):
                mid, href = mark.get("id"), mark.get(f"{{{XLINK_NS}}}href") or ""
                if mid in marks:
                    raise MalformedPointer(f"{name}: duplicate id {mid}")
                if target == TEXT:
                    m = _POINTER_RE.fullmatch(href)
                    if not m:
                        raise MalformedPointer(f"{name}: {mid}: cannot parse {href!r}")
                    start, length = int(m.group(1)), int(m.group(2))
                    if start < 1 or length < 1 or start + length - 1 > n:
                        raise MalformedPointer(f"{name}: {mid}: range ({start}, {length}) outside 1..{n}")
                    marks[mid] = (start, length)
                else:
                    inner = href[1:-1] if href.startswith("(") and href.endswith(")") else href
                    marks[mid] = tuple(_ref(h.strip()) for h in inner.split(","))
            layers.append((ltype, MarkLayer(ltype, marks, None if target == TEXT else target)))
        elif lst.tag == "featList":
            values = {_ref(f.get(f"{{{XLINK_NS}}}href")): f.get("value", "") for f in lst.iter("feat")}
            layers.append((ltype, FeatureLayer(ltype, target, values)))
        else:
            edges = []
            for rel in lst.iter("rel"):
                head = _ref(rel.get(f"{{{XLINK_NS}}}href"))
                edges.append((_ref(rel.get("target")), head))
            layers.append((ltype, RelationLayer(ltype, target, edges)))
    return AnnotationGraph(base, [layer for _, layer in layer_order(layers)])
