"""Helpers shared by the PAULA and LAULA writers and readers."""

import hashlib
import re
from pathlib import Path
from xml.sax.saxutils import quoteattr

from lxml import etree

from ..errors import IoFailure, MalformedPointer, MissingFile
from ..graph import TEXT, MarkLayer

XLINK_NS = "http://www.w3.org/1999/xlink"
XML_NS = "http://www.w3.org/XML/1998/namespace"
ANNO = "anno"
RESERVED = {TEXT, ANNO}


def file_name(document_id, layer):
    return f"{document_id}.{layer}.xml"


def attr(value):
    return quoteattr(str(value), {"\n": "&#10;", "\r": "&#13;", "\t": "&#9;"})


def text_sha256(text):
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def write_file(directory, name, content):
    try:
        Path(directory).mkdir(parents=True, exist_ok=True)
        (Path(directory) / name).write_bytes(content.encode("utf-8"))
    except OSError as e:
        raise IoFailure(f"cannot write {name}: {e}") from e


def parse_file(directory, name):
    path = Path(directory) / name
    if not path.is_file():
        raise MissingFile(str(path))
    try:
        return etree.parse(str(path), etree.XMLParser(no_network=True, huge_tree=True)).getroot()
    except etree.XMLSyntaxError as e:
        raise MalformedPointer(f"{path}: not well-formed XML: {e}") from e


def compress_ids(ids, order):
    """Render ids as space-separated items, contiguous runs (in `order`) as ``a..b``."""
    parts = []
    run = []
    for i in ids:
        if run and order.get(i) == order.get(run[-1], -2) + 1:
            run.append(i)
            continue
        if run:
            parts.append(run[0] if len(run) == 1 else f"{run[0]}..{run[-1]}")
        run = [i]
    if run:
        parts.append(run[0] if len(run) == 1 else f"{run[0]}..{run[-1]}")
    return " ".join(parts)


def expand_ids(spec, ordered_ids):
    position = {i: k for k, i in enumerate(ordered_ids)}
    out = []
    for item in spec.split():
        first, sep, last = item.partition("..")
        if not sep:
            out.append(item)
            continue
        if first not in position or last not in position or position[last] < position[first]:
            raise MalformedPointer(f"bad id range {item!r}")
        out.extend(ordered_ids[position[first]:position[last] + 1])
    return out


def layer_order(layers):
    """Order (name, layer) pairs so every layer follows the one it references."""
    done = {TEXT}
    pending = list(layers)
    ordered = []
    while pending:
        progress = False
        for item in list(pending):
            if item[1].depends_on in done:
                ordered.append(item)
                done.add(item[0])
                pending.remove(item)
                progress = True
        if not progress:
            names = [n for n, _ in pending]
            raise MalformedPointer(f"layers reference missing or cyclic layers: {names}")
    return ordered


def is_char_layer(layer):
    return isinstance(layer, MarkLayer) and layer.target_layer is None


_COMMENT_UNSAFE = re.compile(r"--|-$")


def comment(text):
    return "" if _COMMENT_UNSAFE.search(text) else f"<!-- {text} -->"
