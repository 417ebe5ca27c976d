"""Reference implementations used only by the tests.

Each one computes its answer differently from the library code it checks:
character scans instead of regexes, DFS instead of Kahn's algorithm,
top-down tree walks instead of ancestor walks.
"""

from grcstandoff.chars import PUNCTUATION
from grcstandoff.tei import NSMAP


def scan_tokens(text, crasis=None):
    """Character-by-character tokenizer: [(start, length, form)], 1-based."""
    crasis = crasis or {}
    out = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in PUNCTUATION:
            out.append((i + 1, 1, ch))
            i += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in PUNCTUATION:
                j += 1
            word = text[i:j]
            if word in crasis:
                first, second, k = crasis[word]
                out.append((i + 1, k, first))
                out.append((i + 1 + k, len(word) - k, second))
            else:
                out.append((i + 1, j - i, word))
            i = j
    return out


def linear_segment(source_map, offset):
    """Brute-force source map lookup."""
    for seg in source_map:
        if seg.text_start <= offset < seg.text_start + seg.text_length:
            return seg
    return None


def dfs_has_cycle(edges):
    """Three-colour DFS over head -> dependent edges."""
    children = {}
    for dep, head in edges:
        children.setdefault(head, []).append(dep)
    colour = {}

    def visit(u):
        colour[u] = 1
        for v in children.get(u, ()):
            c = colour.get(v, 0)
            if c == 1 or (c == 0 and visit(v)):
                return True
        colour[u] = 2
        return False

    nodes = {x for e in edges for x in e}
    return any(colour.get(u, 0) == 0 and visit(u) for u in sorted(nodes))


def single_head(edges):
    deps = [d for d, _ in edges]
    return len(deps) == len(set(deps))


def reaches_root(edges, root="0"):
    """For every dependent, follow heads step by step; True iff each path ends at root."""
    head_of = {}
    for d, h in edges:
        head_of.setdefault(d, h)
    for start in head_of:
        node, steps = start, 0
        while node != root:
            if node not in head_of or steps > len(head_of):
                return False
            node = head_of[node]
            steps += 1
    return True


def division_citations(tree, division_names=("book", "chapter", "section"), edition_path=None):
    """Top-down walk: {element: citation string} for every element under the edition div.

    Citations come from the ``n`` attributes of the nested textpart divs.
    """
    edition = tree.xpath(edition_path or "/tei:TEI/tei:text/tei:body/tei:div", namespaces=NSMAP)[0]
    out = {}
    depth = len(division_names)

    def walk(el, comps):
        out[el] = ".".join(comps)
        for child in el:
            if not isinstance(child.tag, str):
                continue
            name = child.tag.rsplit("}", 1)[-1]
            if name == "div" and len(comps) < depth:
                walk(child, comps + [child.get("n")])
            else:
                walk(child, comps)

    walk(edition, [])
    return out
