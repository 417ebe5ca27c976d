from pathlib import Path

import pytest
from hypothesis import HealthCheck, given, settings
from lxml import etree

from conftest import tei
from grcstandoff.errors import (
    DanglingReference,
    IoFailure,
    MalformedPointer,
    MissingFile,
    SourceMapMissing,
    UnvalidatedGraph,
)
from grcstandoff.graph import AnnotationGraph, FeatureLayer, MarkLayer, RelationLayer
from grcstandoff.pipeline import Resources, build_graph
from grcstandoff.serialize import read_laula, read_paula, write_laula, write_paula
from grcstandoff.serialize.common import compress_ids, expand_ids
from grcstandoff.serialize.laula import ELEMENTS, laula_files
from grcstandoff.serialize.paula import paula_files
from grcstandoff.tei import BaseText, ElementPolicy, node_text, parse_tei
from strategies import bodies


def dir_size(d):
    return sum(p.stat().st_size for p in Path(d).iterdir())


def three_tokens():
    g = AnnotationGraph(BaseText("doc", "μῆνιν ἄειδε θεά"))
    g.add_layer(MarkLayer("tok", {"t1": (1, 5), "t2": (7, 5), "t3": (13, 3)}))
    g.add_layer(MarkLayer("sent", {"s1": ("t1", "t2", "t3")}, "tok"))
    g.add_layer(FeatureLayer("lemma", "tok", {"t1": "μῆνις", "t2": "ἀείδω", "t3": "θεά"}))
    g.add_layer(RelationLayer("dep", "tok", [("t1", "t2"), ("t2", "0"), ("t3", "t2")]))
    return g


def test_pointer_is_one_based(tmp_path):
    write_paula(three_tokens(), tmp_path)
    xml = (tmp_path / "doc.tok.xml").read_text("utf-8")
    assert "#xpointer(string-range(//body,'',1,5))" in xml


def test_empty_document(tmp_path):
    g = AnnotationGraph(BaseText("e", ""))
    g.add_layer(MarkLayer("tok", {}))
    write_paula(g, tmp_path)
    body = etree.parse(str(tmp_path / "e.text.xml")).find("body")
    assert (body.text or "") == "" and len(body) == 0
    assert etree.parse(str(tmp_path / "e.tok.xml")).find("markList").findall("mark") == []
    assert read_paula(tmp_path) == g


def test_paula_round_trip_without_sentences(tmp_path):
    g = three_tokens()
    files = write_paula(g, tmp_path)
    assert "doc.sent.xml" not in files.files
    assert read_paula(tmp_path) == g.without("sent")


def test_paula_body_is_base_text(tmp_path):
    g = AnnotationGraph(BaseText("doc", "a < b & c"))
    g.add_layer(MarkLayer("tok", {"t1": (1, 1), "t2": (3, 1), "t3": (5, 1), "t4": (7, 1), "t5": (9, 1)}))
    write_paula(g, tmp_path)
    assert etree.parse(str(tmp_path / "doc.text.xml")).find("body").text == "a < b & c"


def test_unvalidated_graph_refused(tmp_path):
    g = three_tokens()
    g.add_layer(FeatureLayer("morph", "tok", {"t1": "n"}))
    with pytest.raises(UnvalidatedGraph):
        write_paula(g, tmp_path)


def test_io_failure(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(IoFailure):
        write_paula(three_tokens(), blocker / "sub")


def test_missing_token_file(tmp_path):
    write_paula(three_tokens(), tmp_path)
    (tmp_path / "doc.tok.xml").unlink()
    with pytest.raises(MissingFile):
        read_paula(tmp_path)


def test_pointer_beyond_text(tmp_path):
    write_paula(three_tokens(), tmp_path)
    p = tmp_path / "doc.tok.xml"
    p.write_text(p.read_text("utf-8").replace("'',13,3", "'',13,30"), encoding="utf-8")
    with pytest.raises(MalformedPointer):
        read_paula(tmp_path)


def test_dangling_feature_on_read(tmp_path):
    write_paula(three_tokens(), tmp_path)
    p = tmp_path / "doc.lemma.xml"
    p.write_text(p.read_text("utf-8").replace('"#t3"', '"#t9"'), encoding="utf-8")
    with pytest.raises(DanglingReference):
        read_paula(tmp_path)


def test_id_compression():
    order = {f"t{i}": i for i in range(1, 10)}
    ids = ["t1", "t2", "t3", "t5", "t7", "t8"]
    text = compress_ids(ids, order)
    assert text == "t1..t3 t5 t7..t8"
    assert expand_ids(text, list(order)) == ids


RESOURCES = Resources.load()
SECOND_NODE = '<div type="edition"><div n="1"><div n="1">πρῶτον<note>x</note> δεύτερον λόγος</div></div></div>'


def built_graph(body):
    tree = parse_tei(tei(body))
    graph, _ = build_graph(tree, "doc", RESOURCES)
    return tree, graph


def test_laula_points_into_second_text_node(tmp_path):
    tree, g = built_graph(SECOND_NODE)
    write_laula(g, tree, tmp_path)
    root = etree.parse(str(tmp_path / "doc.tok.xml")).getroot()
    paths = [n.get("p") for n in root.find("N")]
    marks = {m.get("i"): m for m in root.iter(ELEMENTS["mark"])}
    m = marks["t2"]
    path = paths[int(m.get("n")) - 1]
    assert path.endswith("tei:div[1]/tei:div[1]/tei:div[1]/text()[2]")
    assert m.get("o") == "2"
    assert node_text(tree, path)[1:9] == "δεύτερον"


def test_laula_short_names(tmp_path):
    _, g = built_graph(SECOND_NODE)
    g.add_layer(FeatureLayer("lemma", "tok", {"t1": "πρῶτος"}))
    tree = parse_tei(tei(SECOND_NODE))
    write_laula(g, tree, tmp_path)
    tok = etree.parse(str(tmp_path / "doc.tok.xml")).getroot()
    assert tok.tag == "a" and tok.find("M") is not None and tok.find("M")[0].tag == "m"
    lemma = etree.parse(str(tmp_path / "doc.lemma.xml")).getroot()
    assert lemma.find("F")[0].tag == "f"
    for p in tmp_path.iterdir():
        assert "<!--" not in p.read_text("utf-8")


def test_laula_round_trip_and_checksum(tmp_path):
    tree, g = built_graph(SECOND_NODE)
    write_laula(g, tree, tmp_path)
    assert read_laula(tmp_path, tree) == g
    keep_notes = ElementPolicy.parse("keep = note, div\nblock = div\n")
    with pytest.raises(MalformedPointer):
        read_laula(tmp_path, tree, keep_notes)


def test_laula_needs_source_map():
    g = AnnotationGraph(BaseText("doc", "ab"))
    g.add_layer(MarkLayer("tok", {"t1": (1, 2)}))
    with pytest.raises(SourceMapMissing):
        laula_files(g)


def test_cross_format_equivalence(tmp_path):
    tree, g = built_graph(SECOND_NODE)
    write_paula(g, tmp_path / "p")
    write_laula(g, tree, tmp_path / "l")
    p, l = read_paula(tmp_path / "p"), read_laula(tmp_path / "l", tree)
    assert p.layers == l.without("sent").layers
    assert p.base.text == l.base.text


def test_corpus_round_trips(built, tmp_path):
    for doc, tree, graph, _ in built:
        pd, ld = tmp_path / "p" / doc, tmp_path / "l" / doc
        write_paula(graph, pd)
        write_laula(graph, tree, ld)
        assert read_paula(pd) == graph.without("sent")
        assert read_laula(ld, tree) == graph
        assert dir_size(ld) < dir_size(pd)


def test_rendering_is_deterministic(built):
    doc, tree, graph, _ = built[0]
    assert paula_files(graph) == paula_files(graph)
    assert laula_files(graph, tree) == laula_files(graph, tree)


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(bodies())
def test_round_trip_property(tmp_path, body):
    body = '<div type="edition"><div n="1"><div n="1">' + body + "</div></div></div>"
    tree, g = built_graph(body)
    out = tmp_path / str(abs(hash(body)))
    write_paula(g, out / "p")
    write_laula(g, tree, out / "l")
    assert read_paula(out / "p") == g.without("sent")
    assert read_laula(out / "l", tree) == g
