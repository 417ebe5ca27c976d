import pytest

import synth
from grcstandoff.pipeline import Resources, build_graph
from grcstandoff.tei import parse_tei

TEI_NS = "http://www.tei-c.org/ns/1.0"


def tei(body, header=None):
    """Wrap a body fragment into a TEI document (bytes)."""
    if header is None:
        header = synth.cts_decl(("book", "chapter"))
    return (
        f'<TEI xmlns="{TEI_NS}"><teiHeader>{header}</teiHeader>'
        f"<text><body>{body}</body></text></TEI>"
    ).encode("utf-8")


@pytest.fixture(scope="session")
def resources():
    return Resources.load()


@pytest.fixture(scope="session")
def corpus_docs():
    return synth.corpus()


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory, corpus_docs):
    d = tmp_path_factory.mktemp("corpus")
    for name, data in corpus_docs:
        (d / name).write_bytes(data)
    return d


@pytest.fixture(scope="session")
def built(corpus_docs, resources):
    """[(document id, tree, graph, report)] for the synthetic corpus."""
    out = []
    for name, data in corpus_docs:
        tree = parse_tei(data)
        doc = name[:-4]
        graph, report = build_graph(tree, doc, resources)
        out.append((doc, tree, graph, report))
    return out
