import random

import pytest
from hypothesis import given, strategies as st

from grcstandoff.errors import CycleIntroduced, DanglingReference, DuplicateLayerName
from grcstandoff.graph import (
    ROOT,
    TEXT,
    AnnotationGraph,
    FeatureLayer,
    MarkLayer,
    RelationLayer,
    dependency_cycles,
    find_layer_cycle,
    validate,
)
from grcstandoff.tei import BaseText
from oracles import dfs_has_cycle, single_head
from synth import random_dependency_graph


def small(n=2, sentence=True):
    text = " ".join(["λόγος"] * n)
    g = AnnotationGraph(BaseText("d", text))
    g.add_layer(MarkLayer("tok", {f"t{i + 1}": (6 * i + 1, 5) for i in range(n)}))
    if sentence:
        g.add_layer(MarkLayer("sent", {"s1": tuple(f"t{i + 1}" for i in range(n))}, "tok"))
    return g


def codes(g):
    return {v.code for v in validate(g)}


def test_valid_two_token_graph():
    assert validate(small()) == []


def test_two_cycle_reported():
    g = small()
    g.add_layer(RelationLayer("dep", "tok", [("t1", "t2"), ("t2", "t1")]))
    assert "dependency-cycle" in codes(g)


def test_lemma_layer_added():
    g = small()
    g.add_layer(FeatureLayer("lemma", "tok", {"t1": "λόγος"}))
    assert validate(g) == []


def test_dangling_feature():
    with pytest.raises(DanglingReference):
        small().add_layer(FeatureLayer("lemma", "tok", {"t9": "x"}))
    with pytest.raises(DanglingReference):
        small().add_layer(FeatureLayer("lemma", "nope", {}))


def test_duplicate_and_reserved_names():
    g = small()
    with pytest.raises(DuplicateLayerName):
        g.add_layer(MarkLayer("tok", {}))
    with pytest.raises(DuplicateLayerName):
        g.add_layer(MarkLayer(TEXT, {}))


def test_self_reference_is_a_cycle():
    with pytest.raises(CycleIntroduced):
        small().add_layer(MarkLayer("x", {}, "x"))


def test_sentence_layer_depth():
    g = small()
    assert g.layer_depth("tok") == 1
    assert g.layer_depth("sent") == 2
    # reachability by walking the reference graph down to the base text
    name, hops = "sent", []
    while name != TEXT:
        hops.append(name)
        name = g[name].depends_on
    assert hops == ["sent", "tok"]


def test_find_layer_cycle_on_raw_dict():
    layers = {"a": MarkLayer("a", {}, "b"), "b": MarkLayer("b", {}, "a"), "c": MarkLayer("c", {})}
    assert sorted(find_layer_cycle(layers)) == ["a", "b"]
    assert find_layer_cycle({"c": layers["c"]}) is None


def test_partition_violations():
    g = AnnotationGraph(BaseText("d", "ab cd"))
    g.add_layer(MarkLayer("tok", {"t1": (1, 2)}))
    assert "token-coverage" in codes(g)
    g = AnnotationGraph(BaseText("d", "ab cd"))
    g.add_layer(MarkLayer("tok", {"t1": (1, 4), "t2": (4, 2)}))
    assert {"token-whitespace", "token-order"} <= codes(g)
    g = AnnotationGraph(BaseText("d", "ab"))
    g.add_layer(MarkLayer("tok", {"t1": (2, 5)}))
    assert "offset" in codes(g)


def test_missing_token_layer():
    assert "token-layer" in codes(AnnotationGraph(BaseText("d", "")))


def test_sentence_partition_violation():
    g = small(3, sentence=False)
    g.add_layer(MarkLayer("sent", {"s1": ("t1",), "s2": ("t3",)}, "tok"))
    assert "sentence-partition" in codes(g)


def test_feature_checks():
    g = small()
    g.add_layer(FeatureLayer("morph", "tok", {"t1": "n-s---"}))
    g.add_layer(FeatureLayer("lemma", "tok", {"t1": "two words"}))
    assert {"morph-length", "lemma-form"} <= codes(g)


def test_relation_checks():
    g = small(3, sentence=False)
    g.add_layer(MarkLayer("sent", {"s1": ("t1", "t2"), "s2": ("t3",)}, "tok"))
    g.add_layer(RelationLayer("dep", "tok", [("t1", ROOT), ("t2", "t1"), ("t3", "t2"), ("t2", ROOT)]))
    assert {"multiple-heads", "cross-sentence"} <= codes(g)


def test_unrooted_chain():
    # a dependent whose head has no head at all never reaches the root
    g = small(2)
    g.add_layer(RelationLayer("dep", "tok", [("t1", "t2")]))
    assert "unrooted" in codes(g)


def test_validate_is_pure():
    g = small()
    before = dict(g.layers)
    assert validate(g) == validate(g)
    assert g.layers == before


def verdicts(n, edges):
    g = small(n, sentence=False)
    g.add_layer(RelationLayer("dep", "tok", edges))
    c = codes(g)
    return "dependency-cycle" not in c, "multiple-heads" not in c


def test_random_graphs_match_dfs_oracle():
    rng = random.Random(1)
    for _ in range(100):
        n, edges = random_dependency_graph(rng)
        assert verdicts(n, edges) == (not dfs_has_cycle(edges), single_head(edges))
        assert bool(dependency_cycles(edges)) == dfs_has_cycle(edges)


@given(st.integers(0, 10_000))
def test_random_graphs_property(seed):
    n, edges = random_dependency_graph(random.Random(seed))
    assert verdicts(n, edges) == (not dfs_has_cycle(edges), single_head(edges))


layer_ops = st.lists(
    st.tuples(st.sampled_from("abcdef"), st.sampled_from(["tok", "a", "b", "c", "d", "e", "f"])),
    max_size=12,
)


@given(layer_ops)
def test_incremental_and_full_cycle_checks_agree(ops):
    g = small(2, sentence=False)
    for name, target in ops:
        try:
            g.add_layer(MarkLayer(name, {}, target))
        except (DanglingReference, DuplicateLayerName, CycleIntroduced):
            pass
        assert find_layer_cycle(g.layers) is None
        assert not any(v.code == "layer-cycle" for v in validate(g))


def test_equality_ignores_edge_order():
    a = RelationLayer("dep", "tok", [("t1", ROOT), ("t2", "t1")])
    b = RelationLayer("dep", "tok", [("t2", "t1"), ("t1", ROOT)])
    assert a == b


def test_without():
    g = small()
    assert list(g.without("sent").layers) == ["tok"]
    assert list(g.layers) == ["tok", "sent"]
