import unicodedata

import pytest
from hypothesis import given, strategies as st

from grcstandoff.tei import BaseText
from grcstandoff.tokens import (
    CrasisLexicon,
    detect_crasis_candidates,
    has_coronis,
    tokenize,
)
from oracles import scan_tokens

CRASIS = CrasisLexicon.default()


def crasis_dict(lex=CRASIS):
    return {form: (e.first_form, e.second_form, e.split_index) for form, e in lex.entries.items()}


def toks(text, crasis=CRASIS):
    return tokenize(BaseText("d", text), crasis)


def test_kekeinos_splits_into_kai_ekeinos():
    t = toks("κἐκεῖνος")
    assert [x.form for x in t] == ["καὶ", "ἐκεῖνος"]
    assert [x.surface for x in t] == ["κ", "ἐκεῖνος"]
    assert (t[0].start, t[0].length, t[1].start, t[1].length) == (1, 1, 2, 7)


def test_punctuation_detached():
    assert [x.surface for x in toks("θεά.")] == ["θεά", "."]


def test_elision_mark_stays_in_word():
    assert [x.surface for x in toks("δʼ ἔφη·")] == ["δʼ", "ἔφη", "·"]


def test_ids_and_forms():
    t = toks("( ὣς ἔφη. )")
    assert [x.id for x in t] == ["t1", "t2", "t3", "t4", "t5"]
    assert all(x.form == x.surface for x in t)


def test_empty_input():
    assert toks("") == []


PARAGRAPH = (
    "Ἡροδότου Ἁλικαρνησσέος ἱστορίης ἀπόδεξις ἥδε, ὡς μήτε τὰ γενόμενα ἐξ ἀνθρώπων "
    "τῷ χρόνῳ ἐξίτηλα γένηται, μήτε ἔργα μεγάλα τε καὶ θωμαστά, τὰ μὲν Ἕλλησι, τὰ δὲ "
    "βαρβάροισι ἀποδεχθέντα, ἀκλεᾶ γένηται· κἀγὼ (ταῦτʼ) «λέγω» — τί;"
)


def test_thirty_word_paragraph_against_scan_oracle():
    assert len(PARAGRAPH.split()) >= 30
    expect = scan_tokens(PARAGRAPH, crasis_dict())
    got = [(t.start, t.length, t.form) for t in toks(PARAGRAPH)]
    assert got == expect


def test_crasis_lexicon_format(tmp_path):
    p = tmp_path / "c.tsv"
    p.write_text("# c\nκἀγώ\tκαὶ\tἐγώ\t1\n\n", encoding="utf-8")
    lex = CrasisLexicon.load(p)
    assert lex.get("κἀγώ").first_form == "καὶ"
    for bad in ("κἀγώ\tκαὶ\tἐγώ\t0", "κἀγώ\tκαὶ\tἐγώ\t4", "κἀγώ\t\tἐγώ\t1", "κἀγώ\tκαὶ"):
        with pytest.raises(ValueError):
            CrasisLexicon.from_lines([bad])


def test_coronis_detection():
    # decomposition checked against Unicode data: 1F00 = 03B1 0313
    assert unicodedata.normalize("NFD", "\u1f00") == "\u03b1\u0313"
    assert detect_crasis_candidates(BaseText("d", "κἀγώ")) == ["κἀγώ"]
    assert detect_crasis_candidates(BaseText("d", "ἐγώ")) == []
    assert detect_crasis_candidates(BaseText("d", "καί")) == []
    assert not has_coronis("αὐτός")
    assert has_coronis("τοὔνομα")


def test_candidates_keep_text_order():
    got = detect_crasis_candidates(BaseText("d", "κἀγώ ἐγώ τἆλλα κἀγώ"))
    assert got == ["κἀγώ", "τἆλλα", "κἀγώ"]


def test_tokenize_is_repeatable(built):
    base = built[0][2].base
    assert tokenize(base, CRASIS) == tokenize(base, CRASIS)


def test_corpus_spans_match_oracle(built):
    d = crasis_dict()
    for _, _, graph, _ in built[:5]:
        text = graph.base.text
        got = [(t.start, t.length, t.form) for t in tokenize(graph.base, CRASIS)]
        assert got == scan_tokens(text, d)


text_chars = st.sampled_from(list("αβγ δʼ.,;·()«»—?'’\n") + ["κἀγώ", "κἐκεῖνος", "λόγος"])


@given(st.lists(text_chars, max_size=40).map("".join))
def test_span_integrity_and_partition(text):
    t = toks(text)
    covered = set()
    prev = 0
    for x in t:
        assert x.surface == text[x.start - 1:x.start - 1 + x.length]
        assert x.start > prev
        prev = x.start + x.length - 1
        covered.update(range(x.start, x.start + x.length))
    assert covered == {i + 1 for i, c in enumerate(text) if not c.isspace()}
    assert [(x.start, x.length, x.form) for x in t] == scan_tokens(text, crasis_dict())


@given(st.sampled_from(sorted(CRASIS.entries)))
def test_crasis_conservation(form):
    a, b = toks(form)
    assert a.length + b.length == len(form)
    e = CRASIS.get(form)
    assert (a.form, b.form) == (e.first_form, e.second_form)
