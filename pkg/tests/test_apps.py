import pytest

from corpus import bracket_np_grammar, graph, tagged_sentence
from lexgram.apps import (
    INSERT,
    LEXICOGRAPHIC,
    REPLACE,
    RewritePlan,
    apply_automaton,
    apply_text,
    concord,
    concordance_html,
    concordance_tsv,
    select_matches,
)
from lexgram.grammar import GraphSet, compile_grammar
from lexgram.model import OutputMark
from lexgram.parser import Match, locate
from lexgram.segmenter import segment


@pytest.fixture(scope="module")
def sample():
    return tagged_sentence()


def m(a, b, w=0, outputs=(), sid="s0"):
    return Match(sid, a, b, (a, b), w, tuple(outputs))


def test_concord_contexts(sample):
    _, text, _ = sample
    [line] = concord([m(5, 8)], text, 2, 1)
    assert (line.left, line.segment, line.right) == ("saisi 164", "procès-verbaux", "jeudi")
    [edge] = concord([m(0, 1)], text, 3, 0)
    assert (edge.left, edge.segment, edge.right) == ("", "La", "")


def test_concord_orders(sample):
    _, text, _ = sample
    ms = [m(8, 9), m(1, 2), m(5, 8)]
    assert [ln.segment for ln in concord(ms, text)] == ["police", "procès-verbaux", "jeudi"]
    assert [ln.segment for ln in concord(ms, text, order=LEXICOGRAPHIC)] == ["jeudi", "police", "procès-verbaux"]
    with pytest.raises(ValueError):
        concord(ms, text, order="random")


def test_concord_document_offsets():
    text = segment("Un chat dort. Un chien aboie.")
    [a, b] = list(text.sentences())
    [ln] = concord([m(1, 2, sid=b.id)], text, 1, 1)
    assert ln.tokens == (len(a.tokens) + 1, len(a.tokens) + 2)
    assert (ln.left, ln.segment, ln.right) == ("Un", "chien", "aboie")


def test_concordance_formats(sample):
    _, text, _ = sample
    lines = concord([m(5, 8, 3)], text, 1, 1)
    assert concordance_tsv(lines) == "s0\t5\t8\t3\t164\tprocès-verbaux\tjeudi\n"
    page = concordance_html(concord([m(0, 1)], segment("<a> & b"), 0, 4))
    assert "&lt;" in page and "&amp;" in page and "<a>" not in page


def test_select_prefers_weight_then_order():
    plan = select_matches([m(0, 2, 0), m(0, 1, 1), m(1, 3, 5), m(2, 3, 0)])
    assert [x.tokens for x in plan.matches] == [(0, 1), (1, 3)]
    tie = [m(0, 1), m(0, 3)]
    assert [x.tokens for x in select_matches(tie).matches] == [(0, 1)]
    assert [x.tokens for x in select_matches(tie, "prefer-longest").matches] == [(0, 3)]
    with pytest.raises(ValueError):
        select_matches(tie, "shortest")


def test_select_empty_match_uses_its_position():
    plan = select_matches([m(0, 0), m(0, 1), m(1, 2)])
    assert [x.tokens for x in plan.matches] == [(0, 0), (1, 2)]


def test_plan_rejects_overlap():
    with pytest.raises(ValueError):
        RewritePlan((m(0, 2), m(1, 3)))
    with pytest.raises(ValueError):
        RewritePlan((m(0, 1),), "delete")
    RewritePlan((m(0, 2), m(0, 2, sid="s1")))


def test_insert_and_replace(sample):
    tagset, text, tagged = sample
    found = locate(tagged, compile_grammar(bracket_np_grammar()), tagset=tagset)
    plan = select_matches(found, "prefer-longest")
    assert apply_text(text, plan) == "<NP>La police</NP> a saisi <NP>164 procès-verbaux</NP> jeudi dernier.\n"
    swapped = RewritePlan(plan.matches, REPLACE)
    assert apply_text(text, swapped) == "<NP></NP> a saisi <NP></NP> jeudi dernier.\n"
    assert plan.mode == INSERT


def test_replace_with_empty_match():
    text = segment("a b")
    plan = RewritePlan((m(1, 1, outputs=[(1, "|")]),), REPLACE)
    assert apply_text(text, plan) == "a |b"


def time_grammar():
    g = graph("T", {"d": "<lemma=jeudi>", "l": ("<lemma=dernier>", "TIME")}, [("s", "d"), ("d", "l"), ("l", "e")])
    return compile_grammar(GraphSet("T", {"T": g}))


def test_apply_automaton_fixpoint(sample):
    tagset, _, tagged = sample
    once = apply_automaton(tagged, time_grammar(), 1, tagset)
    marks = [t for t in once.sentences[0].transitions if isinstance(t.label, OutputMark)]
    assert [(t.source, t.target, t.label.text) for t in marks] == [(8, 10, "TIME")]
    # the same grammar adds nothing on later passes
    assert apply_automaton(tagged, time_grammar(), 5, tagset) == once


def test_apply_automaton_cap(sample):
    tagset, _, tagged = sample
    g = graph(
        "A",
        {"a": ("<*>", "x"), "b": ("<*>", "y"), "c": ("<*>", "z")},
        [("s", "a"), ("s", "b"), ("s", "c"), ("a", "e"), ("b", "e"), ("c", "e")],
    )
    wrtn = compile_grammar(GraphSet("A", {"A": g}))
    full = apply_automaton(tagged, wrtn, 1, tagset)
    capped = apply_automaton(tagged, wrtn, 1, tagset, max_per_span=1)

    def count(t):
        return sum(isinstance(x.label, OutputMark) for x in t.sentences[0].transitions)
    assert count(capped) < count(full)
    assert count(capped) == len({(x.source, x.target) for x in capped.sentences[0].transitions if isinstance(x.label, OutputMark)})
