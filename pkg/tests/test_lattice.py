import pydot
import pytest

from corpus import DATA, tagged_sentence
from lexgram import LookupOptions, build_index, parse_dela, segment, tag
from lexgram.lattice import (
    LatticeError,
    SentenceAutomaton,
    State,
    Transition,
    add_transitions,
    check_automaton,
    export_dot,
    export_text_dot,
    read_binary,
    read_fsa,
    write_binary,
    write_fsa,
)
from lexgram.model import LexicalAnalysis, OutputMark, UnknownToken, parse_tagset


@pytest.fixture(scope="module")
def sample():
    return tagged_sentence()


def spans(aut):
    return {(t.source, t.target) for t in aut.transitions}


def test_sample_lattice(sample):
    _, _, tagged = sample
    [aut] = tagged.sentences
    check_automaton(aut)
    assert len(aut.states) == 12 and aut.final == 11
    assert (5, 8) in spans(aut)  # procès-verbaux spans procès - verbaux
    unknown = sorted(t.label.text for t in aut.transitions if isinstance(t.label, UnknownToken))
    assert unknown == ["-", ".", "164"]
    dernier = {t.label.pos for t in aut.outgoing(9)}
    assert dernier == {"adjective", "noun"}


def test_every_token_is_covered(sample):
    _, text, tagged = sample
    aut = tagged.sentences[0]
    n = len(aut.token_ids)
    assert {s.id for s in aut.states} == set(range(n + 1))
    for i in range(n):
        assert any(t.source <= i < t.target for t in aut.transitions)


def test_fold_case_needed_for_capitalized_start():
    _, _, exact = tagged_sentence(fold_case=False)
    assert any(isinstance(t.label, UnknownToken) and t.label.text == "La" for t in exact.sentences[0].transitions)
    assert exact.stats.unknown == 1 and exact.stats.unknown_capitalized == 1


def test_priority_blocking_in_tagging():
    tagset = parse_tagset((DATA / "tagset_fr.xml").read_text(encoding="utf-8"))
    general = build_index(parse_dela("jeudi,jeudi.N:ms\n"), priority=0, tagset=tagset)
    special = build_index(parse_dela("jeudi,jeudi.ADV\n"), priority=9, tagset=tagset)
    aut = tag(segment("jeudi"), [general, special]).sentences[0]
    assert [t.label.pos for t in aut.transitions] == ["adverb"]


def test_mixed_tagsets_rejected():
    tagset = parse_tagset((DATA / "tagset_fr.xml").read_text(encoding="utf-8"))
    other = parse_tagset((DATA / "tagset_proces.xml").read_text(encoding="utf-8"))
    a = build_index(parse_dela("x,x.N:ms\n"), tagset=tagset)
    b = build_index(parse_dela("y,y.N:m\n"), tagset=other)
    with pytest.raises(LatticeError):
        tag(segment("x y"), [a, b])


def test_single_unknown_token():
    aut = tag(segment("Zorglub"), []).sentences[0]
    assert len(aut.states) == 2
    assert [t.label for t in aut.transitions] == [UnknownToken("Zorglub")]


def test_fsa_roundtrip(sample):
    _, _, tagged = sample
    xml = write_fsa(tagged)
    assert read_fsa(xml) == tagged
    assert write_fsa(read_fsa(xml)) == xml


def test_binary_roundtrip(sample):
    _, _, tagged = sample
    data = write_binary(tagged)
    assert data[:4] == b"LXTA"
    assert read_binary(data) == tagged
    assert len(data) < len(write_fsa(tagged).encode())


def test_binary_errors(sample):
    _, _, tagged = sample
    data = write_binary(tagged)
    with pytest.raises(ValueError):
        read_binary(data[: len(data) // 2])
    with pytest.raises(ValueError):
        read_binary(b"NOPE" + data[4:])


def test_dot_export_parses(sample):
    _, _, tagged = sample
    [graph] = pydot.graph_from_dot_data(export_dot(tagged.sentences[0]))
    assert len(graph.get_edges()) == len(tagged.sentences[0].transitions)
    assert pydot.graph_from_dot_data(export_text_dot(tagged))


def test_check_automaton_rejects_bad_lattices():
    a = LexicalAnalysis("x", "x", "noun", ())
    cyclic = SentenceAutomaton("s", ("t1",), (State(0, 0), State(1, 1)), (Transition(0, 1, a), Transition(1, 0, a)), 0, 1)
    with pytest.raises(LatticeError):
        check_automaton(cyclic)
    dangling = SentenceAutomaton("s", ("t1",), (State(0, 0), State(1, 1)), (Transition(0, 2, a),), 0, 1)
    with pytest.raises(LatticeError):
        check_automaton(dangling)


def test_add_transitions(sample):
    _, _, tagged = sample
    aut = tagged.sentences[0]
    more = add_transitions(aut, [Transition(8, 10, OutputMark("TIME"))])
    assert len(more.transitions) == len(aut.transitions) + 1
    check_automaton(more)
    assert Transition(8, 10, OutputMark("TIME")) in more.outgoing(8)


def test_fold_options_change_coverage():
    tagset = parse_tagset((DATA / "tagset_fr.xml").read_text(encoding="utf-8"))
    ix = build_index(parse_dela((DATA / "lexicon_fr.dic").read_text(encoding="utf-8")), tagset=tagset)
    text = segment("PROCES")
    assert tag(text, [ix]).stats.unknown == 1
    assert tag(text, [ix], LookupOptions(True, True)).stats.unknown == 0
