import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from corpus import DATA, make_lexicon
from oracles import trie_size
from lexgram.lexicon import (
    DelaError,
    IndexFormatError,
    InflectionError,
    LexiconEntry,
    LookupOptions,
    build_index,
    dela_to_xml,
    expand,
    inflect,
    lookup_multi,
    minimize,
    parse_dela,
    parse_lemmas,
    parse_paradigms,
    read_index,
    write_dela,
    write_index,
    xml_to_dela,
)
from lexgram.lexicon.dela import format_line, parse_line
from lexgram.model import Feature, parse_tagset


@pytest.fixture(scope="module")
def tagset():
    return parse_tagset((DATA / "tagset_fr.xml").read_text(encoding="utf-8"))


@pytest.fixture(scope="module")
def fr(tagset):
    return build_index(parse_dela((DATA / "lexicon_fr.dic").read_text(encoding="utf-8")), tagset=tagset, name="fr")


# -- DELA ---------------------------------------------------------------------------


def test_parse_line_fields():
    e = parse_line("appelés du contingent,appelé du contingent.N+hum:mp")
    assert e == LexiconEntry("appelés du contingent", "appelé du contingent", "N", ("hum",), ("mp",))
    assert parse_line("chats,.N:mp").lemma == "chats"  # empty lemma = the form itself
    assert parse_line(r"a\,b,a\.b.N").form == "a,b"
    assert parse_line(r"a\,b,a\.b.N").lemma == "a.b"


@pytest.mark.parametrize("bad", ["chat", ",chat.N", "chat,chat.", "chat,chat.N:", "x,y.N:ms+hum", "x\\"])
def test_parse_line_errors(bad):
    with pytest.raises(DelaError):
        parse_line(bad)


def test_parse_dela_lenient():
    diags: list[str] = []
    out = parse_dela("a,a.N\nbroken\n\nb,b.N\n", strict=False, diagnostics=diags)
    assert [e.form for e in out] == ["a", "b"]
    assert len(diags) == 1 and diags[0].startswith("line 2")
    with pytest.raises(DelaError, match="line 2"):
        parse_dela("a,a.N\nbroken\n")


@given(st.text(alphabet=st.sampled_from(list("ab,.+:\\ é")), min_size=1, max_size=8))
def test_escaping_roundtrip(s):
    e = LexiconEntry(s, s, "N", (s,), (s,))
    assert parse_line(format_line(e)) == e


def test_compress_lemma():
    entries = [LexiconEntry("chat", "chat", "N", (), ("ms",))]
    assert write_dela(entries, compress_lemma=True) == "chat,.N:ms\n"
    assert parse_dela(write_dela(entries, compress_lemma=True)) == entries


def test_expand_with_tagset(tagset):
    [a, b] = expand(parse_line("procès,.N:ms:mp"), tagset)
    assert a.pos == "noun"
    assert a.feature_map() == {"proper": "false", "gender": "masculine", "number": "singular"}
    assert b.feature_map()["number"] == "plural"
    [h] = expand(parse_line("appelés du contingent,appelé du contingent.N+hum:mp"), tagset)
    assert h.feature_map()["subcat"] == "human"


def test_expand_errors(tagset):
    with pytest.raises(DelaError):
        expand(parse_line("x,x.Z"), tagset)
    with pytest.raises(DelaError):
        expand(parse_line("x,x.N:q"), tagset)


def test_expand_without_tagset_keeps_raw_values():
    [a] = expand(parse_line("x,y.N+hum:ms"))
    assert a.pos == "N"


# -- dic.xml -----------------------------------------------------------------------


def test_dicxml_roundtrip_multi_code(tagset):
    entries = parse_dela("procès,procès.N:ms:mp\nverbaux,verbal.A:mp\n")
    xml = dela_to_xml(entries, tagset)
    assert xml.count("<inflected>") == 3
    assert xml_to_dela(xml, tagset) == entries


def test_dicxml_rejects_unknown_values(tagset):
    bad = """<dictionary><entry><lemma>x</lemma><pos name="noun"/>
    <inflected><form>x</form><feat name="gender" value="neuter"/></inflected></entry></dictionary>"""
    with pytest.raises(ValueError):
        xml_to_dela(bad, tagset)


# -- inflection ----------------------------------------------------------------------


def test_inflect_carry():
    ps = parse_paradigms((DATA / "carry.paradigm.xml").read_text(encoding="utf-8"))
    forms = {e.form for e in inflect(parse_lemmas("carry.V:4\nmarry.V:4\n"), ps)}
    assert forms == {"carry", "carries", "carried", "carrying", "marry", "marries", "married", "marrying"}


def test_inflect_errors():
    ps = parse_paradigms((DATA / "carry.paradigm.xml").read_text(encoding="utf-8"))
    with pytest.raises(InflectionError):
        inflect([("walk", "V", (), "4")], ps)  # no trailing "y"
    with pytest.raises(InflectionError):
        inflect([("carry", "V", (), "99")], ps)


def test_case_map():
    ps = parse_paradigms(
        """<Paradigms><CaseMap><Case id="sg" code="ms"/><Case id="pl" code="mp"/></CaseMap>
        <Paradigm code="N1"><StemTrigger></StemTrigger>
        <Inflection caseId="sg"><Form></Form></Inflection><Inflection caseId="pl"><Form>s</Form></Inflection>
        </Paradigm></Paradigms>"""
    )
    out = inflect([("chat", "N", (), "N1")], ps)
    assert write_dela(out) == "chat,chat.N:ms\nchats,chat.N:mp\n"


# -- index -----------------------------------------------------------------------------


def test_lookup(fr):
    [a] = fr.lookup("police")
    assert (a.lemma, a.pos) == ("police", "noun")
    assert {x.feature_map()["number"] for x in fr.lookup("procès")} == {"singular", "plural"}
    assert fr.lookup("polic") == []
    assert fr.lookup("polices") == []
    assert "procès-verbaux" in fr


def test_folding(fr):
    assert fr.lookup("La") == []
    [la] = fr.lookup("La", LookupOptions(fold_case=True))
    assert (la.form, la.lemma, la.pos) == ("La", "le", "determiner")  # text surface kept
    assert fr.lookup("LA", LookupOptions(fold_case=True))
    assert fr.lookup("proces", LookupOptions(fold_diacritics=True))
    assert not fr.lookup("PROCES", LookupOptions(fold_diacritics=True))
    assert {a.lemma for a in fr.lookup("PROCES", LookupOptions(True, True))} == {"procès"}


def test_priority_blocking(tagset):
    general = build_index(parse_dela("jeudi,jeudi.N:ms\npolice,police.N:fs\n"), priority=0, tagset=tagset)
    special = build_index(parse_dela("jeudi,Jeudi.N:ms\n"), priority=5, tagset=tagset)
    assert [a.lemma for a in lookup_multi([general, special], "jeudi")] == ["Jeudi"]
    assert [a.lemma for a in lookup_multi([general, special], "police")] == ["police"]


def test_suffix_sharing():
    words = ["chanter", "chanté", "chantez", "danser", "dansé", "dansez"]
    ix = build_index(LexiconEntry(w, "x", "V") for w in words)
    assert ix.state_count < trie_size(words)
    assert ix.forms() == sorted(words)


@pytest.mark.parametrize("seed", range(5))
def test_random_lexicon_minimal(seed, tagset):
    entries = make_lexicon(random.Random(seed).randint(1, 300), seed)
    ix = build_index(entries, tagset=tagset)
    assert minimize(ix).state_count == ix.state_count
    assert ix.forms() == sorted({e.form for e in entries})
    for e in entries[:30]:
        assert {(a.lemma, a.pos) for a in ix.lookup(e.form)} >= {(a.lemma, a.pos) for a in expand(e, tagset)}


def test_binary_roundtrip(fr):
    data = write_index(fr)
    back = read_index(data)
    assert back.edges == fr.edges and back.finals == fr.finals
    assert back.records == fr.records and back.payloads == fr.payloads
    assert back.name == "fr" and back.tagset_digest == fr.tagset_digest
    assert back.lookup("procès-verbaux") == fr.lookup("procès-verbaux")


@pytest.mark.parametrize("cut", [0, 3, 20, 60])
def test_binary_truncated(fr, cut):
    with pytest.raises(IndexFormatError):
        read_index(write_index(fr)[:cut])


def test_binary_bad_magic(fr):
    with pytest.raises(IndexFormatError, match="magic"):
        read_index(b"XXXX" + write_index(fr)[4:])


def test_empty_index():
    ix = build_index([])
    assert ix.forms() == []
    assert read_index(write_index(ix)).forms() == []


def test_features_are_stored(fr):
    [a] = fr.lookup("saisi")
    assert Feature("tense", "participle") in a.features
