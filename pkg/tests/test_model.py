import pytest
from hypothesis import given
from hypothesis import strategies as st

from corpus import DATA
from lexgram.model import (
    Feature,
    LexicalAnalysis,
    LexicalMask,
    MaskSyntaxError,
    OutputMark,
    TagsetError,
    UnknownToken,
    format_mask,
    mask_matches,
    mask_of,
    parse_mask,
    parse_tagset,
    split_masks,
    validate_analysis,
    validate_mask,
    write_tagset,
)


@pytest.fixture(scope="module")
def tagset():
    return parse_tagset((DATA / "tagset_fr.xml").read_text(encoding="utf-8"))


POLICE = LexicalAnalysis("police", "police", "noun", (Feature("gender", "feminine"), Feature("number", "singular")))


def test_tagset_lookup(tagset):
    noun = tagset.pos("noun")
    assert tagset.pos("N") is noun  # cutename
    assert noun.attribute("gender").type == "gender"
    assert tagset.default("noun", "proper") == "false"
    assert tagset.default("adjective", "proper") is None
    assert tagset.attrtype("gender").by_alias("m") == "masculine"
    assert tagset.attrtype("gender").alias_of("feminine") == "f"


def test_tagset_write_read_roundtrip(tagset):
    again = parse_tagset(write_tagset(tagset))
    assert again == tagset
    assert again.digest() == tagset.digest()


@pytest.mark.parametrize(
    "doc",
    [
        "<tagset><pos name='x'><attribute name='a' type='missing'/></pos></tagset>",
        "<tagset><pos name='x'/><pos name='x'/></tagset>",
        "<nottagset/>",
    ],
)
def test_tagset_errors(doc):
    with pytest.raises((TagsetError, ValueError)):
        parse_tagset(doc)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("<*>", LexicalMask()),
        ("<noun>", LexicalMask(pos="noun")),
        ("<noun,number=plural>", LexicalMask(pos="noun", features=(("number", "plural"),))),
        ("<lemma=être>", LexicalMask(lemma="être")),
        ("<form=164>", LexicalMask(form="164")),
        ("<!noun>", LexicalMask(pos="noun", negated=True)),
        (r"<form=a\,b>", LexicalMask(form="a,b")),
    ],
)
def test_parse_mask(text, expected):
    assert parse_mask(text) == expected
    assert parse_mask(format_mask(expected)) == expected


@pytest.mark.parametrize("bad", ["noun", "<>", "<noun,>", "<a,b>", "<a=b=c>", "<x\\>"])
def test_parse_mask_errors(bad):
    with pytest.raises(MaskSyntaxError):
        parse_mask(bad)


_value = st.text(alphabet=st.sampled_from(list("abé,=<>|\\ x")), min_size=1, max_size=6)


@given(
    st.builds(
        LexicalMask,
        pos=st.none() | _value,
        form=st.none() | _value,
        lemma=st.none() | _value,
        features=st.lists(st.tuples(_value.filter(lambda v: v not in ("pos", "lemma", "form")), _value), max_size=2).map(
            tuple
        ),
        negated=st.booleans(),
    )
)
def test_mask_format_roundtrip(mask):
    assert parse_mask(format_mask(mask)) == mask


def test_split_masks():
    assert split_masks(r"<noun>|<form=a\|b>| <verb>") == ["<noun>", r"<form=a\|b>", "<verb>"]


def test_mask_matching(tagset):
    assert mask_matches(parse_mask("<noun>"), POLICE)
    assert mask_matches(parse_mask("<N>"), POLICE, tagset)  # cutename needs the tagset
    assert not mask_matches(parse_mask("<N>"), POLICE)
    assert mask_matches(parse_mask("<noun,gender=feminine>"), POLICE)
    assert not mask_matches(parse_mask("<noun,gender=masculine>"), POLICE)
    assert mask_matches(parse_mask("<noun,proper=false>"), POLICE, tagset)  # declared default
    assert not mask_matches(parse_mask("<noun,proper=false>"), POLICE)
    assert mask_matches(parse_mask("<!verb>"), POLICE)
    assert mask_matches(parse_mask("<*>"), POLICE)
    assert mask_matches(mask_of(POLICE), POLICE)


def test_unknown_and_marks_match_only_surface_masks():
    unk, mark = UnknownToken("Zorglub"), OutputMark("TIME")
    assert mask_matches(parse_mask("<*>"), unk)
    assert mask_matches(parse_mask("<form=Zorglub>"), unk)
    assert not mask_matches(parse_mask("<form=zorglub>"), unk)
    assert not mask_matches(parse_mask("<noun>"), unk)
    assert mask_matches(parse_mask("<!noun>"), unk)
    assert mask_matches(parse_mask("<form=TIME>"), mark)
    assert not mask_matches(parse_mask("<lemma=TIME>"), mark)


def test_validation(tagset):
    assert validate_analysis(POLICE, tagset) == []
    bad = LexicalAnalysis("x", "x", "noun", (Feature("gender", "neuter"),))
    assert validate_analysis(bad, tagset)
    assert validate_mask(parse_mask("<noun,number=plural>"), tagset) == []
    assert validate_mask(parse_mask("<nom>"), tagset)
    assert validate_mask(parse_mask("<noun,colour=red>"), tagset)
    assert validate_mask(parse_mask("<noun,number=dual>"), tagset)
