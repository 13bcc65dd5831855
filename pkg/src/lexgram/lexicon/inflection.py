"""Suffix-based inflection of lemma lexicons from paradigm files.

A paradigm file looks like::

    <Paradigms>
      <CaseMap>
        <Case id="prs_3s" code="P3s"/>
      </CaseMap>
      <Paradigm code="4">
        <StemTrigger>y</StemTrigger>
        <Inflection caseId="prs_3s"><Form>ies</Form></Inflection>
      </Paradigm>
    </Paradigms>

The optional ``CaseMap`` translates case ids into DELA inflectional codes;
unmapped case ids are used as codes verbatim.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .. import _xml
from .dela import DelaError, LexiconEntry, _fields


class InflectionError(ValueError):
    pass


@dataclass(frozen=True)
class InflectionParadigm:
    code: str
    stem_trigger: str
    inflections: tuple[tuple[str, str], ...]  # (case id, form suffix)


@dataclass(frozen=True)
class ParadigmSet:
    paradigms: dict[str, InflectionParadigm]
    case_map: dict[str, str] = field(default_factory=dict)

    def __getitem__(self, code: str) -> InflectionParadigm:
        return self.paradigms[code]


@dataclass(frozen=True)
class LemmaEntry:
    lemma: str
    pos: str
    traits: tuple[str, ...]
    paradigm: str


def parse_paradigms(document: str | bytes) -> ParadigmSet:
    doc = _xml.parse(document)
    root = doc.root
    elems = [root] if root.tag == "Paradigm" else list(root)
    paradigms: dict[str, InflectionParadigm] = {}
    case_map: dict[str, str] = {}
    for e in elems:
        if e.tag == "CaseMap":
            for c in e:
                case_map[c.get("id")] = c.get("code")
            continue
        if e.tag != "Paradigm":
            raise doc.error(e, f"unexpected <{e.tag}>")
        code = e.get("code")
        if not code:
            raise doc.error(e, "paradigm without code")
        if code in paradigms:
            raise doc.error(e, f"duplicate paradigm {code!r}")
        trigger_e = e.find("StemTrigger")
        trigger = (trigger_e.text or "") if trigger_e is not None else ""
        inflections = []
        for infl in e.findall("Inflection"):
            form_e = infl.find("Form")
            inflections.append((infl.get("caseId"), (form_e.text or "") if form_e is not None else ""))
        paradigms[code] = InflectionParadigm(code, trigger.strip(), tuple(inflections))
    return ParadigmSet(paradigms, case_map)


def parse_lemmas(text: str) -> list[LemmaEntry]:
    """Read a lemma list, one ``lemma.POS+trait:paradigm`` per line."""
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        pieces = _fields("," + line, lineno)
        if len(pieces) < 3 or pieces[2][0] != ".":
            raise DelaError(f"missing '.' in {line!r}", lineno)
        lemma, pos = pieces[1][1], pieces[2][1]
        traits = tuple(t for sep, t in pieces[3:] if sep == "+")
        codes = [t for sep, t in pieces[3:] if sep == ":"]
        if len(codes) != 1:
            raise DelaError("expected exactly one paradigm code", lineno)
        out.append(LemmaEntry(lemma, pos, traits, codes[0]))
    return out


def inflect(lemmas: Iterable[LemmaEntry | tuple], paradigms: ParadigmSet) -> list[LexiconEntry]:
    entries = []
    for item in lemmas:
        if not isinstance(item, LemmaEntry):
            item = LemmaEntry(item[0], item[1], tuple(item[2]), item[3])
        paradigm = paradigms.paradigms.get(item.paradigm)
        if paradigm is None:
            raise InflectionError(f"unknown paradigm {item.paradigm!r} for {item.lemma!r}")
        trigger = paradigm.stem_trigger
        if not item.lemma.endswith(trigger):
            raise InflectionError(f"{item.lemma!r} does not end with {trigger!r} (paradigm {paradigm.code})")
        stem = item.lemma[: len(item.lemma) - len(trigger)]
        for case_id, suffix in paradigm.inflections:
            code = paradigms.case_map.get(case_id, case_id)
            entries.append(LexiconEntry(stem + suffix, item.lemma, item.pos, item.traits, (code,)))
    return entries
