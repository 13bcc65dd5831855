"""dic.xml lexicons: inflected forms grouped under their lemma entry."""

from __future__ import annotations

import xml.etree.ElementTree as ET
from typing import Iterable

from .. import _xml
from ..model import TagsetDefinition
from .dela import DelaError, LexiconEntry, code_features, resolve_value


def dela_to_xml(entries: Iterable[LexiconEntry], tagset: TagsetDefinition) -> str:
    root = ET.Element("dictionary")
    groups: dict[tuple, ET.Element] = {}
    for entry in entries:
        p = tagset.pos(entry.pos)
        if p is None:
            raise DelaError(f"unknown POS {entry.pos!r}")
        key = (entry.lemma, p.name, entry.traits)
        elem = groups.get(key)
        if elem is None:
            elem = ET.SubElement(root, "entry")
            ET.SubElement(elem, "lemma").text = entry.lemma
            ET.SubElement(elem, "pos", name=p.name)
            for t in entry.traits:
                name, value = resolve_value(tagset, p.name, t)
                ET.SubElement(elem, "feat", name=name, value=value)
            groups[key] = elem
        for code in entry.codes or ("",):
            infl = ET.SubElement(elem, "inflected")
            ET.SubElement(infl, "form").text = entry.form
            for name, value in code_features(tagset, p.name, code):
                ET.SubElement(infl, "feat", name=name, value=value)
    return _xml.tostring(root)


def _trait(tagset: TagsetDefinition, pos: str, name: str, value: str) -> str:
    p = tagset.pos(pos)
    decl = p.attribute(name)
    if decl is None:
        raise DelaError(f"attribute {name!r} not declared for POS {p.name!r}")
    alias = tagset.attrtype(decl.type).alias_of(value)
    if alias is not None:
        return alias
    # a bare value name is accepted back only if it resolves to this attribute
    try:
        if resolve_value(tagset, pos, value) == (name, value):
            return value
    except DelaError:
        pass
    return f"{name}={value}"


def _code(tagset: TagsetDefinition, pos: str, feats: list[tuple[str, str]]) -> str:
    p = tagset.pos(pos)
    order = {d.name: i for i, d in enumerate(p.attributes)}
    chars = []
    for name, value in sorted(feats, key=lambda f: order.get(f[0], len(order))):
        decl = p.attribute(name)
        alias = tagset.attrtype(decl.type).alias_of(value) if decl else None
        if alias is None and len(value) == 1:
            alias = value
        if alias is None or len(alias) != 1 or resolve_value(tagset, pos, alias, single_char=True) != (name, value):
            raise DelaError(f"no one-character code for {name}={value}")
        chars.append(alias)
    return "".join(chars)


def xml_to_dela(document: str | bytes, tagset: TagsetDefinition) -> list[LexiconEntry]:
    """Inverse of :func:`dela_to_xml`.

    Consecutive ``inflected`` blocks with the same form are merged into one
    entry carrying several codes.
    """
    doc = _xml.parse(document)
    out: list[LexiconEntry] = []
    for e in doc.root:
        if e.tag != "entry":
            raise doc.error(e, f"unexpected <{e.tag}>")
        lemma_e = e.find("lemma")
        pos_e = e.find("pos")
        if lemma_e is None or pos_e is None:
            raise doc.error(e, "entry needs lemma and pos")
        lemma = lemma_e.text or ""
        p = tagset.pos(pos_e.get("name", ""))
        if p is None:
            raise doc.error(pos_e, f"unknown POS {pos_e.get('name')!r}")
        pos = p.cutename or p.name
        traits = tuple(_trait(tagset, p.name, f.get("name"), f.get("value")) for f in e.findall("feat"))
        prev_form = None
        codes: list[str] = []
        for infl in e.findall("inflected"):
            form_e = infl.find("form")
            if form_e is None or not form_e.text:
                raise doc.error(infl, "inflected block without form")
            feats = [(f.get("name"), f.get("value")) for f in infl.findall("feat")]
            code = _code(tagset, p.name, feats) if feats else None
            if prev_form == form_e.text and code is not None and codes:
                codes.append(code)
                continue
            if prev_form is not None:
                out.append(LexiconEntry(prev_form, lemma, pos, traits, tuple(codes)))
            prev_form = form_e.text
            codes = [code] if code is not None else []
        if prev_form is not None:
            out.append(LexiconEntry(prev_form, lemma, pos, traits, tuple(codes)))
    return out
