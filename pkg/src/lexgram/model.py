"""Shared data model: tagsets, features, lexical analyses, masks and tokens.

Every type here is a frozen dataclass; nothing mutates after construction.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from typing import Iterable, Union

from . import _xml

BOOL = "bool"
ENUM = "enum"


class TagsetError(ValueError):
    pass


@dataclass(frozen=True)
class AttributeType:
    name: str
    kind: str  # BOOL or ENUM
    values: tuple[tuple[str, str | None], ...]  # (value name, alias)

    def value_names(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.values)

    def by_alias(self, alias: str) -> str | None:
        for value, a in self.values:
            if a == alias:
                return value
        return None

    def alias_of(self, value: str) -> str | None:
        for v, a in self.values:
            if v == value:
                return a
        return None


@dataclass(frozen=True)
class AttributeDecl:
    name: str
    type: str
    default: str | None = None
    shortcut: bool = False


@dataclass(frozen=True)
class PosDef:
    name: str
    cutename: str | None
    attributes: tuple[AttributeDecl, ...] = ()

    def attribute(self, name: str) -> AttributeDecl | None:
        for a in self.attributes:
            if a.name == name:
                return a
        return None


@dataclass(frozen=True)
class TagsetDefinition:
    attribute_types: tuple[AttributeType, ...] = ()
    pos_defs: tuple[PosDef, ...] = ()

    def __post_init__(self):
        # lookup tables; not part of equality
        object.__setattr__(self, "_types", {t.name: t for t in self.attribute_types})
        pos = {}
        for p in self.pos_defs:
            pos[p.name] = p
            if p.cutename:
                pos.setdefault(p.cutename, p)
        object.__setattr__(self, "_pos", pos)

    def attrtype(self, name: str) -> AttributeType | None:
        return self._types.get(name)

    def pos(self, name: str) -> PosDef | None:
        """Resolve a POS by its name or its cutename."""
        return self._pos.get(name)

    def default(self, pos: str, attribute: str) -> str | None:
        p = self.pos(pos)
        if p is None:
            return None
        decl = p.attribute(attribute)
        return decl.default if decl else None

    def digest(self) -> int:
        """Stable 32-bit fingerprint, stored in binary index headers."""
        h = hashlib.sha1(repr((self.attribute_types, self.pos_defs)).encode("utf-8"))
        return int.from_bytes(h.digest()[:4], "little")


def _flag(value: str | None) -> bool:
    return (value or "").lower() in ("yes", "true", "1")


def parse_tagset(document: str | bytes) -> TagsetDefinition:
    """Load a tagset description (``attrtype``/``pos`` elements)."""
    doc = _xml.parse(document)
    if doc.root.tag != "tagset":
        raise doc.error(doc.root, f"expected <tagset>, found <{doc.root.tag}>")
    types: list[AttributeType] = []
    seen_types: dict[str, int] = {}
    pos_elems = []
    for elem in doc.root:
        if elem.tag == "attrtype":
            name = elem.get("name")
            if not name:
                raise doc.error(elem, "attrtype without name")
            if name in seen_types:
                raise doc.error(elem, f"duplicate attribute type {name!r}")
            kind = elem.get("type", ENUM)
            if kind not in (BOOL, ENUM):
                raise doc.error(elem, f"unknown attribute kind {kind!r}")
            values: list[tuple[str, str | None]] = []
            if kind == BOOL:
                aliases = {c.tag: c.get("alias") for c in elem if c.tag in ("true", "false")}
                values = [("true", aliases.get("true")), ("false", aliases.get("false"))]
            else:
                for child in elem:
                    if child.tag != "value":
                        raise doc.error(child, f"unexpected element {child.tag!r} in attrtype")
                    vname = child.get("name")
                    if not vname:
                        raise doc.error(child, "value without name")
                    if vname in (v for v, _ in values):
                        raise doc.error(child, f"duplicate value {vname!r} in {name!r}")
                    values.append((vname, child.get("alias")))
            aliases = [a for _, a in values if a is not None]
            if len(aliases) != len(set(aliases)):
                raise doc.error(elem, f"duplicate alias in attribute type {name!r}")
            seen_types[name] = len(types)
            types.append(AttributeType(name, kind, tuple(values)))
        elif elem.tag == "pos":
            pos_elems.append(elem)
        else:
            raise doc.error(elem, f"unexpected element {elem.tag!r}")

    type_names = set(seen_types)
    pos_defs: list[PosDef] = []
    names: set[str] = set()
    for elem in pos_elems:
        name = elem.get("name")
        if not name:
            raise doc.error(elem, "pos without name")
        cutename = elem.get("cutename")
        for n in (name, cutename):
            if n is not None and n in names:
                raise doc.error(elem, f"duplicate POS name {n!r}")
        names.add(name)
        if cutename:
            names.add(cutename)
        attrs = []
        for child in elem:
            if child.tag != "attribute":
                raise doc.error(child, f"unexpected element {child.tag!r} in pos")
            aname = child.get("name")
            atype = child.get("type", aname)
            if not aname:
                raise doc.error(child, "attribute without name")
            if atype not in type_names:
                raise doc.error(child, f"unresolved attribute type {atype!r}")
            default = child.get("default")
            if default is not None and default not in types[seen_types[atype]].value_names():
                raise doc.error(child, f"default {default!r} not in domain of {atype!r}")
            attrs.append(AttributeDecl(aname, atype, default, _flag(child.get("shortcut"))))
        pos_defs.append(PosDef(name, cutename, tuple(attrs)))
    return TagsetDefinition(tuple(types), tuple(pos_defs))


def write_tagset(tagset: TagsetDefinition) -> str:
    import xml.etree.ElementTree as ET

    root = ET.Element("tagset")
    for t in tagset.attribute_types:
        e = ET.SubElement(root, "attrtype", name=t.name, type=t.kind)
        for value, alias in t.values:
            if t.kind == BOOL:
                if alias is not None:
                    ET.SubElement(e, value, alias=alias)
            else:
                v = ET.SubElement(e, "value", name=value)
                if alias is not None:
                    v.set("alias", alias)
    for p in tagset.pos_defs:
        e = ET.SubElement(root, "pos", name=p.name)
        if p.cutename:
            e.set("cutename", p.cutename)
        for a in p.attributes:
            ae = ET.SubElement(e, "attribute", name=a.name, type=a.type)
            if a.default is not None:
                ae.set("default", a.default)
            if a.shortcut:
                ae.set("shortcut", "yes")
    return _xml.tostring(root)


@dataclass(frozen=True)
class Feature:
    name: str
    value: str

    def __str__(self):
        return f"{self.name}={self.value}"


@dataclass(frozen=True)
class LexicalAnalysis:
    form: str
    lemma: str
    pos: str
    features: tuple[Feature, ...] = ()

    def feature_map(self) -> dict[str, str]:
        return {f.name: f.value for f in self.features}

    def summary(self) -> str:
        return f"{self.form}/{self.lemma}.{self.pos}"


@dataclass(frozen=True)
class UnknownToken:
    """Lattice label for a token no lexicon knows about."""

    text: str

    def summary(self) -> str:
        return f"{self.text}/?"


@dataclass(frozen=True)
class OutputMark:
    """Lattice label added when a grammar output is written back into a lattice."""

    text: str

    def summary(self) -> str:
        return f"{{{self.text}}}"


Label = Union[LexicalAnalysis, UnknownToken, OutputMark]


def validate_analysis(analysis: LexicalAnalysis, tagset: TagsetDefinition) -> list[str]:
    """Return a list of problems with ``analysis`` under ``tagset``; empty if valid."""
    problems = []
    pos = tagset.pos(analysis.pos)
    if pos is None:
        return [f"undeclared POS {analysis.pos!r}"]
    seen: set[str] = set()
    for feat in analysis.features:
        if feat.name in seen:
            problems.append(f"several values for attribute {feat.name!r}")
            continue
        seen.add(feat.name)
        decl = pos.attribute(feat.name)
        if decl is None:
            problems.append(f"attribute {feat.name!r} not declared for POS {pos.name!r}")
            continue
        atype = tagset.attrtype(decl.type)
        if feat.value not in atype.value_names():
            problems.append(f"value {feat.value!r} outside the domain of {feat.name!r}")
    return problems


# -- lexical masks -----------------------------------------------------------


@dataclass(frozen=True)
class LexicalMask:
    pos: str | None = None
    form: str | None = None
    lemma: str | None = None
    features: tuple[tuple[str, str], ...] = ()
    negated: bool = False

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(sorted(self.features)))

    @property
    def universal(self) -> bool:
        return self.pos is None and self.form is None and self.lemma is None and not self.features

    def negate(self) -> "LexicalMask":
        return LexicalMask(self.pos, self.form, self.lemma, self.features, not self.negated)

    def __str__(self):
        return format_mask(self)


UNIVERSAL = LexicalMask()

_ESCAPED = re.compile(r"([\\,=<>|])")


def _esc(s: str) -> str:
    return _ESCAPED.sub(r"\\\1", s)


def format_mask(mask: LexicalMask) -> str:
    items = []
    if mask.pos is not None:
        items.append(_esc(mask.pos))
    if mask.lemma is not None:
        items.append("lemma=" + _esc(mask.lemma))
    if mask.form is not None:
        items.append("form=" + _esc(mask.form))
    items.extend(f"{_esc(n)}={_esc(v)}" for n, v in mask.features)
    body = ",".join(items) if items else "*"
    return "<" + ("!" if mask.negated else "") + body + ">"


def _split_unescaped(s: str, sep: str) -> list[str]:
    parts, cur, i = [], [], 0
    while i < len(s):
        c = s[i]
        if c == "\\" and i + 1 < len(s):
            cur.append(s[i : i + 2])
            i += 2
            continue
        if c == sep:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(c)
        i += 1
    parts.append("".join(cur))
    return parts


def _unesc(s: str) -> str:
    return re.sub(r"\\(.)", r"\1", s)


class MaskSyntaxError(ValueError):
    pass


def parse_mask(text: str) -> LexicalMask:
    """Parse ``<noun,number=p>``, ``<lemma=x>``, ``<form=y>``, ``<*>`` or ``<!...>``."""
    text = text.strip()
    trailing = len(text) - 1 - len(text[:-1].rstrip("\\"))  # backslashes before the final ">"
    if len(text) < 3 or text[0] != "<" or text[-1] != ">" or trailing % 2:
        raise MaskSyntaxError(f"malformed mask {text!r}")
    body = text[1:-1]
    negated = body.startswith("!")
    if negated:
        body = body[1:]
    if body == "*":
        return LexicalMask(negated=negated)
    pos = form = lemma = None
    feats = []
    for item in _split_unescaped(body, ","):
        if not item:
            raise MaskSyntaxError(f"empty constraint in {text!r}")
        kv = _split_unescaped(item, "=")
        if len(kv) == 1:
            if pos is not None:
                raise MaskSyntaxError(f"two POS constraints in {text!r}")
            pos = _unesc(kv[0])
        elif len(kv) == 2:
            key, value = _unesc(kv[0]), _unesc(kv[1])
            if key == "pos":
                pos = value
            elif key == "lemma":
                lemma = value
            elif key == "form":
                form = value
            else:
                feats.append((key, value))
        else:
            raise MaskSyntaxError(f"bad constraint {item!r} in {text!r}")
    return LexicalMask(pos, form, lemma, tuple(feats), negated)


def split_masks(text: str) -> list[str]:
    """Split a ``|``-separated mask disjunction, respecting escapes."""
    return [p.strip() for p in _split_unescaped(text, "|") if p.strip()]


def mask_matches(mask: LexicalMask, label: Label, tagset: TagsetDefinition | None = None) -> bool:
    if isinstance(label, LexicalAnalysis):
        ok = _analysis_matches(mask, label, tagset)
    else:
        # unknown tokens and output marks only carry a surface
        ok = mask.pos is None and mask.lemma is None and not mask.features
        ok = ok and (mask.form is None or mask.form == label.text)
    return ok != mask.negated


def _analysis_matches(mask: LexicalMask, a: LexicalAnalysis, tagset: TagsetDefinition | None) -> bool:
    if mask.form is not None and mask.form != a.form:
        return False
    if mask.lemma is not None and mask.lemma != a.lemma:
        return False
    if mask.pos is not None and mask.pos != a.pos:
        if tagset is None:
            return False
        p1, p2 = tagset.pos(mask.pos), tagset.pos(a.pos)
        if p1 is None or p1 is not p2:
            return False
    if mask.features:
        feats = a.feature_map()
        for name, value in mask.features:
            actual = feats.get(name)
            if actual is None and tagset is not None:
                actual = tagset.default(a.pos, name)
            if actual != value:
                return False
    return True


def mask_of(analysis: LexicalAnalysis) -> LexicalMask:
    """The most specific mask describing ``analysis``."""
    return LexicalMask(
        analysis.pos, analysis.form, analysis.lemma, tuple((f.name, f.value) for f in analysis.features)
    )


def validate_mask(mask: LexicalMask, tagset: TagsetDefinition) -> list[str]:
    problems = []
    pos = None
    if mask.pos is not None:
        pos = tagset.pos(mask.pos)
        if pos is None:
            problems.append(f"undeclared POS {mask.pos!r}")
    for name, value in mask.features:
        decls = [p.attribute(name) for p in ([pos] if pos else tagset.pos_defs)]
        decls = [d for d in decls if d is not None]
        if not decls:
            problems.append(f"undeclared attribute {name!r}")
        elif all(value not in tagset.attrtype(d.type).value_names() for d in decls):
            problems.append(f"value {value!r} outside the domain of {name!r}")
    return problems


# -- tokens ------------------------------------------------------------------

WORD = "word"
NUMERIC = "numeric"
PUNCTUATION = "punctuation"
SYMBOL = "symbol"


@dataclass(frozen=True)
class Token:
    id: str
    surface: str
    kind: str
    alphabet: str | None = None
    case_class: str | None = None  # lower, capit, upper, mixed, none
    punct_role: str | None = None  # open, close
    byte_span: tuple[int, int] = field(default=(0, 0))


def features(pairs: Iterable[tuple[str, str]]) -> tuple[Feature, ...]:
    return tuple(Feature(n, v) for n, v in pairs)
