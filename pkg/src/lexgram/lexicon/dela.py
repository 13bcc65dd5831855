"""DELA line format: ``form,lemma.POS+trait:code:code``.

The structural characters ``, . + :`` and the backslash are escaped with a
backslash inside fields. An empty lemma field stands for the inflected form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from ..model import Feature, LexicalAnalysis, TagsetDefinition

STRUCTURAL = ",.+:\\"


class DelaError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class LexiconEntry:
    form: str
    lemma: str
    pos: str
    traits: tuple[str, ...] = ()
    codes: tuple[str, ...] = ()


def _escape(s: str, chars: str = STRUCTURAL) -> str:
    return "".join("\\" + c if c in chars else c for c in s)


def _fields(line: str, lineno: int | None) -> list[tuple[str, str]]:
    """Split into (separator-before, unescaped text) pieces."""
    pieces: list[tuple[str, str]] = []
    sep = ""
    cur: list[str] = []
    i = 0
    n = len(line)
    # form ends at the first ',', lemma at the next '.', then '+'/':' split the rest
    expect = ","
    while i < n:
        c = line[i]
        if c == "\\":
            if i + 1 >= n:
                raise DelaError("dangling backslash", lineno)
            cur.append(line[i + 1])
            i += 2
            continue
        if (expect == "," and c == ",") or (expect == "." and c == ".") or (expect == "+:" and c in "+:"):
            pieces.append((sep, "".join(cur)))
            cur = []
            sep = c
            if expect == ",":
                expect = "."
            elif expect == ".":
                expect = "+:"
        else:
            cur.append(c)
        i += 1
    pieces.append((sep, "".join(cur)))
    return pieces


def parse_line(line: str, lineno: int | None = None) -> LexiconEntry:
    pieces = _fields(line, lineno)
    if len(pieces) < 3 or pieces[1][0] != "," or pieces[2][0] != ".":
        raise DelaError(f"missing separator in {line!r}", lineno)
    form = pieces[0][1]
    if not form:
        raise DelaError("empty inflected form", lineno)
    lemma = pieces[1][1] or form
    pos = pieces[2][1]
    if not pos:
        raise DelaError("empty part of speech", lineno)
    traits: list[str] = []
    codes: list[str] = []
    for sep, text in pieces[3:]:
        if not text:
            raise DelaError(f"empty field after {sep!r}", lineno)
        if sep == "+":
            if codes:
                raise DelaError("trait after inflectional code", lineno)
            traits.append(text)
        else:
            codes.append(text)
    return LexiconEntry(form, lemma, pos, tuple(traits), tuple(codes))


def parse_dela(text: str, *, strict: bool = True, diagnostics: list[str] | None = None) -> list[LexiconEntry]:
    """Parse DELA text, one entry per non-blank line.

    With ``strict=False`` faulty lines are skipped and their messages are
    appended to ``diagnostics``.
    """
    entries = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.rstrip("\r")
        if not line.strip():
            continue
        if line.startswith("﻿"):
            line = line[1:]
        try:
            entries.append(parse_line(line, lineno))
        except DelaError as exc:
            if strict:
                raise
            if diagnostics is not None:
                diagnostics.append(str(exc))
    return entries


def format_line(entry: LexiconEntry, compress_lemma: bool = False) -> str:
    lemma = "" if compress_lemma and entry.lemma == entry.form else _escape(entry.lemma)
    parts = [_escape(entry.form), ",", lemma, ".", _escape(entry.pos)]
    for t in entry.traits:
        parts += ["+", _escape(t)]
    for c in entry.codes:
        parts += [":", _escape(c)]
    return "".join(parts)


def write_dela(entries: Iterable[LexiconEntry], compress_lemma: bool = False) -> str:
    return "".join(format_line(e, compress_lemma) + "\n" for e in entries)


# -- expansion to analyses ------------------------------------------------------


def resolve_value(tagset: TagsetDefinition, pos: str, token: str, *, single_char: bool = False):
    """Find the (attribute, value) a trait or code character stands for."""
    p = tagset.pos(pos)
    if p is None:
        raise DelaError(f"unknown POS {pos!r}")
    if not single_char and "=" in token:
        name, value = token.split("=", 1)
        return name, value
    decls = sorted(p.attributes, key=lambda d: not d.shortcut)
    for decl in decls:
        value = tagset.attrtype(decl.type).by_alias(token)
        if value is not None:
            return decl.name, value
    # value names work too (single-character ones only inside codes)
    for decl in decls:
        if token in tagset.attrtype(decl.type).value_names():
            return decl.name, token
    raise DelaError(f"unresolvable alias {token!r} for POS {p.name!r}")


def code_features(tagset: TagsetDefinition, pos: str, code: str) -> list[tuple[str, str]]:
    feats: list[tuple[str, str]] = []
    for ch in code:
        name, value = resolve_value(tagset, pos, ch, single_char=True)
        if any(n == name for n, _ in feats):
            raise DelaError(f"code {code!r} sets {name!r} twice")
        feats.append((name, value))
    return feats


def _ordered(tagset: TagsetDefinition, pos: str, feats: dict[str, str]) -> tuple[Feature, ...]:
    p = tagset.pos(pos)
    order = {d.name: i for i, d in enumerate(p.attributes)}
    return tuple(Feature(n, feats[n]) for n in sorted(feats, key=lambda n: order.get(n, len(order))))


def expand(entry: LexiconEntry, tagset: TagsetDefinition | None = None) -> list[LexicalAnalysis]:
    """One analysis per inflectional code (one if the entry has none).

    Without a tagset the POS is kept verbatim, every trait becomes a boolean
    feature and each code is kept whole as a ``flex`` feature.
    """
    if tagset is None:
        base = [Feature(t, "true") for t in entry.traits]
        if not entry.codes:
            return [LexicalAnalysis(entry.form, entry.lemma, entry.pos, tuple(base))]
        return [
            LexicalAnalysis(entry.form, entry.lemma, entry.pos, tuple(base + [Feature("flex", c)])) for c in entry.codes
        ]
    p = tagset.pos(entry.pos)
    if p is None:
        raise DelaError(f"unknown POS {entry.pos!r}")
    base_feats: dict[str, str] = {}
    for t in entry.traits:
        name, value = resolve_value(tagset, p.name, t)
        base_feats[name] = value
    out = []
    for code in entry.codes or ("",):
        feats = dict(base_feats)
        for name, value in code_features(tagset, p.name, code):
            feats[name] = value
        for decl in p.attributes:
            if decl.default is not None:
                feats.setdefault(decl.name, decl.default)
        out.append(LexicalAnalysis(entry.form, entry.lemma, p.name, _ordered(tagset, p.name, feats)))
    return out
