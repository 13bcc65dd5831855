"""Paragraph, sentence and token segmentation of plain text or HTML.

Tokens are classified from Unicode general categories. Whitespace between
tokens is kept so that the plain-text source can be rebuilt exactly:
a :class:`SegmentedText` is lossless for plain input.
"""

from __future__ import annotations

import html
import unicodedata
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Union

import regex

from . import _xml
from .model import NUMERIC, PUNCTUATION, SYMBOL, WORD, Token

PLAIN = "txt"
HTML = "html"

TERMINATORS = frozenset(".!?…")

_TOKEN_RE = regex.compile(r"(\p{L}[\p{L}\p{M}]*)|(\p{Nd}+)|(\p{P})|(\s+)|(.)", regex.DOTALL)
_PAR_BREAK = regex.compile(r"\n[^\S\n]*\n")
_TAG_RE = regex.compile(
    r"<!--.*?-->|<!\[CDATA\[.*?\]\]>|<![^>]*>|<\?.*?\?>"
    r"|<(script|style)\b[^>]*>.*?</\1\s*>|</?[A-Za-z][^<>]*>",
    regex.DOTALL | regex.IGNORECASE,
)
_ENTITY_RE = regex.compile(r"&(#[0-9]+|#[xX][0-9a-fA-F]+|[A-Za-z][A-Za-z0-9]*);?")
_BLOCK_TAGS = frozenset(
    "address article aside blockquote body dd details div dl dt fieldset figcaption figure footer "
    "form h1 h2 h3 h4 h5 h6 head header hr html li main nav ol p pre section table tbody td tfoot "
    "th thead title tr ul".split()
)


class SegmentationError(ValueError):
    pass


@dataclass(frozen=True)
class MarkupSpan:
    """Raw markup kept verbatim (HTML input only)."""

    raw: str


@dataclass(frozen=True)
class Sentence:
    id: str
    items: tuple[Union[Token, MarkupSpan], ...]
    gaps: tuple[str, ...]  # text between items[i] and items[i + 1]

    @property
    def tokens(self) -> tuple[Token, ...]:
        return tuple(i for i in self.items if isinstance(i, Token))


@dataclass(frozen=True)
class Paragraph:
    id: str
    items: tuple[Union[Sentence, MarkupSpan], ...]
    gaps: tuple[str, ...]

    @property
    def sentences(self) -> tuple[Sentence, ...]:
        return tuple(i for i in self.items if isinstance(i, Sentence))


@dataclass(frozen=True)
class SegmentedText:
    original_format: str = PLAIN
    leading: str = ""
    paragraphs: tuple[Paragraph, ...] = ()
    gaps: tuple[str, ...] = ()  # text after each paragraph

    def sentences(self) -> Iterator[Sentence]:
        for p in self.paragraphs:
            yield from p.sentences

    def tokens(self) -> Iterator[Token]:
        for s in self.sentences():
            yield from s.tokens

    def text(self) -> str:
        """Rebuild the source text (exact for plain input)."""
        return "".join(_pieces(self))

    def token_stream(self) -> list[tuple[Token, str]]:
        """Every token with the text that separates it from the next token."""
        out: list[tuple[Token, str]] = []
        pending: list[str] = []
        for piece in _pieces(self, tokens_as_objects=True):
            if isinstance(piece, Token):
                if out:
                    out[-1] = (out[-1][0], "".join(pending))
                pending = []
                out.append((piece, ""))
            elif out:
                pending.append(piece)
        if out:
            out[-1] = (out[-1][0], "".join(pending))
        return out


def _pieces(text: SegmentedText, tokens_as_objects: bool = False):
    yield text.leading
    for par, gap in zip(text.paragraphs, text.gaps):
        for i, item in enumerate(par.items):
            if isinstance(item, Sentence):
                for j, sub in enumerate(item.items):
                    if isinstance(sub, Token):
                        yield sub if tokens_as_objects else sub.surface
                    else:
                        yield sub.raw
                    if j < len(item.gaps):
                        yield item.gaps[j]
            else:
                yield item.raw
            if i < len(par.gaps):
                yield par.gaps[i]
        yield gap


# -- token classification -----------------------------------------------------


@lru_cache(maxsize=65536)
def _word_attributes(surface: str) -> tuple[str, str]:
    scripts = []
    for c in surface:
        if unicodedata.category(c).startswith("L"):
            script = unicodedata.name(c, "UNKNOWN").split(" ")[0].lower()
            if script not in scripts:
                scripts.append(script)
    alphabet = scripts[0] if len(scripts) == 1 else "mixed"
    cased = [c for c in surface if c.isupper() or c.islower()]
    if not cased:
        case = "none"
    elif all(c.islower() for c in cased):
        case = "lower"
    elif cased[0].isupper() and all(c.islower() for c in cased[1:]):
        case = "capit"
    elif all(c.isupper() for c in cased):
        case = "upper"
    else:
        case = "mixed"
    return alphabet, case


def _punct_role(c: str) -> str:
    cat = unicodedata.category(c)
    if cat in ("Ps", "Pi"):
        return "open"
    if cat in ("Pe", "Pf"):
        return "close"
    return "neutral"


# -- segmentation --------------------------------------------------------------


class _Source:
    """Decoded characters with the source byte span of each one."""

    def __init__(self, source: str, fmt: str):
        self.atoms: list[tuple] = []
        if fmt == PLAIN:
            self._text(source, 0, None)
            return
        pos = 0
        byte = 0
        for m in _TAG_RE.finditer(source):
            if m.start() > pos:
                byte = self._html_text(source[pos : m.start()], byte)
            raw = m.group(0)
            name = regex.match(r"</?([A-Za-z][A-Za-z0-9]*)", raw)
            block = bool(name) and name.group(1).lower() in _BLOCK_TAGS
            closing = raw.startswith("</")
            self.atoms.append(("tag", raw, block, closing))
            byte += len(raw.encode("utf-8"))
            pos = m.end()
        if pos < len(source):
            self._html_text(source[pos:], byte)

    def _html_text(self, chunk: str, byte: int) -> int:
        decoded: list[str] = []
        offsets: list[int] = []
        pos = 0
        for m in _ENTITY_RE.finditer(chunk):
            for c in chunk[pos : m.start()]:
                decoded.append(c)
                offsets.append(byte)
                byte += len(c.encode("utf-8"))
            value = html.unescape(m.group(0))
            width = len(m.group(0).encode("utf-8"))
            for c in value:
                decoded.append(c)
                offsets.append(byte)
            byte += width
            pos = m.end()
        for c in chunk[pos:]:
            decoded.append(c)
            offsets.append(byte)
            byte += len(c.encode("utf-8"))
        offsets.append(byte)
        self._text("".join(decoded), 0, offsets)
        return byte

    def _text(self, text: str, base: int, offsets: list[int] | None) -> None:
        byte = base
        for m in _TOKEN_RE.finditer(text):
            s = m.group(0)
            if offsets is None:
                start = byte
                byte += len(s.encode("utf-8"))
                end = byte
            else:
                start, end = offsets[m.start()], offsets[m.end()]
            if m.lastindex == 4:
                self.atoms.append(("ws", s))
            else:
                self.atoms.append(("tok", s, m.lastindex, start, end))


def segment(source: str | bytes, format: str = PLAIN) -> SegmentedText:
    """Split ``source`` into paragraphs, sentences and typed tokens."""
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SegmentationError(f"invalid UTF-8 at byte {exc.start}") from None
    if format in ("plain", PLAIN):
        fmt = PLAIN
    elif format == HTML:
        fmt = HTML
    else:
        raise ValueError(f"unknown input format {format!r}")
    atoms = _Source(source, fmt).atoms

    leading: list[str] = []
    raw_pars: list[list[tuple]] = []
    par_gaps: list[list[str]] = []
    cur: list[tuple] | None = None

    def close(extra: str = "") -> None:
        nonlocal cur
        trailing = []
        while cur and cur[-1][0] == "ws":
            trailing.append(cur.pop()[1])
        raw_pars.append(cur)
        par_gaps.append(["".join(reversed(trailing)) + extra])
        cur = None

    for atom in atoms:
        kind = atom[0]
        if kind == "ws":
            if cur is None:
                (par_gaps[-1] if raw_pars else leading).append(atom[1])
            elif fmt == PLAIN and _PAR_BREAK.search(atom[1]):
                close(atom[1])
            else:
                cur.append(atom)
        elif kind == "tag" and atom[2]:
            if atom[3]:
                if cur is None and raw_pars:
                    # stray closing tag: belongs to the paragraph just closed
                    cur = raw_pars.pop()
                    gap = "".join(par_gaps.pop())
                    if gap:
                        cur.append(("ws", gap))
                elif cur is None:
                    cur = []
                cur.append(atom)
                close()
            else:
                if cur is not None and any(a[0] == "tok" for a in cur):
                    close()
                if cur is None:
                    cur = []
                cur.append(atom)
        else:
            if cur is None:
                cur = []
            cur.append(atom)
    if cur is not None:
        close()

    counters = {"t": 0, "s": 0}
    paragraphs = []
    for n, atoms_ in enumerate(raw_pars, 1):
        paragraphs.append(_build_paragraph(str(n), atoms_, counters))
    return SegmentedText(fmt, "".join(leading), tuple(paragraphs), tuple("".join(g) for g in par_gaps))


def _make_token(atom: tuple, counters: dict) -> Token:
    _, s, group, start, end = atom
    counters["t"] += 1
    tid = f"t{counters['t']}"
    if group == 1:
        alphabet, case = _word_attributes(s)
        return Token(tid, s, WORD, alphabet, case, None, (start, end))
    if group == 2:
        return Token(tid, s, NUMERIC, None, None, None, (start, end))
    if group == 3:
        return Token(tid, s, PUNCTUATION, None, None, _punct_role(s), (start, end))
    return Token(tid, s, SYMBOL, None, None, None, (start, end))


def _starts_sentence(atom: tuple) -> bool:
    s, group = atom[1], atom[2]
    if group == 1:
        return s[0].isupper()
    if group == 2:
        return True
    return group == 3 and _punct_role(s) == "open"


def _group(atoms: list[tuple], make) -> tuple[tuple, tuple[str, ...]]:
    items: list = []
    gaps: list[str] = []
    pending: list[str] = []
    for atom in atoms:
        if atom[0] == "ws":
            pending.append(atom[1])
            continue
        if items:
            gaps.append("".join(pending))
        pending = []
        items.append(make(atom))
    return tuple(items), tuple(gaps)


def _build_paragraph(pid: str, atoms: list[tuple], counters: dict) -> Paragraph:
    tok_idx = [i for i, a in enumerate(atoms) if a[0] == "tok"]
    # sentence ranges as (first atom, last atom) inclusive
    ranges = []
    first = None
    for n, i in enumerate(tok_idx):
        if first is None:
            first = i
        atom = atoms[i]
        last_token = n == len(tok_idx) - 1
        if last_token:
            ranges.append((first, i))
            break
        if atom[2] == 3 and atom[1] in TERMINATORS:
            nxt = tok_idx[n + 1]
            spaced = any(a[0] == "ws" for a in atoms[i + 1 : nxt])
            if spaced and _starts_sentence(atoms[nxt]):
                ranges.append((first, i))
                first = None

    top: list = []
    pos = 0
    for a, b in ranges:
        top.extend(atoms[pos:a])
        top.append(("sentence", atoms[a : b + 1]))
        pos = b + 1
    top.extend(atoms[pos:])

    def make(atom):
        if atom[0] == "tag":
            return MarkupSpan(atom[1])
        sid = f"s{counters['s']}"
        counters["s"] += 1
        items, gaps = _group(atom[1], lambda t: MarkupSpan(t[1]) if t[0] == "tag" else _make_token(t, counters))
        return Sentence(sid, items, gaps)

    items, gaps = _group(top, make)
    return Paragraph(pid, items, gaps)


# -- seg document format ---------------------------------------------------------


def _token_element(tok: Token, with_span: bool) -> ET.Element:
    e = ET.Element("token", type=tok.kind, id=tok.id)
    if tok.alphabet:
        e.set("alph", tok.alphabet)
    if tok.case_class and tok.case_class != "lower":
        e.set("case", tok.case_class)
    if tok.punct_role in ("open", "close"):
        e.set("role", tok.punct_role)
    if with_span:
        e.set("start", str(tok.byte_span[0]))
        e.set("end", str(tok.byte_span[1]))
    e.text = tok.surface
    return e


def _markup_element(m: MarkupSpan) -> ET.Element:
    e = ET.Element("markup")
    e.text = m.raw
    return e


def write_seg(text: SegmentedText) -> str:
    """Serialize to the seg document vocabulary (document/par/tu/token)."""
    with_span = text.original_format != PLAIN
    root = ET.Element("document", original_format=text.original_format)
    root.text = text.leading or None
    for par, gap in zip(text.paragraphs, text.gaps):
        pe = ET.SubElement(root, "par", id=par.id)
        pe.tail = gap or None
        for i, item in enumerate(par.items):
            if isinstance(item, Sentence):
                ie = ET.SubElement(pe, "tu", id=item.id)
                for j, sub in enumerate(item.items):
                    se = _token_element(sub, with_span) if isinstance(sub, Token) else _markup_element(sub)
                    se.tail = item.gaps[j] if j < len(item.gaps) and item.gaps[j] else None
                    ie.append(se)
            else:
                ie = _markup_element(item)
                pe.append(ie)
            ie.tail = par.gaps[i] if i < len(par.gaps) and par.gaps[i] else None
    return _xml.tostring(root, indent=None)


def _read_token(doc: _xml.Document, e: ET.Element) -> Token:
    kind = e.get("type")
    tid = e.get("id")
    if not kind or not tid:
        raise doc.error(e, "token needs type and id")
    case = e.get("case")
    role = e.get("role")
    if kind == WORD and case is None:
        case = "lower"
    if kind == PUNCTUATION and role is None:
        role = "neutral"
    span = (int(e.get("start", 0)), int(e.get("end", 0)))
    return Token(tid, e.text or "", kind, e.get("alph"), case, role, span)


def _tail(elem: ET.Element) -> str:
    return elem.tail or ""


def read_seg(document: str | bytes) -> SegmentedText:
    doc = _xml.parse(document)
    root = doc.root
    if root.tag != "document":
        raise doc.error(root, f"expected <document>, got <{root.tag}>")
    fmt = root.get("original_format", PLAIN)
    ids: set[str] = set()

    def check_id(e, value):
        if value in ids:
            raise doc.error(e, f"duplicate id {value!r}")
        ids.add(value)

    paragraphs = []
    gaps = []
    for pe in root:
        if pe.tag != "par":
            raise doc.error(pe, f"unexpected <{pe.tag}> in document")
        items = []
        pgaps = []
        for ie in pe:
            if ie.tag == "tu":
                check_id(ie, ie.get("id"))
                sitems = []
                sgaps = []
                for te in ie:
                    if te.tag == "token":
                        tok = _read_token(doc, te)
                        check_id(te, tok.id)
                        sitems.append(tok)
                    elif te.tag == "markup":
                        sitems.append(MarkupSpan(te.text or ""))
                    else:
                        raise doc.error(te, f"unexpected <{te.tag}> in tu")
                    sgaps.append(_tail(te))
                items.append(Sentence(ie.get("id"), tuple(sitems), tuple(sgaps[:-1])))
            elif ie.tag == "markup":
                items.append(MarkupSpan(ie.text or ""))
            else:
                raise doc.error(ie, f"unexpected <{ie.tag}> in par")
            pgaps.append(_tail(ie))
        paragraphs.append(Paragraph(pe.get("id"), tuple(items), tuple(pgaps[:-1])))
        gaps.append(_tail(pe))
    text = SegmentedText(fmt, root.text or "", tuple(paragraphs), tuple(gaps))
    if fmt == PLAIN:
        text = _with_plain_spans(text)
    return text


def _with_plain_spans(text: SegmentedText) -> SegmentedText:
    """Recompute byte spans of a plain text from its rebuilt source."""
    offset = 0
    spans: dict[str, tuple[int, int]] = {}
    for piece in _pieces(text, tokens_as_objects=True):
        if isinstance(piece, Token):
            n = len(piece.surface.encode("utf-8"))
            spans[piece.id] = (offset, offset + n)
            offset += n
        else:
            offset += len(piece.encode("utf-8"))

    def fix(tok: Token) -> Token:
        s = spans[tok.id]
        return tok if tok.byte_span == s else Token(tok.id, tok.surface, tok.kind, tok.alphabet, tok.case_class, tok.punct_role, s)

    pars = []
    for p in text.paragraphs:
        items = []
        for item in p.items:
            if isinstance(item, Sentence):
                item = Sentence(item.id, tuple(fix(t) if isinstance(t, Token) else t for t in item.items), item.gaps)
            items.append(item)
        pars.append(Paragraph(p.id, tuple(items), p.gaps))
    return SegmentedText(text.original_format, text.leading, tuple(pars), text.gaps)
