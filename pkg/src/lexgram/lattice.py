"""Text automata: one acyclic lattice of lexical analyses per sentence.

States sit on token boundaries (state ``i`` precedes token ``i``); a
transition from ``i`` to ``j`` labels tokens ``i..j-1`` with one analysis,
so multi-word units simply span several tokens.
"""

from __future__ import annotations

import struct
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import _xml
from .lexicon.index import EXACT, IndexedLexicon, LookupOptions
from .model import WORD, Feature, Label, LexicalAnalysis, OutputMark, Token, UnknownToken
from .segmenter import MarkupSpan, SegmentedText, Sentence


class LatticeError(ValueError):
    pass


@dataclass(frozen=True)
class State:
    id: int
    position: int  # token index
    offset: int = 0  # byte offset of the boundary in the source


@dataclass(frozen=True)
class Transition:
    source: int
    target: int
    label: Label


@dataclass(frozen=True)
class SentenceAutomaton:
    sentence_id: str
    token_ids: tuple[str, ...]
    states: tuple[State, ...]
    transitions: tuple[Transition, ...]
    initial: int = 0
    final: int = 0

    def state(self, sid: int) -> State:
        return self._index()[0][sid]

    def outgoing(self, sid: int) -> tuple[Transition, ...]:
        return self._index()[1].get(sid, ())

    def _index(self):
        cached = self.__dict__.get("_cache")
        if cached is None:
            states = {s.id: s for s in self.states}
            out: dict[int, list[Transition]] = {}
            for t in self.transitions:
                out.setdefault(t.source, []).append(t)
            cached = (states, {k: tuple(v) for k, v in out.items()})
            object.__setattr__(self, "_cache", cached)
        return cached

    def topological_order(self) -> list[int]:
        """State ids in a topological order; raises if the automaton has a cycle."""
        indeg = {s.id: 0 for s in self.states}
        for t in self.transitions:
            indeg[t.target] += 1
        pos = {s.id: (s.position, s.id) for s in self.states}
        ready = sorted((sid for sid, d in indeg.items() if d == 0), key=pos.get)
        order = []
        while ready:
            sid = ready.pop(0)
            order.append(sid)
            for t in self.outgoing(sid):
                indeg[t.target] -= 1
                if indeg[t.target] == 0:
                    ready.append(t.target)
            ready.sort(key=pos.get)
        if len(order) != len(self.states):
            raise LatticeError(f"sentence {self.sentence_id}: automaton has a cycle")
        return order

    def __getstate__(self):
        d = dict(self.__dict__)
        d.pop("_cache", None)
        return d


@dataclass(frozen=True)
class UnknownStats:
    tokens: int = 0  # word tokens
    unknown: int = 0
    unknown_capitalized: int = 0

    @property
    def rate(self) -> float:
        return self.unknown / self.tokens if self.tokens else 0.0

    @property
    def rate_without_capitalized(self) -> float:
        return (self.unknown - self.unknown_capitalized) / self.tokens if self.tokens else 0.0


@dataclass(frozen=True)
class TaggedText:
    tokens: tuple[Token, ...] = ()
    sentences: tuple[SentenceAutomaton, ...] = ()
    stats: UnknownStats = field(default_factory=UnknownStats)

    def token_map(self) -> dict[str, Token]:
        return {t.id: t for t in self.tokens}


# -- tagging --------------------------------------------------------------------


def _separators(sentence: Sentence) -> list[str | None]:
    """What lies between consecutive tokens: '' (nothing), ' ' (blanks) or None (markup)."""
    seps: list[str | None] = []
    pending: list[str] = []
    blocked = False
    seen_token = False
    for k, item in enumerate(sentence.items):
        if isinstance(item, MarkupSpan):
            blocked = True
        else:
            if seen_token:
                text = "".join(pending)
                seps.append(None if blocked else ("" if text == "" else " "))
            seen_token = True
            pending = []
            blocked = False
        if k < len(sentence.gaps):
            pending.append(sentence.gaps[k])
    return seps


def _levels(lexicons: Sequence[IndexedLexicon]) -> list[list[IndexedLexicon]]:
    levels: list[list[IndexedLexicon]] = []
    for ix in sorted(lexicons, key=lambda i: -i.priority):
        if levels and levels[-1][0].priority == ix.priority:
            levels[-1].append(ix)
        else:
            levels.append([ix])
    return levels


def tag_sentence(
    sentence: Sentence, lexicons: Sequence[IndexedLexicon], options: LookupOptions = EXACT
) -> tuple[SentenceAutomaton, tuple[int, int, int]]:
    tokens = sentence.tokens
    n = len(tokens)
    seps = _separators(sentence)
    levels = _levels(lexicons)
    # span -> analyses from the highest priority level that knows it
    found: dict[tuple[int, int], tuple[int, list[LexicalAnalysis]]] = {}
    for i in range(n):
        for rank, level in enumerate(levels):
            for ix in level:
                configs = ix.start()
                surface = ""
                for j in range(i, n):
                    configs = ix.advance(configs, tokens[j].surface, options)
                    if not configs:
                        break
                    surface += tokens[j].surface
                    analyses = ix.analyses(configs, surface)
                    if analyses:
                        span = (i, j + 1)
                        best = found.get(span)
                        if best is None or best[0] > rank:
                            found[span] = (rank, list(analyses))
                        elif best[0] == rank:
                            best[1].extend(a for a in analyses if a not in best[1])
                    if j + 1 >= n or seps[j] is None:
                        break
                    if seps[j]:
                        configs = ix.advance(configs, " ", options)
                        surface += " "
    raw: list[Transition] = []
    starts = set()
    for (i, k) in sorted(found):
        starts.add(i)
        raw.extend(Transition(i, k, a) for a in found[(i, k)][1])
    for i in range(n):
        if i not in starts:
            raw.append(Transition(i, i + 1, UnknownToken(tokens[i].surface)))
    raw.sort(key=lambda t: (t.source, t.target))

    # trim: keep what is reachable from 0 (everything reaches n)
    reach = {0}
    kept = []
    for t in raw:
        if t.source in reach:
            reach.add(t.target)
            kept.append(t)

    offsets = [tok.byte_span[0] for tok in tokens] + [tokens[-1].byte_span[1] if tokens else 0]
    states = tuple(State(i, i, offsets[i]) for i in range(n + 1) if i in reach)
    lexical = [False] * n
    for t in kept:
        if isinstance(t.label, LexicalAnalysis):
            for k in range(t.source, t.target):
                lexical[k] = True
    words = unknown = unknown_cap = 0
    for tok, known in zip(tokens, lexical):
        if tok.kind == WORD:
            words += 1
            if not known:
                unknown += 1
                if tok.case_class in ("capit", "upper"):
                    unknown_cap += 1
    aut = SentenceAutomaton(sentence.id, tuple(t.id for t in tokens), states, tuple(kept), 0, n)
    return aut, (words, unknown, unknown_cap)


def tag(
    text: SegmentedText, lexicons: Sequence[IndexedLexicon], options: LookupOptions = EXACT
) -> TaggedText:
    """Build the lattice of every sentence with priority-blocked lookups."""
    digests = {ix.tagset_digest for ix in lexicons if ix.tagset_digest}
    if len(digests) > 1:
        raise LatticeError("lexicons were indexed with different tagsets")
    automata = []
    totals = [0, 0, 0]
    for sentence in text.sentences():
        aut, counts = tag_sentence(sentence, lexicons, options)
        automata.append(aut)
        for k in range(3):
            totals[k] += counts[k]
    return TaggedText(tuple(text.tokens()), tuple(automata), UnknownStats(*totals))


def check_automaton(aut: SentenceAutomaton) -> None:
    """Raise :class:`LatticeError` unless the automaton is acyclic and trim."""
    ids = {s.id for s in aut.states}
    for t in aut.transitions:
        if t.source not in ids or t.target not in ids:
            raise LatticeError(f"dangling transition {t}")
    order = aut.topological_order()
    fwd = {aut.initial}
    for sid in order:
        if sid in fwd:
            fwd.update(t.target for t in aut.outgoing(sid))
    back = {aut.final}
    for sid in reversed(order):
        if any(t.target in back for t in aut.outgoing(sid)):
            back.add(sid)
    bad = ids - (fwd & back)
    if bad:
        raise LatticeError(f"sentence {aut.sentence_id}: states {sorted(bad)} are not on a complete path")


# -- fsa document format ----------------------------------------------------------

_KIND_CODES = {"word": 0, "numeric": 1, "punctuation": 2, "symbol": 3}


def _token_elem(tok: Token) -> ET.Element:
    e = ET.Element("token", type=tok.kind, id=tok.id)
    if tok.alphabet:
        e.set("alph", tok.alphabet)
    if tok.case_class:
        e.set("case", tok.case_class)
    if tok.punct_role:
        e.set("role", tok.punct_role)
    e.set("start", str(tok.byte_span[0]))
    e.set("end", str(tok.byte_span[1]))
    e.text = tok.surface
    return e


def _label_elem(tr: ET.Element, label: Label) -> None:
    if isinstance(label, LexicalAnalysis):
        lex = ET.SubElement(tr, "lex")
        ET.SubElement(lex, "form").text = label.form
        ET.SubElement(lex, "lem").text = label.lemma
        ET.SubElement(lex, "pos", v=label.pos)
        for f in label.features:
            ET.SubElement(lex, "f", n=f.name, v=f.value)
    elif isinstance(label, UnknownToken):
        ET.SubElement(tr, "unknown").text = label.text
    else:
        ET.SubElement(tr, "mark").text = label.text


def write_fsa(tagged: TaggedText) -> str:
    root = ET.Element("textfsa")
    s = tagged.stats
    ET.SubElement(
        root, "stats", tokens=str(s.tokens), unknown=str(s.unknown), unknown_capitalized=str(s.unknown_capitalized)
    )
    toks = ET.SubElement(root, "tokens")
    for tok in tagged.tokens:
        toks.append(_token_elem(tok))
    for aut in tagged.sentences:
        se = ET.SubElement(
            root,
            "sentence",
            id=aut.sentence_id,
            tokens=" ".join(aut.token_ids),
            initial=str(aut.initial),
            final=str(aut.final),
        )
        for st in aut.states:
            q = ET.SubElement(se, "q", id=str(st.id), pos=str(st.offset), tok=str(st.position))
            for t in aut.outgoing(st.id):
                tr = ET.SubElement(q, "tr", to=str(t.target))
                _label_elem(tr, t.label)
    return _xml.tostring(root)


def _int(doc, e, name):
    try:
        return int(e.get(name))
    except (TypeError, ValueError):
        raise doc.error(e, f"attribute {name!r} must be an integer") from None


def _read_label(doc, tr: ET.Element) -> Label:
    if len(tr) != 1:
        raise doc.error(tr, "transition needs exactly one label element")
    e = tr[0]
    if e.tag == "lex":
        form, lem, pos = e.find("form"), e.find("lem"), e.find("pos")
        if form is None or lem is None or pos is None or pos.get("v") is None:
            raise doc.error(e, "malformed lex block")
        feats = tuple(Feature(f.get("n"), f.get("v")) for f in e.findall("f"))
        return LexicalAnalysis(form.text or "", lem.text or "", pos.get("v"), feats)
    if e.tag == "unknown":
        return UnknownToken(e.text or "")
    if e.tag == "mark":
        return OutputMark(e.text or "")
    raise doc.error(e, f"unknown label element <{e.tag}>")


def read_fsa(document: str | bytes) -> TaggedText:
    doc = _xml.parse(document)
    root = doc.root
    if root.tag != "textfsa":
        raise doc.error(root, f"expected <textfsa>, got <{root.tag}>")
    stats = UnknownStats()
    tokens: list[Token] = []
    sentences = []
    for e in root:
        if e.tag == "stats":
            stats = UnknownStats(_int(doc, e, "tokens"), _int(doc, e, "unknown"), _int(doc, e, "unknown_capitalized"))
        elif e.tag == "tokens":
            for te in e:
                tokens.append(
                    Token(
                        te.get("id"),
                        te.text or "",
                        te.get("type"),
                        te.get("alph"),
                        te.get("case"),
                        te.get("role"),
                        (_int(doc, te, "start"), _int(doc, te, "end")),
                    )
                )
        elif e.tag == "sentence":
            states = []
            trans = []
            for q in e:
                if q.tag != "q":
                    raise doc.error(q, f"unexpected <{q.tag}> in sentence")
                sid = _int(doc, q, "id")
                states.append(State(sid, _int(doc, q, "tok"), _int(doc, q, "pos")))
                for tr in q:
                    trans.append((tr, Transition(sid, _int(doc, tr, "to"), _read_label(doc, tr))))
            ids = {s.id for s in states}
            for tr, t in trans:
                if t.target not in ids:
                    raise doc.error(tr, f"dangling reference to state {t.target}")
            tids = tuple((e.get("tokens") or "").split())
            sentences.append(
                SentenceAutomaton(
                    e.get("id"),
                    tids,
                    tuple(states),
                    tuple(t for _, t in trans),
                    _int(doc, e, "initial"),
                    _int(doc, e, "final"),
                )
            )
        else:
            raise doc.error(e, f"unexpected <{e.tag}>")
    return TaggedText(tuple(tokens), tuple(sentences), stats)


# -- binary format ------------------------------------------------------------------
#
# header  "LXTA", u16 version, u16 flags, u32 tokens, u32 sentences,
#         u32 strings, u32 analyses, u32 x3 stats
# strings u32 byte length + UTF-8, repeated
# tokens  u32 id, u32 surface, u8 kind, u32 alph, u32 case, u32 role, u32 start, u32 end
# analyses u32 form, u32 lemma, u32 pos, u32 n, (u32 name, u32 value) * n
# sentences u32 id, u32 ntokens, u32 token index * n, u32 initial, u32 final,
#         u32 nstates, (u32 id, u32 position, u32 offset) * n,
#         u32 ntrans, (u32 source, u32 target, u8 kind, u32 ref) * n
# Absent optional strings are stored as 0xFFFFFFFF.

BIN_MAGIC = b"LXTA"
BIN_VERSION = 1
_NONE = 0xFFFFFFFF
_BHEAD = struct.Struct("<4sHHIIII3I")


def write_binary(tagged: TaggedText) -> bytes:
    strings: dict[str, int] = {}
    order: list[str] = []

    def sid(s: str | None) -> int:
        if s is None:
            return _NONE
        i = strings.get(s)
        if i is None:
            i = strings[s] = len(order)
            order.append(s)
        return i

    analyses: dict[LexicalAnalysis, int] = {}
    alist: list[LexicalAnalysis] = []
    tok_index = {t.id: k for k, t in enumerate(tagged.tokens)}
    body = bytearray()
    tok_rec = struct.Struct("<IIBIIIII")
    for t in tagged.tokens:
        body += tok_rec.pack(
            sid(t.id), sid(t.surface), _KIND_CODES.get(t.kind, 3), sid(t.alphabet), sid(t.case_class),
            sid(t.punct_role), t.byte_span[0], t.byte_span[1],
        )
    sent = bytearray()
    for aut in tagged.sentences:
        sent += struct.pack("<II", sid(aut.sentence_id), len(aut.token_ids))
        sent += struct.pack(f"<{len(aut.token_ids)}I", *(tok_index[t] for t in aut.token_ids))
        sent += struct.pack("<III", aut.initial, aut.final, len(aut.states))
        for s in aut.states:
            sent += struct.pack("<III", s.id, s.position, s.offset)
        sent += struct.pack("<I", len(aut.transitions))
        for t in aut.transitions:
            if isinstance(t.label, LexicalAnalysis):
                ref = analyses.get(t.label)
                if ref is None:
                    ref = analyses[t.label] = len(alist)
                    alist.append(t.label)
                kind = 0
            else:
                kind = 1 if isinstance(t.label, UnknownToken) else 2
                ref = sid(t.label.text)
            sent += struct.pack("<IIBI", t.source, t.target, kind, ref)
    arec = bytearray()
    for a in alist:
        arec += struct.pack("<IIII", sid(a.form), sid(a.lemma), sid(a.pos), len(a.features))
        for f in a.features:
            arec += struct.pack("<II", sid(f.name), sid(f.value))
    pool = bytearray()
    for s in order:
        b = s.encode("utf-8")
        pool += struct.pack("<I", len(b)) + b
    st = tagged.stats
    head = _BHEAD.pack(
        BIN_MAGIC, BIN_VERSION, 0, len(tagged.tokens), len(tagged.sentences), len(order), len(alist),
        st.tokens, st.unknown, st.unknown_capitalized,
    )
    return bytes(head + pool + body + arec + sent)


class _Reader:
    def __init__(self, data: bytes, pos: int):
        self.data = data
        self.pos = pos

    def take(self, fmt: str):
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.data):
            raise LatticeError("truncated binary text automaton")
        out = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += size
        return out


def read_binary(data: bytes) -> TaggedText:
    if len(data) < _BHEAD.size:
        raise LatticeError("truncated binary text automaton")
    magic, version, _flags, ntok, nsent, nstr, nan, s0, s1, s2 = _BHEAD.unpack_from(data, 0)
    if magic != BIN_MAGIC:
        raise LatticeError("not a binary text automaton (bad magic)")
    if version != BIN_VERSION:
        raise LatticeError(f"unsupported version {version}")
    r = _Reader(data, _BHEAD.size)
    strings = []
    for _ in range(nstr):
        (n,) = r.take("<I")
        if r.pos + n > len(data):
            raise LatticeError("truncated string pool")
        strings.append(data[r.pos : r.pos + n].decode("utf-8"))
        r.pos += n

    def s(i):
        return None if i == _NONE else strings[i]

    kinds = {v: k for k, v in _KIND_CODES.items()}
    tokens = []
    for _ in range(ntok):
        tid, surf, kind, alph, case, role, start, end = r.take("<IIBIIIII")
        tokens.append(Token(s(tid), s(surf), kinds[kind], s(alph), s(case), s(role), (start, end)))
    alist = []
    for _ in range(nan):
        form, lemma, pos, nf = r.take("<IIII")
        feats = tuple(Feature(s(a), s(b)) for a, b in (r.take("<II") for _ in range(nf)))
        alist.append(LexicalAnalysis(s(form), s(lemma), s(pos), feats))
    sentences = []
    for _ in range(nsent):
        sent_id, nt = r.take("<II")
        tids = tuple(tokens[k].id for k in r.take(f"<{nt}I"))
        initial, final, nst = r.take("<III")
        states = tuple(State(*r.take("<III")) for _ in range(nst))
        (ntr,) = r.take("<I")
        trans = []
        for _ in range(ntr):
            src, dst, kind, ref = r.take("<IIBI")
            if kind == 0:
                label: Label = alist[ref]
            elif kind == 1:
                label = UnknownToken(strings[ref])
            else:
                label = OutputMark(strings[ref])
            trans.append(Transition(src, dst, label))
        sentences.append(SentenceAutomaton(s(sent_id), tids, states, tuple(trans), initial, final))
    return TaggedText(tuple(tokens), tuple(sentences), UnknownStats(s0, s1, s2))


# -- dot export -----------------------------------------------------------------------


def dot_quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def export_dot(aut: SentenceAutomaton) -> str:
    lines = [f"digraph {dot_quote(aut.sentence_id)} {{", "  rankdir=LR;", "  node [shape=circle];"]
    for s in aut.states:
        shape = ', shape="doublecircle"' if s.id == aut.final else ""
        lines.append(f"  {s.id} [label={dot_quote(str(s.id))}{shape}];")
    for t in aut.transitions:
        lines.append(f"  {t.source} -> {t.target} [label={dot_quote(t.label.summary())}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_text_dot(tagged: TaggedText) -> str:
    return "".join(export_dot(a) for a in tagged.sentences)


def add_transitions(aut: SentenceAutomaton, new: Iterable[Transition]) -> SentenceAutomaton:
    """Copy of ``aut`` with extra transitions (duplicates ignored)."""
    existing = set(aut.transitions)
    extra = []
    for t in new:
        if t not in existing:
            existing.add(t)
            extra.append(t)
    if not extra:
        return aut
    merged = sorted(list(aut.transitions) + extra, key=lambda t: (t.source, t.target))
    return SentenceAutomaton(aut.sentence_id, aut.token_ids, aut.states, tuple(merged), aut.initial, aut.final)
