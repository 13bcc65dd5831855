"""Minimal acyclic automaton index over inflected forms.

The automaton is built incrementally from the sorted form list, registering
each finished suffix state so that equivalent states are shared as soon as
they are complete; no separate minimization pass is needed. Accepting states
point to a payload: a deduplicated tuple of packed analyses, where the lemma
is stored as a rewrite of the form (characters to strip, suffix to append).

Binary layout (all integers little-endian)::

    header   magic "LXDX", u16 version, u16 flags, u32 tagset digest,
             i32 priority, u32 entry count, u32 name (string id),
             u32 counts: states, transitions, payloads, payload items,
             records, feature pairs, strings
    alphabet u32 size, u32[size] code points (sorted)
    graph    u32 byte length, then a varint stream, state by state in
             depth-first order: ((payload id + 1) << 1 | has transitions),
             then per transition (alphabet index << 1 | last sibling) and
             the zigzag-coded difference between target and source
    payloads u32[payloads + 1] offsets into u32[payload items] record ids
    records  u32[records] strip, u32 suffix, u32 pos,
             u32[records + 1] offsets into feature pairs (u32 name, u32 value)
    strings  u32[strings + 1] byte offsets, then the UTF-8 blob
"""

from __future__ import annotations

import struct
import unicodedata
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from ..model import Feature, LexicalAnalysis, TagsetDefinition
from .dela import LexiconEntry, expand

MAGIC = b"LXDX"
VERSION = 2
_HEADER = struct.Struct("<4sHHIiII7I")


class IndexFormatError(ValueError):
    pass


@dataclass(frozen=True)
class LookupOptions:
    fold_case: bool = False
    fold_diacritics: bool = False

    @property
    def folding(self) -> bool:
        return self.fold_case or self.fold_diacritics


EXACT = LookupOptions()


@lru_cache(maxsize=None)
def _fold(s: str, case: bool, diacritics: bool) -> str:
    if diacritics:
        s = "".join(c for c in unicodedata.normalize("NFD", s) if not unicodedata.combining(c))
    if case:
        s = s.lower()
    return s


def fold(s: str, options: LookupOptions) -> str:
    if not options.folding:
        return s
    if len(s) == 1:
        return _fold(s, options.fold_case, options.fold_diacritics)
    return "".join(_fold(c, options.fold_case, options.fold_diacritics) for c in s)


# packed analysis: (strip, suffix, pos, features)
Record = tuple[int, str, str, tuple[Feature, ...]]


def _pack(a: LexicalAnalysis) -> Record:
    form, lemma = a.form, a.lemma
    n = 0
    limit = min(len(form), len(lemma))
    while n < limit and form[n] == lemma[n]:
        n += 1
    return (len(form) - n, lemma[n:], a.pos, a.features)


def _unpack(form: str, surface: str, r: Record) -> LexicalAnalysis:
    strip, suffix, pos, feats = r
    lemma = (form[: len(form) - strip] if strip else form) + suffix
    return LexicalAnalysis(surface, lemma, pos, feats)


class IndexedLexicon:
    """Deterministic, acyclic, minimal automaton with analyses on final states."""

    def __init__(
        self,
        edges: list[dict[str, int]],
        finals: list[int],
        payloads: list[tuple[int, ...]],
        records: list[Record],
        priority: int = 0,
        name: str = "",
        tagset_digest: int = 0,
        entry_count: int = 0,
    ):
        self.edges = edges
        self.finals = finals
        self.payloads = payloads
        self.records = records
        self.priority = priority
        self.name = name
        self.tagset_digest = tagset_digest
        self.entry_count = entry_count

    @property
    def state_count(self) -> int:
        return len(self.edges)

    @property
    def transition_count(self) -> int:
        return sum(len(e) for e in self.edges)

    # -- traversal ----------------------------------------------------------

    def start(self) -> list[tuple[int, str]]:
        return [(0, "")]

    def advance(self, configs: Sequence[tuple[int, str]], text: str, options: LookupOptions = EXACT):
        """Consume ``text`` from each (state, dictionary path) configuration."""
        edges = self.edges
        out: list[tuple[int, str]] = []
        if not options.folding:
            for state, path in configs:
                for c in text:
                    state = edges[state].get(c)
                    if state is None:
                        break
                else:
                    out.append((state, path + text))
            return out
        case, dia = options.fold_case, options.fold_diacritics
        q = fold(text, options)
        seen = set()
        stack = [(s, p, 0) for s, p in configs]
        while stack:
            s, p, i = stack.pop()
            if i == len(q) and (s, p) not in seen:
                seen.add((s, p))
                out.append((s, p))
            for c, t in edges[s].items():
                f = _fold(c, case, dia)
                if q.startswith(f, i):
                    stack.append((t, p + c, i + len(f)))
        return out

    def analyses(self, configs: Iterable[tuple[int, str]], surface: str) -> list[LexicalAnalysis]:
        out = []
        seen = set()
        for state, path in configs:
            pid = self.finals[state]
            if pid < 0:
                continue
            for rid in self.payloads[pid]:
                a = _unpack(path, surface, self.records[rid])
                if a not in seen:
                    seen.add(a)
                    out.append(a)
        return out

    def lookup(self, surface: str, options: LookupOptions = EXACT) -> list[LexicalAnalysis]:
        key = surface if options.folding else unicodedata.normalize("NFC", surface)
        return self.analyses(self.advance(self.start(), key, options), surface)

    def __contains__(self, form: str) -> bool:
        return bool(self.lookup(form))

    def forms(self) -> list[str]:
        """Every accepted form, by depth-first enumeration."""
        out = []
        stack = [(0, "")]
        while stack:
            s, p = stack.pop()
            if self.finals[s] >= 0:
                out.append(p)
            for c, t in self.edges[s].items():
                stack.append((t, p + c))
        return sorted(out)


def lookup(index: IndexedLexicon, surface: str, options: LookupOptions = EXACT) -> list[LexicalAnalysis]:
    return index.lookup(surface, options)


def lookup_multi(
    indexes: Sequence[IndexedLexicon], surface: str, options: LookupOptions = EXACT
) -> list[LexicalAnalysis]:
    """Lookup with priority blocking: the highest priority that knows ``surface`` wins."""
    result: list[LexicalAnalysis] = []
    level = None
    for ix in sorted(indexes, key=lambda i: -i.priority):
        if level is not None and ix.priority < level:
            break
        found = ix.lookup(surface, options)
        if found:
            level = ix.priority
            result.extend(a for a in found if a not in result)
    return result


# -- construction -------------------------------------------------------------


class _Node:
    __slots__ = ("edges", "final", "id")

    def __init__(self):
        self.edges: dict[str, _Node] = {}
        self.final = -1
        self.id = -1

    def key(self):
        return (self.final, tuple((c, n.id) for c, n in sorted(self.edges.items())))


def build_index(
    entries: Iterable[LexiconEntry],
    priority: int = 0,
    tagset: TagsetDefinition | None = None,
    name: str = "",
) -> IndexedLexicon:
    records: list[Record] = []
    record_ids: dict[Record, int] = {}
    by_form: dict[str, list[int]] = {}
    count = 0
    for entry in entries:
        count += 1
        form = unicodedata.normalize("NFC", entry.form)
        rids = by_form.setdefault(form, [])
        for a in expand(entry, tagset):
            r = _pack(LexicalAnalysis(form, a.lemma, a.pos, a.features))
            rid = record_ids.get(r)
            if rid is None:
                rid = record_ids[r] = len(records)
                records.append(r)
            if rid not in rids:
                rids.append(rid)
    payloads: list[tuple[int, ...]] = []
    payload_ids: dict[tuple[int, ...], int] = {}

    register: dict[tuple, _Node] = {}
    next_id = [0]
    root = _Node()
    # path of (parent, char, child) not yet registered
    unchecked: list[tuple[_Node, str, _Node]] = []

    def minimize(down_to: int) -> None:
        while len(unchecked) > down_to:
            parent, c, child = unchecked.pop()
            k = child.key()
            existing = register.get(k)
            if existing is not None:
                parent.edges[c] = existing
            else:
                child.id = next_id[0]
                next_id[0] += 1
                register[k] = child

    prev = ""
    for form in sorted(by_form):
        payload = tuple(by_form[form])
        pid = payload_ids.get(payload)
        if pid is None:
            pid = payload_ids[payload] = len(payloads)
            payloads.append(payload)
        cp = 0
        limit = min(len(form), len(prev))
        while cp < limit and form[cp] == prev[cp]:
            cp += 1
        minimize(cp)
        node = unchecked[-1][2] if unchecked else root
        for c in form[cp:]:
            child = _Node()
            node.edges[c] = child
            unchecked.append((node, c, child))
            node = child
        node.final = pid
        prev = form
    minimize(0)

    return _renumber(root, payloads, records, priority, name, tagset.digest() if tagset else 0, count)


def _renumber(root, payloads, records, priority, name, digest, count) -> IndexedLexicon:
    # depth-first preorder: a state's first new child is numbered right after it
    order: dict[int, int] = {}
    nodes = []
    stack = [root]
    while stack:
        n = stack.pop()
        if id(n) in order:
            continue
        order[id(n)] = len(nodes)
        nodes.append(n)
        for c in sorted(n.edges, reverse=True):
            if id(n.edges[c]) not in order:
                stack.append(n.edges[c])
    edges = [{c: order[id(n.edges[c])] for c in sorted(n.edges)} for n in nodes]
    finals = [n.final for n in nodes]
    return IndexedLexicon(edges, finals, payloads, records, priority, name, digest, count)


def minimize(index: IndexedLexicon) -> IndexedLexicon:
    """Bottom-up minimization by state height (for checking the builder)."""
    n = index.state_count
    height = [0] * n
    order = []
    state = [0] * n  # 0 new, 1 open, 2 done
    stack = [(0, False)]
    while stack:
        s, done = stack.pop()
        if done:
            height[s] = 1 + max((height[t] for t in index.edges[s].values()), default=-1)
            state[s] = 2
            order.append(s)
            continue
        if state[s]:
            continue
        state[s] = 1
        stack.append((s, True))
        for t in index.edges[s].values():
            if not state[t]:
                stack.append((t, False))
    rep: dict[int, int] = {}
    classes: dict[tuple, int] = {}
    for s in sorted(order, key=lambda s: height[s]):
        key = (index.finals[s], tuple((c, rep[t]) for c, t in sorted(index.edges[s].items())))
        rep[s] = classes.setdefault(key, s)
    nodes: dict[int, _Node] = {}
    for s in order:
        r = rep[s]
        if r not in nodes:
            nodes[r] = _Node()
            nodes[r].final = index.finals[r]
    for r, node in nodes.items():
        for c, t in index.edges[r].items():
            node.edges[c] = nodes[rep[t]]
    return _renumber(
        nodes[rep[0]], index.payloads, index.records, index.priority, index.name, index.tagset_digest, index.entry_count
    )


# -- binary format ------------------------------------------------------------


class _Strings:
    def __init__(self):
        self.ids: dict[str, int] = {}
        self.items: list[str] = []

    def __call__(self, s: str) -> int:
        i = self.ids.get(s)
        if i is None:
            i = self.ids[s] = len(self.items)
            self.items.append(s)
        return i

    def encode(self) -> bytes:
        blobs = [s.encode("utf-8") for s in self.items]
        offsets = np.zeros(len(blobs) + 1, dtype="<u4")
        if blobs:
            np.cumsum([len(b) for b in blobs], out=offsets[1:])
        return offsets.tobytes() + b"".join(blobs)


def _u32(values) -> bytes:
    return np.asarray(values, dtype="<u4").tobytes()


def _put(out: bytearray, v: int) -> None:
    while v >= 0x80:
        out.append((v & 0x7F) | 0x80)
        v >>= 7
    out.append(v)


def _encode_graph(index: IndexedLexicon, alpha: dict[str, int]) -> bytes:
    out = bytearray()
    for s, (e, final) in enumerate(zip(index.edges, index.finals)):
        _put(out, (final + 1) << 1 | bool(e))
        labels = sorted(e)
        for k, c in enumerate(labels):
            _put(out, alpha[c] << 1 | (k == len(labels) - 1))
            d = e[c] - s
            _put(out, d << 1 if d >= 0 else (-d << 1) - 1)
    return bytes(out)


def _decode_graph(data: bytes, pos: int, end: int, n_states: int, alphabet: list[str]):
    edges: list[dict[str, int]] = []
    finals: list[int] = []
    s = 0

    def get():
        nonlocal pos
        v = shift = 0
        while True:
            if pos >= end:
                raise IndexFormatError("truncated graph stream")
            b = data[pos]
            pos += 1
            v |= (b & 0x7F) << shift
            if b < 0x80:
                return v
            shift += 7

    try:
        for s in range(n_states):
            head = get()
            finals.append((head >> 1) - 1)
            e: dict[str, int] = {}
            more = head & 1
            while more:
                a = get()
                z = get()
                e[alphabet[a >> 1]] = s + (z >> 1 if not z & 1 else -((z + 1) >> 1))
                more = not a & 1
            edges.append(e)
    except IndexError:
        raise IndexFormatError("label outside the alphabet") from None
    if pos != end:
        raise IndexFormatError("graph stream length mismatch")
    for e in edges:
        for t in e.values():
            if not 0 <= t < n_states:
                raise IndexFormatError("transition target out of range")
    return edges, finals


def write_index(index: IndexedLexicon) -> bytes:
    strings = _Strings()
    name_id = strings(index.name)
    alphabet = sorted({c for e in index.edges for c in e})
    graph = _encode_graph(index, {c: k for k, c in enumerate(alphabet)})
    pay_off = [0]
    pay_items: list[int] = []
    for p in index.payloads:
        pay_items.extend(p)
        pay_off.append(len(pay_items))
    strip, suffix, pos, feat_off, pairs = [], [], [], [0], []
    for s, suf, p, feats in index.records:
        strip.append(s)
        suffix.append(strings(suf))
        pos.append(strings(p))
        for f in feats:
            pairs += [strings(f.name), strings(f.value)]
        feat_off.append(len(pairs) // 2)
    header = _HEADER.pack(
        MAGIC,
        VERSION,
        0,
        index.tagset_digest,
        index.priority,
        index.entry_count,
        name_id,
        index.state_count,
        index.transition_count,
        len(index.payloads),
        len(pay_items),
        len(index.records),
        len(pairs) // 2,
        len(strings.items),
    )
    return b"".join(
        [
            header,
            _u32([len(alphabet)] + [ord(c) for c in alphabet]),
            _u32([len(graph)]),
            graph,
            _u32(pay_off),
            _u32(pay_items),
            _u32(strip),
            _u32(suffix),
            _u32(pos),
            _u32(feat_off),
            _u32(pairs),
            strings.encode(),
        ]
    )


def read_index(data: bytes) -> IndexedLexicon:
    if len(data) < _HEADER.size:
        raise IndexFormatError("truncated index header")
    (magic, version, _flags, digest, priority, count, name_id, n_states, n_trans, n_pay, n_items, n_rec, n_pairs, n_str) = (
        _HEADER.unpack_from(data, 0)
    )
    if magic != MAGIC:
        raise IndexFormatError("not an index file (bad magic)")
    if version != VERSION:
        raise IndexFormatError(f"unsupported index version {version}")
    pos = _HEADER.size

    def take(n, dtype="<u4"):
        nonlocal pos
        size = 4 * n
        if pos + size > len(data):
            raise IndexFormatError("truncated index")
        arr = np.frombuffer(data, dtype=dtype, count=n, offset=pos)
        pos += size
        return arr

    alphabet = [chr(c) for c in take(int(take(1)[0])).tolist()]
    size = int(take(1)[0])
    if pos + size > len(data):
        raise IndexFormatError("truncated graph stream")
    edges, finals = _decode_graph(data, pos, pos + size, n_states, alphabet)
    pos += size
    if sum(len(e) for e in edges) != n_trans:
        raise IndexFormatError("transition count mismatch")
    pay_off = take(n_pay + 1).tolist()
    pay_items = take(n_items).tolist()
    strip = take(n_rec).tolist()
    suffix = take(n_rec).tolist()
    rpos = take(n_rec).tolist()
    feat_off = take(n_rec + 1).tolist()
    pairs = take(2 * n_pairs).tolist()
    str_off = take(n_str + 1).tolist()
    blob = data[pos:]
    if len(blob) < str_off[-1]:
        raise IndexFormatError("truncated string pool")
    strings = [blob[str_off[i] : str_off[i + 1]].decode("utf-8") for i in range(n_str)]

    payloads = [tuple(pay_items[pay_off[i] : pay_off[i + 1]]) for i in range(n_pay)]
    records = []
    for r in range(n_rec):
        feats = tuple(
            Feature(strings[pairs[2 * k]], strings[pairs[2 * k + 1]]) for k in range(feat_off[r], feat_off[r + 1])
        )
        records.append((strip[r], strings[suffix[r]], strings[rpos[r]], feats))
    return IndexedLexicon(edges, finals, payloads, records, priority, strings[name_id], digest, count)
