"""Earley recognition of a compiled grammar over a sentence lattice.

Items are ``(graph, state, origin, position)`` where ``origin`` and
``position`` are lattice states.  Each item keeps every way it was reached
(back-pointers), which makes the item set a packed shared forest; weights
are computed afterwards as a longest-path over that acyclic structure.

Outputs hang on the arcs that produce them and are reported with the
lattice state at which the arc starts, so a caller can splice them back
into the text in path order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Iterator, Sequence

from .grammar.automaton import WRTN
from .grammar.graph import Call
from .lattice import SentenceAutomaton, TaggedText
from .model import Label, TagsetDefinition, mask_matches

ANCHORED = "anchored"
WHOLE = "whole"
ALL = "all"
BEST = "best-per-span"

_EPS, _MASK, _CALL = 0, 1, 2


@dataclass(frozen=True)
class EarleyItem:
    graph: str
    state: int
    origin: int
    position: int
    weight: int


@dataclass(frozen=True)
class Leaf:
    """One lattice transition consumed by a mask arc."""

    start: int
    end: int
    label: Label
    output: str | None = None


@dataclass(frozen=True)
class Emission:
    """Output of an arc that consumes nothing."""

    position: int
    output: str


@dataclass(frozen=True)
class Derivation:
    graph: str
    start: int
    end: int
    weight: int
    children: tuple = ()
    output: str | None = None  # output of the calling arc, if any

    def events(self) -> list[tuple[int, str]]:
        out = []
        stack: list = [self]
        while stack:
            node = stack.pop()
            if isinstance(node, Derivation):
                if node.output:
                    out.append((node.start, node.output))
                stack.extend(reversed(node.children))
            elif isinstance(node, Leaf):
                if node.output:
                    out.append((node.start, node.output))
            else:
                out.append((node.position, node.output))
        return out

    def leaves(self) -> list[Leaf]:
        out = []
        stack: list = [self]
        while stack:
            node = stack.pop()
            if isinstance(node, Derivation):
                stack.extend(reversed(node.children))
            elif isinstance(node, Leaf):
                out.append(node)
        return out


@dataclass(frozen=True)
class Match:
    sentence_id: str
    start: int  # lattice states
    end: int
    tokens: tuple[int, int]  # token index range within the sentence
    weight: int
    outputs: tuple[tuple[int, str], ...] = ()  # (token position, text) in path order
    tree: Derivation | None = None

    @property
    def output(self) -> str:
        return "".join(t for _, t in self.outputs)

    @property
    def empty(self) -> bool:
        return self.start == self.end


class _Net:
    """Arc tables of a WRTN, indexed for the parser."""

    def __init__(self, wrtn: WRTN):
        self.names = sorted(wrtn.automata)
        ids = {n: k for k, n in enumerate(self.names)}
        self.axiom = ids[wrtn.axiom]
        self.initial = []
        self.arcs = []
        self.final = []
        self.arc_list: list[tuple] = []
        for n in self.names:
            aut = wrtn.automata[n]
            table: list[list[tuple]] = [[] for _ in range(aut.n_states)]
            for a in aut.arcs:
                if a.input is None:
                    kind, payload = _EPS, None
                elif isinstance(a.input, Call):
                    kind, payload = _CALL, ids[a.input.graph]
                else:
                    kind, payload = _MASK, a.input
                arc = (kind, payload, a.target, a.weight, a.output, len(self.arc_list))
                self.arc_list.append(arc)
                table[a.source].append(arc)
            self.arcs.append(table)
            self.initial.append(aut.initial)
            self.final.append([aut.final_weight(s) for s in range(aut.n_states)])


def _net(wrtn: WRTN) -> _Net:
    net = wrtn.__dict__.get("_net")
    if net is None:
        net = _Net(wrtn)
        object.__setattr__(wrtn, "_net", net)
    return net


class WeightedParseForest:
    """Items and completed graph spans of one parse, with their back-pointers.

    Back-pointer shapes (per item)::

        ()                          start of a graph invocation
        (EPS, prev, arc)            epsilon arc
        (MASK, prev, arc, trans)    arc consuming a lattice transition
        (CALL, prev, arc, symbol)   arc whose sub-graph spans ``symbol``

    Arcs are ids into the network's arc list, transitions indexes into the
    sentence's transition tuple.

    A symbol ``(graph, origin, end)`` lists the final items that complete it.
    """

    def __init__(self, net: _Net, sentence: SentenceAutomaton, mode: str):
        self.net = net
        self.sentence = sentence
        self.mode = mode
        self.item_keys: list[tuple[int, int, int, int]] = []
        self.item_bps: list[set] = []
        self.symbol_keys: list[tuple[int, int, int]] = []
        self.symbol_alts: list[list[int]] = []
        self.roots: list[int] = []
        self._weights: dict | None = None

    # -- inspection --------------------------------------------------------------

    def __len__(self):
        return len(self.item_keys)

    def symbol(self, sid: int) -> tuple[str, int, int]:
        g, o, j = self.symbol_keys[sid]
        return self.net.names[g], o, j

    def items(self) -> list[EarleyItem]:
        """Every chart item with its best prefix weight, dead items included."""
        w = dict(self.weights())
        for node in self._order([("i", k) for k in range(len(self.item_keys))]):
            if node not in w:
                w[node] = self._local_best(node, w)
        return [
            EarleyItem(self.net.names[g], s, o, j, w[("i", k)]) for k, (g, s, o, j) in enumerate(self.item_keys)
        ]

    def root_spans(self) -> dict[tuple[int, int], int]:
        """Max weight per (start, end) over the roots."""
        w = self.weights()
        return {self.symbol_keys[r][1:]: w[("y", r)] for r in self.roots}

    # -- weights -----------------------------------------------------------------

    def _deps(self, node):
        kind, k = node
        if kind == "y":
            return [("i", f) for f in self.symbol_alts[k]]
        deps = []
        for bp in self.item_bps[k]:
            if bp:
                deps.append(("i", bp[1]))
                if bp[0] == _CALL:
                    deps.append(("y", bp[3]))
        return deps

    def _order(self, roots) -> list:
        """Post-order of the nodes reachable from ``roots`` (iterative DFS)."""
        done = set()
        active = set()
        order = []
        for r in roots:
            if r in done:
                continue
            stack = [(r, iter(self._deps(r)))]
            active.add(r)
            while stack:
                node, it = stack[-1]
                for d in it:
                    if d in done:
                        continue
                    if d in active:
                        raise RuntimeError("cyclic parse forest")
                    active.add(d)
                    stack.append((d, iter(self._deps(d))))
                    break
                else:
                    stack.pop()
                    active.discard(node)
                    done.add(node)
                    order.append(node)
        return order

    def weights(self) -> dict:
        if self._weights is None:
            w: dict = {}
            roots = [("y", r) for r in self.roots]
            for node in self._order(roots):
                w[node] = self._local_best(node, w)
            self._weights = w
        return self._weights

    def _final_weight(self, item: int) -> int:
        g, s, _, _ = self.item_keys[item]
        return self.net.final[g][s]

    def _local_best(self, node, w) -> int:
        kind, k = node
        if kind == "y":
            return max(w[("i", f)] + self._final_weight(f) for f in self.symbol_alts[k])
        best = None
        for bp in self.item_bps[k]:
            v = self._bp_weight(bp, w)
            if best is None or v > best:
                best = v
        return best

    def _bp_weight(self, bp, w) -> int:
        if not bp:
            return 0
        v = w[("i", bp[1])] + self.net.arc_list[bp[2]][3]
        if bp[0] == _CALL:
            v += w[("y", bp[3])]
        return v

    # -- trees -------------------------------------------------------------------

    def _step(self, bp, children: tuple, sub=None) -> tuple:
        kind = bp[0]
        out = self.net.arc_list[bp[2]][4]
        j = self.item_keys[bp[1]][3]
        if kind == _EPS:
            return children + ((Emission(j, out),) if out else ())
        if kind == _MASK:
            t = self.sentence.transitions[bp[3]]
            return children + (Leaf(t.source, t.target, t.label, out),)
        return children + (replace(sub, output=out),)

    def trees(self, root: int, limit: int | None = None) -> Iterator[Derivation]:
        """Every derivation of a root symbol (lazy; may be exponential)."""
        gen = self._symbol_trees(root)
        return itertools.islice(gen, limit) if limit is not None else gen

    def _symbol_trees(self, sid: int) -> Iterator[Derivation]:
        g, o, j = self.symbol_keys[sid]
        for f in self.symbol_alts[sid]:
            fw = self._final_weight(f)
            for children, w in self._item_trees(f):
                yield Derivation(self.net.names[g], o, j, w + fw, children)

    def _item_trees(self, k: int) -> Iterator[tuple[tuple, int]]:
        for bp in sorted(self.item_bps[k]):
            if not bp:
                yield (), 0
                continue
            for children, w in self._item_trees(bp[1]):
                if bp[0] == _CALL:
                    for sub in self._symbol_trees(bp[3]):
                        yield self._step(bp, children, sub), w + self.net.arc_list[bp[2]][3] + sub.weight
                else:
                    yield self._step(bp, children), w + self.net.arc_list[bp[2]][3]

    def best(self, root: int, cap: int = 256) -> list[Derivation]:
        """Maximum-weight derivations of a root, one per distinct output sequence."""
        w = self.weights()
        memo: dict = {}
        for node in self._order([("y", root)]):
            memo[node] = self._best_node(node, w, memo, cap)
        return list(memo[("y", root)].values())

    def _best_node(self, node, w, memo, cap) -> dict:
        kind, k = node
        target = w[node]
        out: dict = {}
        if kind == "y":
            g, o, j = self.symbol_keys[k]
            for f in self.symbol_alts[k]:
                fw = self._final_weight(f)
                if w[("i", f)] + fw != target:
                    continue
                for key, children in memo[("i", f)].items():
                    if key not in out and len(out) < cap:
                        out[key] = Derivation(self.net.names[g], o, j, target, children)
            return out
        for bp in sorted(self.item_bps[k]):
            if self._bp_weight(bp, w) != target:
                continue
            if not bp:
                out.setdefault((), ())
                continue
            for key, children in memo[("i", bp[1])].items():
                if bp[0] == _CALL:
                    for sub in memo[("y", bp[3])].values():
                        child = self._step(bp, children, sub)
                        nk = key + tuple(child[-1].events())
                        if nk not in out and len(out) < cap:
                            out[nk] = child
                else:
                    text = self.net.arc_list[bp[2]][4]
                    nk = key + ((self.item_keys[bp[1]][3], text),) if text else key
                    if nk not in out and len(out) < cap:
                        out[nk] = self._step(bp, children)
        return out


def parse(
    wrtn: WRTN,
    sentence: SentenceAutomaton,
    mode: str = ANCHORED,
    tagset: TagsetDefinition | None = None,
) -> WeightedParseForest:
    """Run the Earley recognizer; ``mode`` is ``anchored`` (every start state) or ``whole``."""
    if mode not in (ANCHORED, WHOLE):
        raise ValueError(f"unknown mode {mode!r}")
    net = _net(wrtn)
    forest = WeightedParseForest(net, sentence, mode)
    keys, bps = forest.item_keys, forest.item_bps
    sym_keys, sym_alts = forest.symbol_keys, forest.symbol_alts
    index: dict[tuple, int] = {}
    sym_index: dict[tuple, int] = {}
    agendas: dict[int, list[int]] = {}
    waiting: dict[tuple[int, int], list[tuple[int, tuple]]] = {}
    empty_done: dict[tuple[int, int], list[int]] = {}  # (graph, state) -> symbols spanning nothing
    match_cache: dict[tuple[int, int], bool] = {}
    out_trans: dict[int, list] = {s.id: [] for s in sentence.states}
    for n, tr in enumerate(sentence.transitions):
        out_trans[tr.source].append((n, tr))

    def add(key, bp):
        k = index.get(key)
        if k is None:
            k = index[key] = len(keys)
            keys.append(key)
            bps.append({bp})
            agendas.setdefault(key[3], []).append(k)
        else:
            bps[k].add(bp)

    def matches(mask, label) -> bool:
        ck = (id(mask), id(label))
        r = match_cache.get(ck)
        if r is None:
            r = match_cache[ck] = mask_matches(mask, label, tagset)
        return r

    order = sentence.topological_order()
    seeds = order if mode == ANCHORED else [sentence.initial]
    seed_set = set(seeds)
    ax = net.axiom
    for j in order:
        if j in seed_set:
            add((ax, net.initial[ax], j, j), ())
        agenda = agendas.get(j, [])
        i = 0
        while i < len(agenda):
            it = agenda[i]
            i += 1
            g, s, o, _ = keys[it]
            for arc in net.arcs[g][s]:
                kind, payload, t = arc[0], arc[1], arc[2]
                if kind == _MASK:
                    for n, tr in out_trans[j]:
                        if matches(payload, tr.label):
                            add((g, t, o, tr.target), (_MASK, it, arc[5], n))
                elif kind == _EPS:
                    add((g, t, o, j), (_EPS, it, arc[5]))
                else:
                    wl = waiting.setdefault((payload, j), [])
                    wl.append((it, arc))
                    add((payload, net.initial[payload], j, j), ())
                    for sid in empty_done.get((payload, j), ()):
                        add((g, t, o, j), (_CALL, it, arc[5], sid))
            if net.final[g][s] is not None:
                skey = (g, o, j)
                sid = sym_index.get(skey)
                if sid is None:
                    sid = sym_index[skey] = len(sym_keys)
                    sym_keys.append(skey)
                    sym_alts.append([it])
                    if o == j:
                        empty_done.setdefault((g, j), []).append(sid)
                    for caller, carc in waiting.get((g, o), ()):
                        cg, _, co, _ = keys[caller]
                        add((cg, carc[2], co, j), (_CALL, caller, carc[5], sid))
                    if g == ax and (mode == ANCHORED or (o == sentence.initial and j == sentence.final)):
                        forest.roots.append(sid)
                elif it not in sym_alts[sid]:
                    sym_alts[sid].append(it)
    return forest


def enumerate_matches(forest: WeightedParseForest, policy: str = BEST, limit: int | None = None) -> list[Match]:
    """Matches of a forest; ``all`` lists every derivation, ``best-per-span`` the heaviest ones."""
    if policy not in (ALL, BEST):
        raise ValueError(f"unknown policy {policy!r}")
    sent = forest.sentence
    pos = {s.id: s.position for s in sent.states}
    out = []
    for root in forest.roots:
        _, o, j = forest.symbol(root)
        trees = forest.best(root) if policy == BEST else forest.trees(root)
        for tree in trees:
            out.append(
                Match(
                    sent.sentence_id,
                    o,
                    j,
                    (pos[o], pos[j]),
                    tree.weight,
                    tuple((pos[p], text) for p, text in tree.events()),
                    tree,
                )
            )
            if limit is not None and len(out) >= limit:
                break
        if limit is not None and len(out) >= limit:
            break
    out.sort(key=lambda m: (m.tokens[0], m.tokens[1], -m.weight, m.output))
    return out


def locate(
    tagged: TaggedText | Sequence[SentenceAutomaton],
    wrtn: WRTN,
    mode: str = ANCHORED,
    policy: str = BEST,
    tagset: TagsetDefinition | None = None,
) -> list[Match]:
    """Parse every sentence and collect matches in text order."""
    sentences = tagged.sentences if isinstance(tagged, TaggedText) else tagged
    matches = []
    for aut in sentences:
        matches.extend(enumerate_matches(parse(wrtn, aut, mode, tagset), policy))
    return matches
