"""Compiled grammars: one weighted deterministic automaton per graph.

Compilation turns each source graph into an automaton whose arcs carry an
input (a lexical mask, a call to another graph, or nothing), an optional
output string and an integer weight.  The pipeline is

    trim -> epsilon removal -> trim -> determinize -> minimize

where determinization treats the triple (input, output, weight) as an
opaque symbol, so the result accepts exactly the same weighted label
sequences as the source graph.  Only epsilons without output are removed;
output-bearing epsilons stay as real arcs because they emit text.
"""

from __future__ import annotations

import logging
import warnings
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

from ..model import LexicalMask
from .graph import EPSILON, Call, GrammarError, GrammarGraph, GraphSet, MaskList, check_graph_set

log = logging.getLogger(__name__)

Input = Union[LexicalMask, Call, None]


@dataclass(frozen=True)
class Arc:
    source: int
    target: int
    input: Input = None
    output: str | None = None
    weight: int = 0

    @property
    def symbol(self):
        return (self.input, self.output, self.weight)

    @property
    def is_epsilon(self) -> bool:
        return self.input is None


@dataclass(frozen=True)
class Automaton:
    name: str
    n_states: int
    initial: int
    arcs: tuple[Arc, ...]
    finals: Mapping[int, tuple[int, ...]]  # state -> final weights

    def outgoing(self) -> list[list[Arc]]:
        out: list[list[Arc]] = [[] for _ in range(self.n_states)]
        for a in self.arcs:
            out[a.source].append(a)
        return out

    def final_weight(self, state: int) -> int | None:
        ws = self.finals.get(state)
        return max(ws) if ws else None

    def calls(self) -> set[str]:
        return {a.input.graph for a in self.arcs if isinstance(a.input, Call)}

    def __eq__(self, other):
        if not isinstance(other, Automaton):
            return NotImplemented
        return (
            self.name == other.name
            and self.n_states == other.n_states
            and self.initial == other.initial
            and sorted(self.arcs, key=_arc_key) == sorted(other.arcs, key=_arc_key)
            and dict(self.finals) == dict(other.finals)
        )

    def __hash__(self):
        return hash((self.name, self.n_states, self.initial, len(self.arcs)))


@dataclass(frozen=True)
class WRTN:
    """Weighted recursive transition network: named automata plus an axiom."""

    axiom: str
    automata: Mapping[str, Automaton]
    approximated: bool = False
    flatten_depth: int | None = None

    def __getitem__(self, name: str) -> Automaton:
        return self.automata[name]

    def __eq__(self, other):
        if not isinstance(other, WRTN):
            return NotImplemented
        return (
            self.axiom == other.axiom
            and dict(self.automata) == dict(other.automata)
            and self.approximated == other.approximated
            and self.flatten_depth == other.flatten_depth
        )

    def __hash__(self):
        return hash((self.axiom, tuple(sorted(self.automata))))


def _input_key(x: Input) -> tuple:
    if x is None:
        return (0, "")
    if isinstance(x, Call):
        return (2, x.graph)
    return (1, str(x))


def _symbol_key(sym) -> tuple:
    inp, out, w = sym
    return (_input_key(inp), out is not None, out or "", w)


def _arc_key(a: Arc) -> tuple:
    return (a.source, _symbol_key(a.symbol), a.target)


# -- source graph -> raw automaton ----------------------------------------------


def graph_to_automaton(g: GrammarGraph) -> Automaton:
    """Direct translation: state 0 is a fresh initial state, node k is state k+1.

    Entering a node consumes its content, so an edge a->b of weight w becomes
    arcs from a to b labelled with b's content and output.
    """
    index = {n.id: k + 1 for k, n in enumerate(g.nodes)}
    nodes = {n.id: n for n in g.nodes}
    arcs: list[Arc] = []

    def enter(src: int, nid: str, weight: int):
        node = nodes[nid]
        c = node.content
        if isinstance(c, MaskList):
            for m in c.masks:
                arcs.append(Arc(src, index[nid], m, node.output, weight))
        elif isinstance(c, Call):
            arcs.append(Arc(src, index[nid], c, node.output, weight))
        else:
            arcs.append(Arc(src, index[nid], None, node.output, weight))

    enter(0, g.start, 0)
    for e in g.edges:
        enter(index[e.source], e.target, e.weight)
    return Automaton(g.name, len(g.nodes) + 1, 0, tuple(arcs), {index[g.end]: (0,)})


# -- elementary operations ----------------------------------------------------------


def trim(aut: Automaton) -> Automaton:
    """Keep states that are both accessible and co-accessible; renumber in BFS order."""
    out = aut.outgoing()
    acc = {aut.initial}
    stack = [aut.initial]
    while stack:
        s = stack.pop()
        for a in out[s]:
            if a.target not in acc:
                acc.add(a.target)
                stack.append(a.target)
    rev: dict[int, list[int]] = defaultdict(list)
    for a in aut.arcs:
        rev[a.target].append(a.source)
    coacc = set(aut.finals)
    stack = list(coacc)
    while stack:
        s = stack.pop()
        for p in rev[s]:
            if p not in coacc:
                coacc.add(p)
                stack.append(p)
    live = acc & coacc
    if aut.initial not in live:
        return Automaton(aut.name, 1, 0, (), {})
    return _renumber(aut, live)


def _renumber(aut: Automaton, live: set[int]) -> Automaton:
    out = aut.outgoing()
    order = {aut.initial: 0}
    queue = [aut.initial]
    for s in queue:
        for a in sorted(out[s], key=lambda a: _symbol_key(a.symbol)):
            if a.target in live and a.target not in order:
                order[a.target] = len(order)
                queue.append(a.target)
    arcs = tuple(
        sorted(
            (
                Arc(order[a.source], order[a.target], a.input, a.output, a.weight)
                for a in aut.arcs
                if a.source in order and a.target in order
            ),
            key=_arc_key,
        )
    )
    finals = {order[s]: w for s, w in aut.finals.items() if s in order}
    return Automaton(aut.name, len(order), 0, arcs, finals)


def _silent(a: Arc) -> bool:
    return a.input is None and a.output is None


def _sccs(n: int, succ: list[list[int]]) -> list[int]:
    """Tarjan, iterative; returns the component id of each node."""
    index = [-1] * n
    low = [0] * n
    on = [False] * n
    comp = [-1] * n
    stack: list[int] = []
    counter = 0
    ncomp = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, i = work.pop()
            if i == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on[v] = True
            if i < len(succ[v]):
                work.append((v, i + 1))
                w = succ[v][i]
                if index[w] == -1:
                    work.append((w, 0))
                elif on[w]:
                    low[v] = min(low[v], index[w])
                continue
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on[w] = False
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
    return comp


def remove_epsilons(aut: Automaton) -> Automaton:
    """Remove silent epsilon arcs (no input, no output), pushing weights forward.

    Path multiplicity is preserved between strongly connected groups of
    silent arcs; inside such a group every state reaches every other at
    weight 0 (a weighted silent cycle would give unbounded weights and is
    rejected).
    """
    n = aut.n_states
    succ: list[list[int]] = [[] for _ in range(n)]
    silent = [a for a in aut.arcs if _silent(a)]
    for a in silent:
        succ[a.source].append(a.target)
    comp = _sccs(n, succ)
    for a in silent:
        if comp[a.source] == comp[a.target] and a.weight != 0:
            raise GrammarError(f"graph {aut.name!r}: cycle of weighted epsilon transitions")
    members: dict[int, list[int]] = defaultdict(list)
    for s in range(n):
        members[comp[s]].append(s)
    # edges between components with multiplicity
    cedges: dict[int, Counter] = defaultdict(Counter)
    for a in silent:
        ca, cb = comp[a.source], comp[a.target]
        if ca != cb:
            cedges[ca][(cb, a.weight)] += 1
    # Tarjan numbers components in reverse topological order, so successors come first
    closure: dict[int, Counter] = {}
    for c in range(max(comp) + 1 if n else 0):
        acc: Counter = Counter({(s, 0): 1 for s in members[c]})
        for (d, w), mult in cedges[c].items():
            for (s, w2), m2 in closure[d].items():
                acc[(s, w + w2)] += mult * m2
        closure[c] = acc
    out = aut.outgoing()
    arcs: list[Arc] = []
    finals: dict[int, list[int]] = defaultdict(list)
    for p in range(n):
        for (q, w), mult in closure[comp[p]].items():
            for a in out[q]:
                if not _silent(a):
                    arcs.extend([Arc(p, a.target, a.input, a.output, a.weight + w)] * mult)
            for fw in aut.finals.get(q, ()):
                finals[p].extend([fw + w] * mult)
    return Automaton(aut.name, n, aut.initial, tuple(arcs), {s: tuple(sorted(ws)) for s, ws in finals.items()})


def determinize(aut: Automaton) -> Automaton:
    """Subset construction over opaque (input, output, weight) symbols."""
    out = aut.outgoing()
    start = frozenset([aut.initial])
    ids = {start: 0}
    queue = [start]
    arcs: list[Arc] = []
    finals: dict[int, tuple[int, ...]] = {}
    for subset in queue:
        sid = ids[subset]
        ws = sorted({w for s in subset for w in aut.finals.get(s, ())})
        if ws:
            finals[sid] = tuple(ws)
        moves: dict[tuple, set[int]] = defaultdict(set)
        for s in subset:
            for a in out[s]:
                moves[a.symbol].add(a.target)
        for sym in sorted(moves, key=_symbol_key):
            target = frozenset(moves[sym])
            tid = ids.get(target)
            if tid is None:
                tid = ids[target] = len(ids)
                queue.append(target)
            arcs.append(Arc(sid, tid, *sym))
    return Automaton(aut.name, len(ids), 0, tuple(arcs), finals)


def minimize(aut: Automaton) -> Automaton:
    """Moore partition refinement of a deterministic automaton.

    The initial partition separates states by their set of final weights.
    """
    n = aut.n_states
    out = aut.outgoing()
    block = [0] * n
    sigs: dict = {}
    for s in range(n):
        block[s] = sigs.setdefault(aut.finals.get(s), len(sigs))
    count = len(sigs)
    while True:
        sigs = {}
        new = [0] * n
        for s in range(n):
            moves = tuple(sorted((_symbol_key(a.symbol), block[a.target]) for a in out[s]))
            new[s] = sigs.setdefault((block[s], moves), len(sigs))
        block = new
        if len(sigs) == count:
            break
        count = len(sigs)
    arcs = {Arc(block[a.source], block[a.target], *a.symbol) for a in aut.arcs}
    finals = {block[s]: w for s, w in aut.finals.items()}
    merged = Automaton(aut.name, count, block[aut.initial], tuple(arcs), finals)
    return _renumber(merged, set(range(count)))


def is_deterministic(aut: Automaton) -> bool:
    seen = set()
    for a in aut.arcs:
        key = (a.source, a.symbol)
        if key in seen:
            return False
        seen.add(key)
    return True


def compile_automaton(aut: Automaton) -> Automaton:
    aut = trim(aut)
    aut = remove_epsilons(aut)
    aut = trim(aut)
    aut = determinize(aut)
    return minimize(aut)


# -- whole-network checks ---------------------------------------------------------------


def nullable_graphs(automata: Mapping[str, Automaton]) -> set[str]:
    """Graphs that accept the empty sequence (least fixpoint through calls)."""
    nullable: set[str] = set()
    changed = True
    while changed:
        changed = False
        for name, aut in automata.items():
            if name in nullable:
                continue
            if _reaches_final(aut, lambda a: a.input is None or (isinstance(a.input, Call) and a.input.graph in nullable)):
                nullable.add(name)
                changed = True
    return nullable


def _reaches_final(aut: Automaton, usable) -> bool:
    out = aut.outgoing()
    seen = {aut.initial}
    stack = [aut.initial]
    while stack:
        s = stack.pop()
        if s in aut.finals:
            return True
        for a in out[s]:
            if usable(a) and a.target not in seen:
                seen.add(a.target)
                stack.append(a.target)
    return False


def check_network(automata: Mapping[str, Automaton]) -> None:
    """Reject networks the parser cannot handle finitely.

    Two shapes are refused: a cycle of arcs that can all be crossed without
    consuming a token inside one graph, and a cycle of unit derivations
    (g derives h alone, ..., back to g), which would give one span
    infinitely many parses.  Ordinary left recursion is accepted.
    """
    nullable = nullable_graphs(automata)

    def silent_arc(a: Arc) -> bool:
        return a.input is None or (isinstance(a.input, Call) and a.input.graph in nullable)

    for name, aut in automata.items():
        succ: list[list[int]] = [[] for _ in range(aut.n_states)]
        for a in aut.arcs:
            if silent_arc(a):
                if a.source == a.target:
                    raise GrammarError(f"graph {name!r}: loop that consumes no token")
                succ[a.source].append(a.target)
        comp = _sccs(aut.n_states, succ)
        for a in aut.arcs:
            if silent_arc(a) and comp[a.source] == comp[a.target]:
                raise GrammarError(f"graph {name!r}: cycle that consumes no token")

    # g -> h when g can derive exactly one call to h with everything around it empty
    unit: dict[str, set[str]] = {}
    for name, aut in automata.items():
        out = aut.outgoing()
        head = {aut.initial}
        stack = [aut.initial]
        while stack:
            s = stack.pop()
            for a in out[s]:
                if silent_arc(a) and a.target not in head:
                    head.add(a.target)
                    stack.append(a.target)
        tail = set(aut.finals)
        changed = True
        while changed:
            changed = False
            for a in aut.arcs:
                if silent_arc(a) and a.target in tail and a.source not in tail:
                    tail.add(a.source)
                    changed = True
        unit[name] = {
            a.input.graph for a in aut.arcs if isinstance(a.input, Call) and a.source in head and a.target in tail
        }
    names = sorted(automata)
    pos = {n: k for k, n in enumerate(names)}
    succ = [[pos[h] for h in sorted(unit[n]) if h in pos] for n in names]
    comp = _sccs(len(names), succ)
    for k, n in enumerate(names):
        for h in succ[k]:
            if comp[h] == comp[k]:
                raise GrammarError(f"empty call cycle through {n!r} and {names[h]!r}")


def compile_grammar(graphs: GraphSet | Iterable[GrammarGraph], axiom: str | None = None) -> WRTN:
    """Compile every graph of a grammar into a :class:`WRTN`."""
    if not isinstance(graphs, GraphSet):
        graphs = list(graphs)
        graphs = GraphSet(axiom or graphs[0].name, {g.name: g for g in graphs})
    check_graph_set(graphs)
    automata = {g.name: compile_automaton(graph_to_automaton(g)) for g in graphs}
    check_network(automata)
    wrtn = WRTN(graphs.axiom, automata)
    if not automata[graphs.axiom].finals:
        warnings.warn(f"axiom {graphs.axiom!r} accepts nothing", stacklevel=2)
    return wrtn


def flatten(wrtn: WRTN, depth: int) -> WRTN:
    """Inline calls up to ``depth`` nested levels into a single automaton.

    Calls deeper than ``depth`` are dropped, so for recursive grammars the
    result recognizes a subset of the original language and is flagged
    ``approximated``.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    arcs: list[Arc] = []
    finals: dict[int, list[int]] = defaultdict(list)
    counter = [0]
    dropped = [False]

    def inline(name: str, level: int) -> tuple[int, dict[int, tuple[int, ...]]]:
        aut = wrtn.automata[name]
        base = counter[0]
        counter[0] += aut.n_states
        for a in aut.arcs:
            src, dst = base + a.source, base + a.target
            if isinstance(a.input, Call):
                if level >= depth:
                    dropped[0] = True
                    continue
                init, fins = inline(a.input.graph, level + 1)
                arcs.append(Arc(src, init, None, a.output, a.weight))
                for f, ws in fins.items():
                    for w in ws:
                        arcs.append(Arc(f, dst, None, None, w))
            else:
                arcs.append(Arc(src, dst, a.input, a.output, a.weight))
        return base + aut.initial, {base + s: ws for s, ws in aut.finals.items()}

    init, fins = inline(wrtn.axiom, 0)
    for s, ws in fins.items():
        finals[s].extend(ws)
    raw = Automaton(wrtn.axiom, counter[0], init, tuple(arcs), {s: tuple(ws) for s, ws in finals.items()})
    flat = compile_automaton(raw)
    check_network({wrtn.axiom: flat})
    if dropped[0]:
        log.info("flatten: calls deeper than %d were dropped", depth)
    return WRTN(wrtn.axiom, {wrtn.axiom: flat}, approximated=dropped[0], flatten_depth=depth)


def accepted_sequences(wrtn_or_aut, max_len: int, limit: int = 100000) -> set[tuple]:
    """(symbol sequence, weight) pairs of a call-free automaton, up to ``max_len`` arcs.

    Meant for small automata in tests and diagnostics.
    """
    aut = wrtn_or_aut[wrtn_or_aut.axiom] if isinstance(wrtn_or_aut, WRTN) else wrtn_or_aut
    out = aut.outgoing()
    result = set()
    stack = [(aut.initial, (), 0)]
    while stack:
        s, seq, w = stack.pop()
        for fw in aut.finals.get(s, ()):
            result.add((seq, w + fw))
        if len(seq) < max_len:
            for a in out[s]:
                stack.append((a.target, seq + ((a.input, a.output),), w + a.weight))
        if len(result) > limit:
            raise GrammarError("too many sequences")
    return result
