"""Source grammar graphs: boxes (nodes) linked by weighted edges."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping, Union

from ..model import LexicalMask


class GrammarError(ValueError):
    pass


@dataclass(frozen=True)
class Epsilon:
    def __str__(self):
        return "<E>"


EPSILON = Epsilon()


@dataclass(frozen=True)
class MaskList:
    """Disjunction of lexical masks."""

    masks: tuple[LexicalMask, ...]

    def __str__(self):
        return "|".join(str(m) for m in self.masks)


@dataclass(frozen=True)
class Call:
    graph: str

    def __str__(self):
        return ":" + self.graph


Content = Union[Epsilon, MaskList, Call]


@dataclass(frozen=True)
class Node:
    id: str
    content: Content = EPSILON
    output: str | None = None


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    weight: int = 0


@dataclass(frozen=True)
class GrammarGraph:
    name: str
    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    start: str
    end: str

    def node(self, nid: str) -> Node:
        for n in self.nodes:
            if n.id == nid:
                return n
        raise KeyError(nid)

    def calls(self) -> Iterator[str]:
        for n in self.nodes:
            if isinstance(n.content, Call):
                yield n.content.graph


@dataclass(frozen=True)
class GraphSet:
    """Named graphs plus the axiom (main graph)."""

    axiom: str
    graphs: Mapping[str, GrammarGraph]

    def __iter__(self):
        return iter(self.graphs.values())

    def __getitem__(self, name: str) -> GrammarGraph:
        return self.graphs[name]

    def __len__(self):
        return len(self.graphs)


def check_graph(g: GrammarGraph) -> None:
    ids = [n.id for n in g.nodes]
    if len(ids) != len(set(ids)):
        raise GrammarError(f"graph {g.name!r}: duplicate node ids")
    known = set(ids)
    for nid in (g.start, g.end):
        if nid not in known:
            raise GrammarError(f"graph {g.name!r}: unknown start/end node {nid!r}")
    for e in g.edges:
        if e.source not in known or e.target not in known:
            raise GrammarError(f"graph {g.name!r}: edge {e.source}->{e.target} references an unknown node")
        if e.target == g.start:
            raise GrammarError(f"graph {g.name!r}: the start node has an incoming edge")


def check_graph_set(graphs: GraphSet) -> None:
    if graphs.axiom not in graphs.graphs:
        raise GrammarError(f"axiom graph {graphs.axiom!r} is not defined")
    for g in graphs:
        check_graph(g)
        for callee in g.calls():
            if callee not in graphs.graphs:
                raise GrammarError(f"graph {g.name!r} calls undefined graph {callee!r}")
