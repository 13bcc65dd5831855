from .automaton import (
    WRTN,
    Arc,
    Automaton,
    accepted_sequences,
    check_network,
    compile_automaton,
    compile_grammar,
    determinize,
    flatten,
    graph_to_automaton,
    is_deterministic,
    minimize,
    nullable_graphs,
    remove_epsilons,
    trim,
)
from .formats import (
    automaton_to_dot,
    graph_to_dot,
    graph_to_grf,
    grf_to_graph,
    read_grammar,
    read_wrtn,
    write_grammar,
    write_wrtn,
    wrtn_to_dot,
)
from .graph import EPSILON, Call, Edge, Epsilon, GrammarError, GrammarGraph, GraphSet, MaskList, Node, check_graph_set


def load_grammar(path) -> GraphSet:
    """Read a grammar from an XML document or a ``.grf`` box file."""
    from pathlib import Path

    p = Path(path)
    data = p.read_text(encoding="utf-8")
    if p.suffix == ".grf":
        g = grf_to_graph(data, p.stem)
        return GraphSet(g.name, {g.name: g})
    return read_grammar(data)


__all__ = [
    "WRTN", "Arc", "Automaton", "accepted_sequences", "check_network", "compile_automaton", "compile_grammar",
    "determinize", "flatten", "graph_to_automaton", "is_deterministic", "minimize", "nullable_graphs",
    "remove_epsilons", "trim", "automaton_to_dot", "graph_to_dot", "graph_to_grf", "grf_to_graph",
    "read_grammar", "read_wrtn", "write_grammar", "write_wrtn", "wrtn_to_dot", "EPSILON", "Call", "Edge",
    "Epsilon", "GrammarError", "GrammarGraph", "GraphSet", "MaskList", "Node", "check_graph_set", "load_grammar",
]
