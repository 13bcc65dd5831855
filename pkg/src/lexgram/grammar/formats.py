"""Grammar documents.

Source grammars are XML::

    <grammar axiom="NP">
      <graph name="NP" start="0" end="1">
        <node id="0"/>
        <node id="1"/>
        <node id="2" mask="&lt;determiner&gt;"/>
        <node id="3" mask="&lt;noun&gt;|&lt;adjective&gt;" output="[NP]"/>
        <node id="4" call="Date"/>
        <edge from="0" to="2" weight="1"/>
        ...
      </graph>
    </grammar>

Compiled networks (``<wrtn>``) list the arcs of each automaton.  A plain
text box format close to the classic ``.grf`` layout is also supported for
exchange with graph editors; it has no weights.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET

from .. import _xml
from ..lattice import dot_quote
from ..model import MaskSyntaxError, parse_mask, split_masks
from .automaton import WRTN, Arc, Automaton
from .graph import EPSILON, Call, Content, Edge, GrammarError, GrammarGraph, GraphSet, MaskList, Node, check_graph_set


def _content_from(doc, e) -> Content:
    mask, call = e.get("mask"), e.get("call")
    if mask is not None and call is not None:
        raise doc.error(e, "a node cannot both match and call")
    if call is not None:
        if not call:
            raise doc.error(e, "empty call")
        return Call(call)
    if mask is not None:
        try:
            masks = tuple(parse_mask(m) for m in split_masks(mask))
        except MaskSyntaxError as exc:
            raise doc.error(e, str(exc)) from None
        if not masks:
            raise doc.error(e, "empty mask list")
        return MaskList(masks)
    return EPSILON


def _weight(doc, e) -> int:
    try:
        return int(e.get("weight", "0"))
    except ValueError:
        raise doc.error(e, "weight must be an integer") from None


def read_grammar(document: str | bytes) -> GraphSet:
    doc = _xml.parse(document)
    root = doc.root
    graph_elems = [root] if root.tag == "graph" else list(root)
    if root.tag not in ("grammar", "graph"):
        raise doc.error(root, f"expected <grammar>, got <{root.tag}>")
    graphs: dict[str, GrammarGraph] = {}
    for ge in graph_elems:
        if ge.tag != "graph":
            raise doc.error(ge, f"unexpected <{ge.tag}>")
        name = ge.get("name")
        if not name:
            raise doc.error(ge, "graph without name")
        if name in graphs:
            raise doc.error(ge, f"duplicate graph {name!r}")
        nodes, edges = [], []
        start, end = ge.get("start"), ge.get("end")
        ids: set[str] = set()
        for e in ge:
            if e.tag == "node":
                nid = e.get("id")
                if nid is None:
                    raise doc.error(e, "node without id")
                if nid in ids:
                    raise doc.error(e, f"duplicate node {nid!r}")
                ids.add(nid)
                nodes.append(Node(nid, _content_from(doc, e), e.get("output")))
            elif e.tag == "edge":
                edges.append((e, Edge(e.get("from"), e.get("to"), _weight(doc, e))))
            else:
                raise doc.error(e, f"unexpected <{e.tag}> in graph")
        for e, edge in edges:
            if edge.source not in ids or edge.target not in ids:
                raise doc.error(e, f"edge references unknown node ({edge.source} -> {edge.target})")
        if start not in ids or end not in ids:
            raise doc.error(ge, "graph needs start and end attributes naming existing nodes")
        graphs[name] = GrammarGraph(name, tuple(nodes), tuple(ed for _, ed in edges), start, end)
    if not graphs:
        raise doc.error(root, "no graph")
    axiom = root.get("axiom") or next(iter(graphs))
    if axiom not in graphs:
        raise doc.error(root, f"axiom {axiom!r} is not defined")
    gs = GraphSet(axiom, graphs)
    try:
        check_graph_set(gs)
    except GrammarError as exc:
        raise _xml.XMLFormatError(str(exc), None) from None
    return gs


def write_grammar(graphs: GraphSet) -> str:
    root = ET.Element("grammar", axiom=graphs.axiom)
    for g in graphs:
        ge = ET.SubElement(root, "graph", name=g.name, start=g.start, end=g.end)
        for n in g.nodes:
            ne = ET.SubElement(ge, "node", id=n.id)
            if isinstance(n.content, MaskList):
                ne.set("mask", str(n.content))
            elif isinstance(n.content, Call):
                ne.set("call", n.content.graph)
            if n.output is not None:
                ne.set("output", n.output)
        for e in g.edges:
            ee = ET.SubElement(ge, "edge", {"from": e.source, "to": e.target})
            if e.weight:
                ee.set("weight", str(e.weight))
    return _xml.tostring(root)


# -- compiled networks -------------------------------------------------------------


def write_wrtn(wrtn: WRTN) -> str:
    root = ET.Element("wrtn", axiom=wrtn.axiom, approximated="yes" if wrtn.approximated else "no")
    if wrtn.flatten_depth is not None:
        root.set("depth", str(wrtn.flatten_depth))
    for name in sorted(wrtn.automata):
        aut = wrtn.automata[name]
        ae = ET.SubElement(root, "automaton", name=name, states=str(aut.n_states), initial=str(aut.initial))
        for s in sorted(aut.finals):
            ET.SubElement(ae, "final", state=str(s), weights=" ".join(map(str, aut.finals[s])))
        for a in sorted(aut.arcs, key=lambda a: (a.source, a.target, str(a.input), a.output or "", a.weight)):
            attrs = {"from": str(a.source), "to": str(a.target)}
            if isinstance(a.input, Call):
                attrs["call"] = a.input.graph
            elif a.input is not None:
                attrs["in"] = str(a.input)
            if a.output is not None:
                attrs["out"] = a.output
            if a.weight:
                attrs["w"] = str(a.weight)
            ET.SubElement(ae, "arc", attrs)
    return _xml.tostring(root)


def read_wrtn(document: str | bytes) -> WRTN:
    doc = _xml.parse(document)
    root = doc.root
    if root.tag != "wrtn":
        raise doc.error(root, f"expected <wrtn>, got <{root.tag}>")

    def num(e, name, default=None):
        v = e.get(name)
        if v is None and default is not None:
            return default
        try:
            return int(v)
        except (TypeError, ValueError):
            raise doc.error(e, f"attribute {name!r} must be an integer") from None

    automata = {}
    for ae in root:
        if ae.tag != "automaton":
            raise doc.error(ae, f"unexpected <{ae.tag}>")
        n = num(ae, "states")
        arcs, finals = [], {}
        for e in ae:
            if e.tag == "final":
                s = num(e, "state")
                finals[s] = tuple(int(w) for w in (e.get("weights") or "0").split())
            elif e.tag == "arc":
                src, dst = num(e, "from"), num(e, "to")
                if not (0 <= src < n and 0 <= dst < n):
                    raise doc.error(e, "arc references a state out of range")
                inp = None
                if e.get("call") is not None:
                    inp = Call(e.get("call"))
                elif e.get("in") is not None:
                    try:
                        inp = parse_mask(e.get("in"))
                    except MaskSyntaxError as exc:
                        raise doc.error(e, str(exc)) from None
                arcs.append(Arc(src, dst, inp, e.get("out"), num(e, "w", 0)))
            else:
                raise doc.error(e, f"unexpected <{e.tag}>")
        name = ae.get("name")
        automata[name] = Automaton(name, n, num(ae, "initial", 0), tuple(arcs), finals)
    axiom = root.get("axiom")
    if axiom not in automata:
        raise doc.error(root, f"axiom {axiom!r} is not defined")
    for name, aut in automata.items():
        for callee in aut.calls():
            if callee not in automata:
                raise _xml.XMLFormatError(f"graph {name!r} calls undefined graph {callee!r}", None)
    depth = root.get("depth")
    return WRTN(axiom, automata, root.get("approximated") == "yes", int(depth) if depth is not None else None)


# -- grf-like boxes ------------------------------------------------------------------
#
#   #Unigraph
#   N
#   "content/output" x y nsucc succ1 succ2 ...
#
# Box 0 is the start box and box 1 the end box.  Content is "<E>" for an
# empty box, ":name" for a call, or masks joined with "+".

_GRF_BOX = re.compile(r'^"((?:[^"\\]|\\.)*)"\s+(-?\d+)\s+(-?\d+)\s+(\d+)((?:\s+\d+)*)\s*$')


def _grf_escape(s: str) -> str:
    return re.sub(r'([\\"+/])', r"\\\1", s)


def _grf_split(s: str, sep: str) -> list[str]:
    out, cur, i = [], [], 0
    while i < len(s):
        c = s[i]
        if c == "\\" and i + 1 < len(s):
            cur.append(s[i : i + 2])
            i += 2
            continue
        if c == sep:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(c)
        i += 1
    out.append("".join(cur))
    return out


def _grf_unescape(s: str) -> str:
    return re.sub(r'\\([\\"+/])', r"\1", s)


def _box_text(node: Node) -> str:
    c = node.content
    if isinstance(c, MaskList):
        body = "+".join(_grf_escape(str(m)) for m in c.masks)
    elif isinstance(c, Call):
        body = ":" + _grf_escape(c.graph)
    else:
        body = "<E>"
    if node.output is not None:
        body += "/" + _grf_escape(node.output)
    return body


def graph_to_grf(g: GrammarGraph) -> str:
    order = [g.start, g.end] + [n.id for n in g.nodes if n.id not in (g.start, g.end)]
    box = {nid: k for k, nid in enumerate(order)}
    succ: dict[str, list[int]] = {nid: [] for nid in order}
    for e in g.edges:
        succ[e.source].append(box[e.target])
    lines = ["#Unigraph", str(len(order))]
    for k, nid in enumerate(order):
        node = g.node(nid)
        text = "" if nid == g.end and node.content is EPSILON and node.output is None else _box_text(node)
        targets = "".join(f" {t}" for t in succ[nid])
        lines.append(f'"{text}" {100 + 120 * k} 100 {len(succ[nid])}{targets}')
    return "\n".join(lines) + "\n"


def grf_to_graph(text: str, name: str) -> GrammarGraph:
    lines = [ln for ln in text.splitlines()]
    try:
        k = lines.index("#") + 1  # classic header ends with a lone '#'
    except ValueError:
        k = 1 if lines and lines[0].startswith("#") else 0
    try:
        count = int(lines[k].strip())
    except (IndexError, ValueError):
        raise GrammarError(f"{name}: missing box count") from None
    nodes, edges = [], []
    for b in range(count):
        ln = lines[k + 1 + b] if k + 1 + b < len(lines) else ""
        m = _GRF_BOX.match(ln)
        if not m:
            raise GrammarError(f"{name}: malformed box line {k + 2 + b}: {ln!r}")
        raw, nsucc, rest = m.group(1), int(m.group(4)), m.group(5).split()
        if len(rest) != nsucc:
            raise GrammarError(f"{name}: box {b} announces {nsucc} successors, lists {len(rest)}")
        parts = _grf_split(raw, "/")
        body = parts[0]
        output = _grf_unescape("/".join(parts[1:])) if len(parts) > 1 else None
        if body in ("", "<E>"):
            content: Content = EPSILON
        elif body.startswith(":"):
            content = Call(_grf_unescape(body[1:]))
        else:
            try:
                content = MaskList(tuple(parse_mask(_grf_unescape(p)) for p in _grf_split(body, "+")))
            except MaskSyntaxError as exc:
                raise GrammarError(f"{name}: box {b}: {exc}") from None
        nodes.append(Node(str(b), content, output))
        for t in rest:
            if int(t) >= count:
                raise GrammarError(f"{name}: box {b} points to missing box {t}")
            edges.append(Edge(str(b), t, 0))
    if count < 2:
        raise GrammarError(f"{name}: a graph needs at least a start and an end box")
    return GrammarGraph(name, tuple(nodes), tuple(edges), "0", "1")


# -- dot ------------------------------------------------------------------------------


def graph_to_dot(g: GrammarGraph) -> str:
    lines = [f"digraph {dot_quote(g.name)} {{", "  rankdir=LR;", "  node [shape=box];"]
    for n in g.nodes:
        attrs = [f"label={dot_quote(_box_text(n))}"]
        if n.id == g.start:
            attrs.append('shape="circle"')
        elif n.id == g.end:
            attrs.append('shape="doublecircle"')
        lines.append(f"  {dot_quote(n.id)} [{', '.join(attrs)}];")
    for e in g.edges:
        lines.append(f"  {dot_quote(e.source)} -> {dot_quote(e.target)} [label={dot_quote(str(e.weight))}, weight_value={e.weight}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def automaton_to_dot(aut: Automaton) -> str:
    lines = [f"digraph {dot_quote(aut.name)} {{", "  rankdir=LR;", "  node [shape=circle];"]
    for s in range(aut.n_states):
        attrs = [f"label={dot_quote(str(s))}"]
        if s in aut.finals:
            attrs.append('shape="doublecircle"')
            attrs.append(f"final_weights={dot_quote(' '.join(map(str, aut.finals[s])))}")
        lines.append(f"  {s} [{', '.join(attrs)}];")
    for a in aut.arcs:
        text = "<E>" if a.input is None else str(a.input)
        if a.output is not None:
            text += "/" + a.output
        lines.append(f"  {a.source} -> {a.target} [label={dot_quote(text)}, weight_value={a.weight}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def wrtn_to_dot(wrtn: WRTN) -> str:
    return "".join(automaton_to_dot(wrtn.automata[n]) for n in sorted(wrtn.automata))
