"""
Local grammars: locate, annotate, enrich
========================================

A noun-phrase grammar is compiled to a network of deterministic automata and
run over the text automaton.  The matches feed a concordance and a bracketed
copy of the text.  A second grammar adds its outputs back into the lattice as
marks, so a later pass can build on what an earlier one found.
"""

from pathlib import Path

from lexgram import (
    LookupOptions,
    OutputMark,
    apply_automaton,
    apply_text,
    build_index,
    compile_grammar,
    concord,
    concordance_tsv,
    locate,
    parse_dela,
    parse_tagset,
    read_grammar,
    segment,
    select_matches,
    tag,
)

DATA = Path(__file__).resolve().parents[1] / "tests" / "data"

tagset = parse_tagset((DATA / "tagset_fr.xml").read_text(encoding="utf-8"))
lexicon = build_index(parse_dela((DATA / "lexicon_fr.dic").read_text(encoding="utf-8")), tagset=tagset)
text = segment("La police a saisi 164 procès-verbaux jeudi dernier.\n")
tagged = tag(text, [lexicon], LookupOptions(fold_case=True))

np_net = compile_grammar(read_grammar((DATA / "np.grammar.xml").read_text(encoding="utf-8")))
matches = locate(tagged, np_net, tagset=tagset)
for m in matches:
    print(m.tokens, m.weight, m.output)

print(concordance_tsv(concord(matches, text, 2, 2)))
print(apply_text(text, select_matches(matches, "prefer-longest")))

# "jeudi dernier" becomes TIME; on the next pass a TIME mark becomes DATE
time_grammar = read_grammar(
    """<grammar axiom="T"><graph name="T" start="s" end="e">
    <node id="s"/><node id="e"/>
    <node id="day" mask="&lt;lemma=jeudi&gt;"/>
    <node id="last" mask="&lt;lemma=dernier&gt;" output="TIME"/>
    <node id="mark" mask="&lt;form=TIME&gt;" output="DATE"/>
    <edge from="s" to="day"/><edge from="day" to="last"/><edge from="last" to="e"/>
    <edge from="s" to="mark"/><edge from="mark" to="e"/>
    </graph></grammar>"""
)
net = compile_grammar(time_grammar)
for n in (1, 2):
    enriched = apply_automaton(tagged, net, iterations=n, tagset=tagset)
    marks = [t for t in enriched.sentences[0].transitions if isinstance(t.label, OutputMark)]
    print(n, [(t.source, t.target, t.label.text) for t in marks])
