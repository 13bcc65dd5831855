"""
From raw text to a text automaton
=================================

Segment a sentence, look its words up in a small dictionary and build the
lattice of lexical analyses.  Ambiguity stays in the lattice: "procès" gets
two analyses and the compound "procès-verbaux" spans three tokens.
"""

from pathlib import Path

from lexgram import LookupOptions, build_index, parse_dela, parse_tagset, segment, tag, write_seg

DATA = Path(__file__).resolve().parents[1] / "tests" / "data"

text = segment("La police a saisi 164 procès-verbaux jeudi dernier.\n")
print(write_seg(text))

# the tagset maps DELA codes (N, :mp, +hum) onto named features
tagset = parse_tagset((DATA / "tagset_fr.xml").read_text(encoding="utf-8"))
lexicon = build_index(parse_dela((DATA / "lexicon_fr.dic").read_text(encoding="utf-8")), tagset=tagset)
print(lexicon.state_count, "states for", len(lexicon.forms()), "forms")

# without case folding the capitalized "La" stays unknown
for fold in (False, True):
    tagged = tag(text, [lexicon], LookupOptions(fold_case=fold))
    s = tagged.stats
    print(f"fold_case={fold}: {s.unknown} unknown of {s.tokens} words")

[lattice] = tagged.sentences
for t in sorted(lattice.transitions, key=lambda t: (t.source, t.target)):
    print(t.source, "->", t.target, t.label)
