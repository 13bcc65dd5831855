"""
Inflecting lemmas and compiling the forms
=========================================

Paradigms turn a list of lemmas into inflected DELA lines; the lines are
compiled into a minimal acyclic automaton and written to a compact binary
index that is read back for lookup.
"""

import random
from pathlib import Path

from lexgram.lexicon import (
    build_index,
    inflect,
    parse_lemmas,
    parse_paradigms,
    read_index,
    write_dela,
    write_index,
)
from lexgram.lexicon.dela import LexiconEntry

DATA = Path(__file__).resolve().parents[1] / "tests" / "data"

paradigms = parse_paradigms((DATA / "carry.paradigm.xml").read_text(encoding="utf-8"))
entries = inflect(parse_lemmas("carry.V:4\nmarry.V:4\nbury.V:4\n"), paradigms)
print(write_dela(entries))

ix = build_index(entries)
print(ix.forms())

# shared suffixes collapse: compare the state count with a plain letter trie
trie = {w[:k] for w in ix.forms() for k in range(len(w) + 1)}
print(f"{ix.state_count} states, trie would need {len(trie)}")

# a bigger random lexicon, to see the on-disk size next to the DELA text
rng = random.Random(0)
words = {"".join(rng.choice("abcdefghijklmnop") for _ in range(rng.randint(3, 9))) for _ in range(20000)}
big = [LexiconEntry(w, w, "N", (), ("ms",)) for w in sorted(words)]
data = write_index(build_index(big))
print(f"{len(big)} forms: DELA {len(write_dela(big).encode())} bytes, index {len(data)} bytes")

back = read_index(data)
print(back.lookup(big[100].form))
