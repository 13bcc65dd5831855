"""Segmentation, lexical tagging and weighted local grammars over text automata."""

from .apps import (
    ConcordanceLine,
    RewritePlan,
    apply_automaton,
    apply_text,
    concord,
    concordance_html,
    concordance_tsv,
    select_matches,
)
from .grammar import WRTN, GrammarGraph, GraphSet, compile_grammar, flatten, load_grammar, read_grammar, read_wrtn
from .lattice import SentenceAutomaton, TaggedText, UnknownStats, export_dot, read_fsa, tag, write_fsa
from .lexicon import IndexedLexicon, LookupOptions, build_index, lookup, lookup_multi, parse_dela
from .model import LexicalAnalysis, LexicalMask, OutputMark, TagsetDefinition, Token, UnknownToken, parse_mask, parse_tagset
from .parser import Match, WeightedParseForest, enumerate_matches, locate, parse
from .segmenter import SegmentedText, read_seg, segment, write_seg

__version__ = "0.1.0"
