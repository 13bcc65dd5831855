"""Lexicon formats, inflection, indexing and lookup."""

from .dela import DelaError, LexiconEntry, expand, parse_dela, write_dela
from .dicxml import dela_to_xml, xml_to_dela
from .index import (
    EXACT,
    IndexedLexicon,
    IndexFormatError,
    LookupOptions,
    build_index,
    lookup,
    lookup_multi,
    minimize,
    read_index,
    write_index,
)
from .inflection import InflectionError, InflectionParadigm, LemmaEntry, ParadigmSet, inflect, parse_lemmas, parse_paradigms

__all__ = [
    "DelaError",
    "EXACT",
    "IndexFormatError",
    "IndexedLexicon",
    "InflectionError",
    "InflectionParadigm",
    "LemmaEntry",
    "LexiconEntry",
    "LookupOptions",
    "ParadigmSet",
    "build_index",
    "dela_to_xml",
    "expand",
    "inflect",
    "lookup",
    "lookup_multi",
    "minimize",
    "parse_dela",
    "parse_lemmas",
    "parse_paradigms",
    "read_index",
    "write_dela",
    "write_index",
    "xml_to_dela",
]
