"""What to do with matches: concordances, rewritten text, enriched lattices."""

from __future__ import annotations

import html
from dataclasses import dataclass
from typing import Iterable, Sequence

from .grammar.automaton import WRTN
from .lattice import TaggedText, Transition, add_transitions
from .model import OutputMark, TagsetDefinition, Token
from .parser import ANCHORED, BEST, Match, enumerate_matches, parse
from .segmenter import SegmentedText, _pieces

TEXT_ORDER = "text"
LEXICOGRAPHIC = "lex"
INSERT = "insert"
REPLACE = "replace"


@dataclass(frozen=True)
class ConcordanceLine:
    left: str
    segment: str
    right: str
    sentence_id: str
    tokens: tuple[int, int]  # index range in the document token stream
    weight: int = 0


def _flat(s: str) -> str:
    return " ".join(s.split()) if ("\n" in s or "\t" in s or "\r" in s) else s


def _join(stream: list[tuple[Token, str]], a: int, b: int) -> str:
    """Surface of tokens a..b-1 with the original text between them."""
    parts = []
    for k in range(a, b):
        tok, gap = stream[k]
        parts.append(tok.surface)
        if k < b - 1:
            parts.append(gap)
    return "".join(parts)


def _sentence_offsets(text: SegmentedText) -> dict[str, int]:
    out = {}
    n = 0
    for s in text.sentences():
        out[s.id] = n
        n += len(s.tokens)
    return out


def concord(
    matches: Iterable[Match],
    text: SegmentedText,
    left_size: int = 5,
    right_size: int = 5,
    order: str = TEXT_ORDER,
) -> list[ConcordanceLine]:
    """One line per match with ``left_size``/``right_size`` tokens of context."""
    if order not in (TEXT_ORDER, LEXICOGRAPHIC):
        raise ValueError(f"unknown order {order!r}")
    stream = text.token_stream()
    base = _sentence_offsets(text)
    lines = []
    for m in matches:
        a = base[m.sentence_id] + m.tokens[0]
        b = base[m.sentence_id] + m.tokens[1]
        left = _join(stream, max(0, a - left_size), a)
        right = _join(stream, b, min(len(stream), b + right_size))
        lines.append(ConcordanceLine(_flat(left), _flat(_join(stream, a, b)), _flat(right), m.sentence_id, (a, b), m.weight))
    if order == TEXT_ORDER:
        lines.sort(key=lambda ln: ln.tokens)
    else:
        lines.sort(key=lambda ln: (ln.segment, ln.right, ln.tokens))
    return lines


def concordance_tsv(lines: Sequence[ConcordanceLine]) -> str:
    return "".join(
        f"{ln.sentence_id}\t{ln.tokens[0]}\t{ln.tokens[1]}\t{ln.weight}\t{ln.left}\t{ln.segment}\t{ln.right}\n"
        for ln in lines
    )


def concordance_html(lines: Sequence[ConcordanceLine]) -> str:
    rows = [
        "<!DOCTYPE html>",
        '<html><head><meta charset="utf-8"><title>Concordance</title>',
        "<style>td.l{text-align:right} td.m{font-weight:bold}</style></head><body>",
        "<table>",
    ]
    for ln in lines:
        rows.append(
            f'<tr><td class="l">{html.escape(ln.left)}</td><td class="m">{html.escape(ln.segment)}</td>'
            f'<td class="r">{html.escape(ln.right)}</td></tr>'
        )
    rows.append("</table></body></html>")
    return "\n".join(rows) + "\n"


# -- rewriting -------------------------------------------------------------------------


@dataclass(frozen=True)
class RewritePlan:
    matches: tuple[Match, ...]
    mode: str = INSERT

    def __post_init__(self):
        if self.mode not in (INSERT, REPLACE):
            raise ValueError(f"unknown mode {self.mode!r}")
        last: dict[str, tuple[int, int]] = {}
        for m in self.matches:
            prev = last.get(m.sentence_id)
            if prev is not None and (m.tokens[0] < prev[1] or (m.tokens[0] == prev[0] == prev[1])):
                raise ValueError("plan matches overlap or are out of order")
            last[m.sentence_id] = m.tokens


def select_matches(matches: Iterable[Match], length_policy: str = "none", mode: str = INSERT) -> RewritePlan:
    """Greedy left-to-right choice of disjoint matches.

    At the leftmost free position the heaviest match wins; weight ties go to
    the longest one under ``prefer-longest`` and otherwise to the first in
    input order.  An empty match uses up its position.
    """
    if length_policy not in ("none", "prefer-longest"):
        raise ValueError(f"unknown length policy {length_policy!r}")
    by_sentence: dict[str, list[tuple[int, Match]]] = {}
    for k, m in enumerate(matches):
        by_sentence.setdefault(m.sentence_id, []).append((k, m))
    chosen = []
    longest = length_policy == "prefer-longest"
    for cands in by_sentence.values():
        cur = 0
        remaining = sorted(cands, key=lambda km: (km[1].tokens[0], km[0]))
        while True:
            remaining = [km for km in remaining if km[1].tokens[0] >= cur]
            if not remaining:
                break
            start = remaining[0][1].tokens[0]
            group = [km for km in remaining if km[1].tokens[0] == start]
            k, best = min(
                group,
                key=lambda km: (-km[1].weight, -(km[1].tokens[1] - start) if longest else 0, km[0]),
            )
            chosen.append(best)
            cur = best.tokens[1] if best.tokens[1] > start else start + 1
    return RewritePlan(tuple(chosen), mode)


def apply_text(text: SegmentedText, plan: RewritePlan) -> str:
    """Raw text with the plan's outputs inserted, or substituted for the matched segments."""
    token_index: dict[str, tuple[str, int]] = {}
    ends: dict[str, int] = {}
    for s in text.sentences():
        toks = s.tokens
        for i, t in enumerate(toks):
            token_index[t.id] = (s.id, i)
        ends[s.id] = len(toks)
    before: dict[tuple[str, int], list[str]] = {}
    after: dict[tuple[str, int], list[str]] = {}
    skip: set[tuple[str, int]] = set()  # tokens removed by replacement
    skip_gap: set[tuple[str, int]] = set()  # tokens whose following text is removed
    for m in plan.matches:
        sid = m.sentence_id
        a, b = m.tokens
        if plan.mode == INSERT:
            for p, out in m.outputs:
                if p == b and p > a or p == ends[sid]:
                    after.setdefault((sid, p - 1), []).append(out)
                else:
                    before.setdefault((sid, p), []).append(out)
        else:
            if a == b:
                if a == ends[sid] and a > 0:
                    after.setdefault((sid, a - 1), []).append(m.output)
                else:
                    before.setdefault((sid, a), []).append(m.output)
                continue
            before.setdefault((sid, a), []).append(m.output)
            for k in range(a, b):
                skip.add((sid, k))
                if k < b - 1:
                    skip_gap.add((sid, k))
    out: list[str] = []
    skipping = False
    for piece in _pieces(text, tokens_as_objects=True):
        if isinstance(piece, Token):
            key = token_index[piece.id]
            out.extend(before.get(key, ()))
            if key not in skip:
                out.append(piece.surface)
            out.extend(after.get(key, ()))
            skipping = key in skip_gap
        elif not skipping:
            out.append(piece)
    return "".join(out)


# -- lattice enrichment -----------------------------------------------------------------


def apply_automaton(
    tagged: TaggedText,
    wrtn: WRTN,
    iterations: int = 1,
    tagset: TagsetDefinition | None = None,
    max_per_span: int = 16,
) -> TaggedText:
    """Add an OutputMark transition for each match's output, ``iterations`` times.

    Marks are ordinary transitions, so a later pass can match them with a
    ``form=`` mask.  Stops early once a pass adds nothing.
    """
    sentences = list(tagged.sentences)
    for _ in range(iterations):
        changed = False
        for k, aut in enumerate(sentences):
            new = []
            per_span: dict[tuple[int, int], int] = {}
            existing = set(aut.transitions)
            for m in enumerate_matches(parse(wrtn, aut, ANCHORED, tagset), BEST):
                if m.empty or not m.output:
                    continue
                t = Transition(m.start, m.end, OutputMark(m.output))
                if t in existing:
                    continue
                span = (m.start, m.end)
                if per_span.get(span, 0) >= max_per_span:
                    continue
                per_span[span] = per_span.get(span, 0) + 1
                existing.add(t)
                new.append(t)
            if new:
                sentences[k] = add_transitions(aut, new)
                changed = True
        if not changed:
            break
    return TaggedText(tagged.tokens, tuple(sentences), tagged.stats)
