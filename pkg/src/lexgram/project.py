"""Projects: an INI file naming the tagset, lexicons and grammars of a pipeline.

Example::

    [project]
    tagset = tagset.xml
    workdir = work
    fold_case = yes
    fold_diacritics = no

    [lexicon:general]
    path = general.dic
    priority = 0

    [grammar:np]
    path = np.grammar.xml
    flatten = 2

Relative paths are resolved against the directory of the INI file.
A lexicon whose path ends in ``.idx`` is used as a precompiled index.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field
from pathlib import Path

from . import _xml
from .apps import apply_automaton, apply_text, concord, concordance_tsv, select_matches
from .grammar import WRTN, compile_grammar, flatten, load_grammar, read_wrtn
from .lattice import TaggedText, read_binary, read_fsa, tag, write_fsa
from .lexicon import IndexedLexicon, LookupOptions, build_index, parse_dela, read_index
from .model import TagsetDefinition, parse_tagset
from .parser import ANCHORED, BEST, Match, locate
from .segmenter import PLAIN, SegmentedText, read_seg, segment, write_seg

ENV_PROJECT = "LEXGRAM_PROJECT"
STAGES = ("segment", "tag", "locate", "concord", "apply", "enrich")


class ProjectError(Exception):
    """A resource named by the project cannot be loaded."""


class PrerequisiteError(Exception):
    """A stage needs an artifact that is neither produced nor present."""


@dataclass(frozen=True)
class LexiconDecl:
    name: str
    path: Path
    priority: int = 0

    @property
    def precompiled(self) -> bool:
        return self.path.suffix == ".idx"


@dataclass(frozen=True)
class GrammarDecl:
    name: str
    path: Path
    flatten_depth: int | None = None


@dataclass(frozen=True)
class ProjectConfig:
    tagset: Path | None
    lexicons: tuple[LexiconDecl, ...] = ()
    grammars: tuple[GrammarDecl, ...] = ()
    fold_case: bool = False
    fold_diacritics: bool = False
    workdir: Path = Path("work")
    text_format: str = PLAIN
    concord_left: int = 5
    concord_right: int = 5
    concord_order: str = "text"
    apply_mode: str = "insert"
    prefer_longest: bool = True
    iterations: int = 1
    settings: dict = field(default_factory=dict)

    @property
    def options(self) -> LookupOptions:
        return LookupOptions(self.fold_case, self.fold_diacritics)


def load_config(path: str | os.PathLike) -> ProjectConfig:
    path = Path(path)
    cp = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ProjectError(f"cannot read project {path}: {exc}") from None
    except configparser.Error as exc:
        raise ProjectError(f"{path}: {exc}") from None
    base = path.parent
    main = cp["project"] if cp.has_section("project") else cp[cp.default_section]

    def resolve(p: str) -> Path:
        q = Path(p)
        return q if q.is_absolute() else base / q

    def existing(p: str, what: str) -> Path:
        q = resolve(p)
        if not q.exists():
            raise ProjectError(f"{what} {q} does not exist")
        return q

    try:
        tagset = existing(main["tagset"], "tagset") if main.get("tagset") else None
        lexicons, grammars = [], []
        for sec in cp.sections():
            if sec.startswith("lexicon:"):
                s = cp[sec]
                lexicons.append(LexiconDecl(sec[8:], existing(s["path"], "lexicon"), s.getint("priority", 0)))
            elif sec.startswith("grammar:"):
                s = cp[sec]
                depth = s.get("flatten")
                grammars.append(
                    GrammarDecl(sec[8:], existing(s["path"], "grammar"), int(depth) if depth not in (None, "") else None)
                )
        return ProjectConfig(
            tagset=tagset,
            lexicons=tuple(lexicons),
            grammars=tuple(grammars),
            fold_case=main.getboolean("fold_case", False),
            fold_diacritics=main.getboolean("fold_diacritics", False),
            workdir=resolve(main.get("workdir", "work")),
            text_format=main.get("format", PLAIN),
            concord_left=main.getint("concord_left", 5),
            concord_right=main.getint("concord_right", 5),
            concord_order=main.get("concord_order", "text"),
            apply_mode=main.get("apply_mode", "insert"),
            prefer_longest=main.getboolean("prefer_longest", True),
            iterations=main.getint("iterations", 1),
            settings=dict(main),
        )
    except KeyError as exc:
        raise ProjectError(f"{path}: missing setting {exc}") from None
    except ValueError as exc:
        raise ProjectError(f"{path}: {exc}") from None


# -- resource loading (shared with the CLI) ------------------------------------------


def read_text(path: Path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ProjectError(f"cannot read {path}: {exc}") from None


def load_tagset(path) -> TagsetDefinition | None:
    if path is None:
        return None
    try:
        return parse_tagset(read_text(path))
    except _xml.XMLFormatError as exc:
        raise ProjectError(f"{path}: {exc}") from None


def load_lexicon(path, tagset=None, priority: int = 0, name: str = "") -> IndexedLexicon:
    path = Path(path)
    try:
        if path.suffix == ".idx":
            ix = read_index(path.read_bytes())
            return IndexedLexicon(
                ix.edges, ix.finals, ix.payloads, ix.records, priority, name or ix.name, ix.tagset_digest, ix.entry_count
            )
        return build_index(parse_dela(read_text(path)), priority=priority, tagset=tagset, name=name or path.stem)
    except ProjectError:
        raise
    except (OSError, ValueError) as exc:
        raise ProjectError(f"{path}: {exc}") from None


def load_network(path, flatten_depth: int | None = None) -> WRTN:
    """A compiled ``<wrtn>`` document, or a grammar source compiled on the fly."""
    path = Path(path)
    try:
        data = read_text(path)
        if path.suffix != ".grf" and _xml.parse(data).root.tag == "wrtn":
            wrtn = read_wrtn(data)
        else:
            wrtn = compile_grammar(load_grammar(path))
        return flatten(wrtn, flatten_depth) if flatten_depth is not None else wrtn
    except ProjectError:
        raise
    except ValueError as exc:
        raise ProjectError(f"{path}: {exc}") from None


def load_tagged(path) -> TaggedText:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ProjectError(f"cannot read {path}: {exc}") from None
    try:
        return read_binary(data) if data[:4] == b"LXTA" else read_fsa(data)
    except ValueError as exc:
        raise ProjectError(f"{path}: {exc}") from None


def load_segmented(path) -> SegmentedText:
    try:
        return read_seg(read_text(path))
    except ValueError as exc:
        raise ProjectError(f"{path}: {exc}") from None


def format_matches(matches: list[Match], tagged: TaggedText) -> str:
    """Tab-separated: sentence, first token, end token, weight, output, matched tokens."""
    tokens = {a.sentence_id: a.token_ids for a in tagged.sentences}
    surf = tagged.token_map()
    lines = []
    for m in matches:
        ids = tokens[m.sentence_id][m.tokens[0] : m.tokens[1]]
        words = " ".join(surf[t].surface for t in ids)
        lines.append(f"{m.sentence_id}\t{m.tokens[0]}\t{m.tokens[1]}\t{m.weight}\t{m.output}\t{words}\n")
    return "".join(lines)


# -- pipeline --------------------------------------------------------------------------


def run_pipeline(config: ProjectConfig, input_path, stages) -> dict[str, list[Path]]:
    """Run ``stages`` (in canonical order) on one input file.

    Artifacts go to the working directory under names derived from the
    input stem; stages whose input is not produced in this run reuse an
    artifact already present there, and fail otherwise.
    """
    stages = list(stages)
    unknown = [s for s in stages if s not in STAGES]
    if unknown:
        raise ValueError(f"unknown stage(s): {', '.join(unknown)}")
    wanted = [s for s in STAGES if s in stages]
    artifacts: dict[str, list[Path]] = {}
    if not wanted:
        return artifacts
    input_path = Path(input_path)
    stem = input_path.name.split(".")[0] or "text"
    work = config.workdir
    work.mkdir(parents=True, exist_ok=True)
    seg_path = work / f"{stem}.seg.xml"
    fsa_path = work / f"{stem}.fsa.xml"

    def need(path: Path, stage: str, producer: str) -> None:
        if producer not in wanted and not path.exists():
            raise PrerequisiteError(f"stage {stage!r} needs {path.name}; run {producer!r} first")

    tagset = load_tagset(config.tagset)
    text = tagged = None
    if "segment" in wanted:
        text = segment(read_text(input_path), config.text_format)
        seg_path.write_text(write_seg(text), encoding="utf-8")
        artifacts["segment"] = [seg_path]
    if "tag" in wanted:
        need(seg_path, "tag", "segment")
        text = text or load_segmented(seg_path)
        lexicons = [load_lexicon(d.path, tagset, d.priority, d.name) for d in config.lexicons]
        tagged = tag(text, lexicons, config.options)
        fsa_path.write_text(write_fsa(tagged), encoding="utf-8")
        artifacts["tag"] = [fsa_path]
    later = [s for s in wanted if s in ("locate", "concord", "apply", "enrich")]
    if later:
        for s in later:
            need(fsa_path, s, "tag")
            if s in ("concord", "apply"):
                need(seg_path, s, "segment")
        tagged = tagged or load_tagged(fsa_path)
        if "concord" in later or "apply" in later:
            text = text or load_segmented(seg_path)
        if not config.grammars:
            raise ProjectError("the project declares no grammar")
    for g in config.grammars if later else ():
        wrtn = load_network(g.path, g.flatten_depth)
        prefix = work / f"{stem}.{g.name}"
        matches = locate(tagged, wrtn, ANCHORED, BEST, tagset) if {"locate", "concord", "apply"} & set(later) else []
        if "locate" in later:
            p = prefix.with_name(prefix.name + ".locate.tsv")
            p.write_text(format_matches(matches, tagged), encoding="utf-8")
            artifacts.setdefault("locate", []).append(p)
        if "concord" in later:
            p = prefix.with_name(prefix.name + ".concord.tsv")
            lines = concord(matches, text, config.concord_left, config.concord_right, config.concord_order)
            p.write_text(concordance_tsv(lines), encoding="utf-8")
            artifacts.setdefault("concord", []).append(p)
        if "apply" in later:
            p = prefix.with_name(prefix.name + ".apply.txt")
            policy = "prefer-longest" if config.prefer_longest else "none"
            p.write_text(apply_text(text, select_matches(matches, policy, config.apply_mode)), encoding="utf-8")
            artifacts.setdefault("apply", []).append(p)
        if "enrich" in later:
            p = prefix.with_name(prefix.name + ".enriched.fsa.xml")
            p.write_text(write_fsa(apply_automaton(tagged, wrtn, config.iterations, tagset)), encoding="utf-8")
            artifacts.setdefault("enrich", []).append(p)
    return artifacts


def default_project() -> str | None:
    return os.environ.get(ENV_PROJECT)


__all__ = [
    "ENV_PROJECT", "STAGES", "GrammarDecl", "LexiconDecl", "PrerequisiteError", "ProjectConfig", "ProjectError",
    "default_project", "format_matches", "load_config", "load_lexicon", "load_network", "load_segmented",
    "load_tagged", "load_tagset", "read_text", "run_pipeline",
]
