"""Command-line entry point: ``lexgram <subcommand> ...``.

Exit status: 0 success, 1 other failure, 2 usage error, 3 a resource could
not be loaded (missing file, malformed document), 4 a pipeline stage is
missing its prerequisite.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import project as prj
from .apps import apply_automaton, apply_text, concord, concordance_html, concordance_tsv, select_matches
from .grammar import (
    GraphSet,
    compile_grammar,
    flatten,
    graph_to_dot,
    graph_to_grf,
    grf_to_graph,
    read_grammar,
    write_grammar,
    write_wrtn,
    wrtn_to_dot,
)
from .lattice import export_text_dot, write_binary, write_fsa
from .lexicon import (
    LookupOptions,
    dela_to_xml,
    inflect,
    lookup_multi,
    parse_dela,
    parse_lemmas,
    parse_paradigms,
    write_dela,
    write_index,
    xml_to_dela,
)
from .parser import locate
from .segmenter import read_seg, segment, write_seg

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_RESOURCE, EXIT_PREREQ = 0, 1, 2, 3, 4

log = logging.getLogger("lexgram")


def _read(path: str | None) -> str:
    if path in (None, "-"):
        return sys.stdin.read()
    return prj.read_text(Path(path))


def _write(path: str | None, data: str | bytes) -> None:
    if path in (None, "-"):
        if isinstance(data, bytes):
            sys.stdout.buffer.write(data)
        else:
            sys.stdout.write(data)
        return
    mode = "wb" if isinstance(data, bytes) else "w"
    with open(path, mode, **({} if isinstance(data, bytes) else {"encoding": "utf-8"})) as fh:
        fh.write(data)


def _options(args) -> LookupOptions:
    return LookupOptions(args.fold_case, args.fold_diacritics)


def _tagset(args):
    return prj.load_tagset(Path(args.tagset)) if getattr(args, "tagset", None) else None


def _lexicons(args, tagset):
    return [prj.load_lexicon(Path(p), tagset, priority=-k) for k, p in enumerate(args.lexicon)]


# -- subcommands ----------------------------------------------------------------------


def cmd_segment(args):
    _write(args.output, write_seg(segment(_read(args.input), args.format)))


def cmd_inflect(args):
    paradigms = parse_paradigms(prj.read_text(Path(args.paradigms)))
    _write(args.output, write_dela(inflect(parse_lemmas(_read(args.input)), paradigms)))


def cmd_index(args):
    tagset = _tagset(args)
    ix = prj.load_lexicon(Path(args.input), tagset, args.priority)
    _write(args.output, write_index(ix))
    log.info("%d entries, %d states, %d transitions", ix.entry_count, ix.state_count, ix.transition_count)


def cmd_convert(args):
    tagset = _tagset(args)
    data = _read(args.input)
    target = args.to or ("dela" if data.lstrip().startswith("<") else "xml")
    if target == "xml":
        _write(args.output, dela_to_xml(parse_dela(data), tagset))
    else:
        _write(args.output, write_dela(xml_to_dela(data, tagset)))


def cmd_lookup(args):
    tagset = _tagset(args)
    lexicons = _lexicons(args, tagset)
    found = False
    for form in args.forms:
        for a in lookup_multi(lexicons, form, _options(args)):
            feats = " ".join(f"{f.name}={f.value}" for f in a.features)
            print(f"{form}\t{a.lemma}\t{a.pos}\t{feats}".rstrip())
            found = True
    return EXIT_OK if found else EXIT_FAIL


def cmd_tag(args):
    from .lattice import tag

    text = read_seg(_read(args.input))
    tagset = _tagset(args)
    tagged = tag(text, _lexicons(args, tagset), _options(args))
    _write(args.output, write_binary(tagged) if args.binary else write_fsa(tagged))


def cmd_compile_grammar(args):
    gs = _load_source(args.input)
    _write(args.output, write_wrtn(compile_grammar(gs)))


def cmd_flatten(args):
    wrtn = prj.load_network(Path(args.input))
    _write(args.output, write_wrtn(flatten(wrtn, args.depth)))


def _load_source(path: str) -> GraphSet:
    data = _read(path)
    if path.endswith(".grf"):
        g = grf_to_graph(data, Path(path).stem)
        return GraphSet(g.name, {g.name: g})
    return read_grammar(data)


def cmd_convert_grammar(args):
    gs = _load_source(args.input)
    if args.output and args.output.endswith(".grf") or args.to == "grf":
        graph = gs[args.graph or gs.axiom]
        _write(args.output, graph_to_grf(graph))
    else:
        _write(args.output, write_grammar(gs))


def cmd_locate(args):
    tagged = prj.load_tagged(Path(args.text))
    wrtn = prj.load_network(Path(args.grammar))
    matches = locate(tagged, wrtn, args.mode, args.policy, _tagset(args))
    _write(args.output, prj.format_matches(matches, tagged))


def cmd_concord(args):
    text = prj.load_segmented(Path(args.seg))
    tagged = prj.load_tagged(Path(args.text))
    wrtn = prj.load_network(Path(args.grammar))
    lines = concord(locate(tagged, wrtn, tagset=_tagset(args)), text, args.left, args.right, args.sort)
    _write(args.output, concordance_html(lines) if args.html else concordance_tsv(lines))


def cmd_apply(args):
    text = prj.load_segmented(Path(args.seg))
    tagged = prj.load_tagged(Path(args.text))
    wrtn = prj.load_network(Path(args.grammar))
    plan = select_matches(
        locate(tagged, wrtn, tagset=_tagset(args)), "prefer-longest" if args.prefer_longest else "none", args.mode
    )
    _write(args.output, apply_text(text, plan))


def cmd_enrich(args):
    tagged = prj.load_tagged(Path(args.text))
    wrtn = prj.load_network(Path(args.grammar))
    out = apply_automaton(tagged, wrtn, args.iterations, _tagset(args))
    _write(args.output, write_binary(out) if args.binary else write_fsa(out))


def cmd_export_dot(args):
    path = Path(args.input)
    if path.suffix == ".grf":
        _write(args.output, graph_to_dot(grf_to_graph(prj.read_text(path), path.stem)))
        return
    data = path.read_bytes() if path.exists() else b""
    if data[:4] == b"LXTA" or b"<textfsa" in data[:200]:
        tagged = prj.load_tagged(path)
        if args.sentence:
            tagged = type(tagged)(tagged.tokens, tuple(a for a in tagged.sentences if a.sentence_id == args.sentence))
        _write(args.output, export_text_dot(tagged))
    elif b"<wrtn" in data[:200]:
        _write(args.output, wrtn_to_dot(prj.load_network(path)))
    else:
        gs = _load_source(args.input)
        _write(args.output, "".join(graph_to_dot(g) for g in gs))


def cmd_stats(args):
    s = prj.load_tagged(Path(args.input)).stats
    print(f"word tokens\t{s.tokens}")
    print(f"unknown\t{s.unknown}\t{100 * s.rate:.2f}%")
    print(f"unknown, capitalized excluded\t{s.unknown - s.unknown_capitalized}\t{100 * s.rate_without_capitalized:.2f}%")


def cmd_run(args):
    path = args.project or prj.default_project()
    if not path:
        raise prj.ProjectError(f"no project given (use --project or set {prj.ENV_PROJECT})")
    config = prj.load_config(path)
    stages = [s for s in (args.stages or "").split(",") if s]
    for stage, paths in prj.run_pipeline(config, args.input, stages).items():
        for p in paths:
            print(f"{stage}\t{p}")


# -- parser ---------------------------------------------------------------------------------


def _add_folding(p):
    p.add_argument("--fold-case", action="store_true", help="case-insensitive lookup")
    p.add_argument("--fold-diacritics", action="store_true", help="ignore accents in lookup")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lexgram", description="Text segmentation, lexical tagging and local grammars.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", metavar="COMMAND", required=True)

    def add(name, func, help):
        p = sub.add_parser(name, help=help, description=help)
        p.set_defaults(func=func)
        return p

    p = add("segment", cmd_segment, "split raw text or HTML into paragraphs, sentences and tokens")
    p.add_argument("input", nargs="?", default="-")
    p.add_argument("-o", "--output")
    p.add_argument("--format", choices=("txt", "html"), default="txt")

    p = add("inflect", cmd_inflect, "expand a lemma list into a DELA lexicon with paradigms")
    p.add_argument("input", nargs="?", default="-")
    p.add_argument("--paradigms", required=True)
    p.add_argument("-o", "--output")

    p = add("index", cmd_index, "compile a DELA lexicon into a minimal automaton index")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--tagset")
    p.add_argument("--priority", type=int, default=0)

    p = add("convert", cmd_convert, "convert a lexicon between DELA text and XML")
    p.add_argument("input", nargs="?", default="-")
    p.add_argument("--tagset", required=True)
    p.add_argument("--to", choices=("xml", "dela"))
    p.add_argument("-o", "--output")

    p = add("lookup", cmd_lookup, "print the analyses of word forms")
    p.add_argument("forms", nargs="+")
    p.add_argument("-l", "--lexicon", action="append", required=True, help="lexicon (.dic or .idx), highest priority first")
    p.add_argument("--tagset")
    _add_folding(p)

    p = add("tag", cmd_tag, "build the text automaton of a segmented text")
    p.add_argument("input", nargs="?", default="-")
    p.add_argument("-l", "--lexicon", action="append", required=True, help="lexicon (.dic or .idx), highest priority first")
    p.add_argument("--tagset")
    p.add_argument("--binary", action="store_true")
    p.add_argument("-o", "--output")
    _add_folding(p)

    p = add("compile-grammar", cmd_compile_grammar, "compile a grammar into a weighted recursive transition network")
    p.add_argument("input")
    p.add_argument("-o", "--output")

    p = add("flatten", cmd_flatten, "inline sub-graph calls up to a depth")
    p.add_argument("input")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("-o", "--output")

    p = add("convert-grammar", cmd_convert_grammar, "convert a grammar between XML and box (.grf) files")
    p.add_argument("input")
    p.add_argument("--to", choices=("xml", "grf"))
    p.add_argument("--graph", help="graph to export when writing a box file")
    p.add_argument("-o", "--output")

    for name, func, help in (
        ("locate", cmd_locate, "list grammar matches in a text automaton"),
        ("concord", cmd_concord, "concordance of grammar matches"),
        ("apply", cmd_apply, "rewrite the text with grammar outputs"),
        ("enrich", cmd_enrich, "add grammar outputs to the text automaton"),
    ):
        p = add(name, func, help)
        if name in ("concord", "apply"):
            p.add_argument("seg", help="segmented text document")
        p.add_argument("text", help="text automaton")
        p.add_argument("grammar", help="grammar or compiled network")
        p.add_argument("--tagset")
        p.add_argument("-o", "--output")
        if name == "locate":
            p.add_argument("--mode", choices=("anchored", "whole"), default="anchored")
            p.add_argument("--policy", choices=("best-per-span", "all"), default="best-per-span")
        elif name == "concord":
            p.add_argument("--left", type=int, default=5)
            p.add_argument("--right", type=int, default=5)
            p.add_argument("--sort", choices=("text", "lex"), default="text")
            p.add_argument("--html", action="store_true")
        elif name == "apply":
            p.add_argument("--mode", choices=("insert", "replace"), default="insert")
            p.add_argument("--prefer-longest", action="store_true")
        else:
            p.add_argument("--iterations", type=int, default=1)
            p.add_argument("--binary", action="store_true")

    p = add("export-dot", cmd_export_dot, "Graphviz view of a text automaton, grammar or network")
    p.add_argument("input")
    p.add_argument("--sentence")
    p.add_argument("-o", "--output")

    p = add("stats", cmd_stats, "unknown-word rates of a text automaton")
    p.add_argument("input")

    p = add("run", cmd_run, "run pipeline stages from a project file")
    p.add_argument("input")
    p.add_argument("--project", help=f"project INI file (default: ${prj.ENV_PROJECT})")
    p.add_argument("--stages", default="segment,tag,locate", help="comma-separated subset of " + ",".join(prj.STAGES))
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        rc = args.func(args)
    except prj.PrerequisiteError as exc:
        print(f"lexgram: {exc}", file=sys.stderr)
        return EXIT_PREREQ
    except (prj.ProjectError, ValueError) as exc:
        print(f"lexgram: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except BrokenPipeError:
        return EXIT_OK
    except OSError as exc:
        print(f"lexgram: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    return EXIT_OK if rc is None else rc


if __name__ == "__main__":
    sys.exit(main())
