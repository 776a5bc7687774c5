"""``euslem`` command line: compile, analyze, tag, generate, train, stats, eval.

Exit status is 0 on success, 1 on a usage error and 2 when input data is
missing or malformed.  Every resource is loaded and checked before any
output is written.
"""

from __future__ import annotations

import argparse
import io
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import __version__
from .analyzer import AnalyzerConfig, enumerate_inflections, generate
from .corpus import (AnnotatedCorpus, ambiguity_stats, evaluate, read_cohorts,
                     tokenize, write_cohorts)
from .disambiguator import dump_model, load_model, parse_constraints, train_model
from .errors import EuslemError
from .lexicon import parse_lexicon, validate_lexicon
from .pipeline import (Pipeline, build_network, default_path, load_compounds,
                       load_network, read_text, save_network)
from .readings import render_analysis
from .tagset import TagsetConfig, load_tagset, tag_cohort

COMMANDS = ("compile", "analyze", "tag", "generate", "train", "stats", "eval")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# argument grammar

def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="euslem", description="Basque morphological analysis and tagging.")
    p.add_argument("--version", action="version", version=f"euslem {__version__}")
    sub = p.add_subparsers(dest="command", metavar="<command>", parser_class=_Parser)

    res = _Parser(add_help=False)
    res.add_argument("--lexicon", help="lexicon file (default: shipped basque.lex)")
    res.add_argument("--rules", help="two-level rule file (default: shipped basque.rul)")
    res.add_argument("--tagset", help="tagset file (default: shipped default.tgs)")
    res.add_argument("--strict", action="store_true",
                     help="treat tagset non-conformance and lexicon warnings as errors")

    ana = _Parser(add_help=False)
    ana.add_argument("--net", help="compiled network (instead of --lexicon/--rules)")
    ana.add_argument("--max-ellipsis", type=int, metavar="N",
                     help="maximum intraword ellipsis depth")
    ana.add_argument("--variants", action="store_true",
                     help="fall back to non-standard spellings")
    ana.add_argument("--guess", action="store_true",
                     help="fall back to the guesser for unknown stems")

    io_ = _Parser(add_help=False)
    io_.add_argument("input", nargs="?", default="-", help="input file (default: stdin)")
    io_.add_argument("-o", "--output", metavar="OUT", help="output file (default: stdout)")

    lvl = _Parser(add_help=False)
    lvl.add_argument("--level", type=int, choices=(1, 2, 3, 4), help="tag level")
    lvl.add_argument("--l3-params", metavar="k1,k2", help="level-3 feature keys")

    c = sub.add_parser("compile", parents=[res], help="compile and save a network")
    c.add_argument("--max-ellipsis", type=int, default=2, metavar="N")
    c.add_argument("-o", "--output", metavar="OUT", required=True)

    a = sub.add_parser("analyze", parents=[res, ana, io_, lvl],
                       help="all readings of every token")
    a.add_argument("--compounds", help="compound lexicon to mark")
    a.add_argument("--format", choices=("cohort", "lines"), default="cohort")
    a.add_argument("--jobs", type=int, default=1, metavar="N")

    t = sub.add_parser("tag", parents=[res, ana, io_, lvl], help="one reading per token")
    t.add_argument("--cg", help="constraint grammar (default: shipped basque.cg)")
    t.add_argument("--model", help="statistical model (default: shipped default.mod)")
    t.add_argument("--compounds", help="compound lexicon (default: shipped compounds.txt)")
    t.add_argument("--format", choices=("cohort", "lines"), default="cohort")
    t.add_argument("--jobs", type=int, default=1, metavar="N")

    g = sub.add_parser("generate", parents=[res, ana], help="paradigms and targeted forms")
    g.add_argument("--lemma", required=True)
    g.add_argument("--depth", type=int, default=0)
    g.add_argument("--spec", metavar="k=v,...", help="features every form must carry")
    g.add_argument("--category", help="restrict to the lemma's entries of this category")
    g.add_argument("--count-only", action="store_true")
    g.add_argument("-o", "--output", metavar="OUT")

    tr = sub.add_parser("train", parents=[lvl], help="train a model from a gold corpus")
    tr.add_argument("gold")
    tr.add_argument("--tagset")
    tr.add_argument("--order", type=int, choices=(2, 3), default=2)
    tr.add_argument("--lambda", dest="lam", default="1", metavar="X")
    tr.add_argument("-o", "--output", metavar="OUT")

    s = sub.add_parser("stats", help="ambiguity statistics of a cohort corpus")
    s.add_argument("corpus")
    s.add_argument("-o", "--output", metavar="OUT")

    e = sub.add_parser("eval", parents=[lvl], help="score a tagged corpus against gold")
    e.add_argument("gold")
    e.add_argument("system")
    e.add_argument("--tagset")
    e.add_argument("-o", "--output", metavar="OUT")
    return p


# ---------------------------------------------------------------------------
# resource loading

def _params(args) -> tuple[str, ...] | None:
    raw = getattr(args, "l3_params", None)
    if raw is None:
        return None
    if args.level != 3:
        raise UsageError("--l3-params needs --level 3")
    keys = tuple(k.strip() for k in raw.split(",") if k.strip())
    if not keys:
        raise UsageError("--l3-params names no keys")
    return keys


def _tagset(args) -> TagsetConfig:
    path = args.tagset or default_path("tagset")
    return load_tagset(read_text(path), strict=getattr(args, "strict", False), source=str(path))


def _lexicon_checks(path, tagset: TagsetConfig, strict: bool) -> None:
    lex = parse_lexicon(read_text(path), categories=tagset.categories
                        + tuple(tagset.derived_categories), source=str(path))
    diags = validate_lexicon(lex)
    if diags and strict:
        raise EuslemError(f"{path}: {diags[0]}")
    for d in diags:
        print(f"euslem: {path}: {d}", file=sys.stderr)


def _network(args, tagset: TagsetConfig):
    if getattr(args, "net", None):
        if args.lexicon or args.rules:
            raise UsageError("--net cannot be combined with --lexicon/--rules")
        net = load_network(args.net)
    else:
        depth = args.max_ellipsis if args.max_ellipsis is not None else 2
        if depth < 0:
            raise UsageError("--max-ellipsis must be >= 0")
        lex_path = args.lexicon or default_path("lexicon")
        rules_path = args.rules or default_path("rules")
        if args.strict:
            _lexicon_checks(lex_path, tagset, True)
        net = build_network(lex_path, rules_path, depth, tagset)
    return net


def _config(args, net, tagset: TagsetConfig) -> AnalyzerConfig:
    depth = args.max_ellipsis if args.max_ellipsis is not None else net.max_ellipsis_depth
    if depth < 0:
        raise UsageError("--max-ellipsis must be >= 0")
    if depth > net.max_ellipsis_depth:
        raise UsageError(f"--max-ellipsis {depth} exceeds the network's compiled depth "
                         f"{net.max_ellipsis_depth}")
    return AnalyzerConfig(max_ellipsis_depth=depth, allow_variants=args.variants,
                          allow_guesser=args.guess, derivation_map=tagset.derivation_map)


def _optional(path: str | None, kind: str) -> Path | None:
    """Explicit path, else the default file when it exists."""
    if path:
        return Path(path)
    p = default_path(kind)
    return p if p.exists() else None


def _input_text(name: str) -> str:
    if name == "-":
        return sys.stdin.read()
    return read_text(name)


def _jobs(args) -> int:
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    return args.jobs


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _format_lines(sentences, tagged: bool) -> str:
    buf = io.StringIO()
    for sent in sentences:
        for c in sent:
            for r in c.readings:
                label = r.tag.label if tagged and r.tag else render_analysis(r.analysis)
                buf.write(f"{c.surface}\t{label}\n")
        buf.write("\n")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands

def cmd_compile(args) -> None:
    tagset = _tagset(args)
    if args.max_ellipsis < 0:
        raise UsageError("--max-ellipsis must be >= 0")
    lex_path = args.lexicon or default_path("lexicon")
    _lexicon_checks(lex_path, tagset, args.strict)
    net = build_network(lex_path, args.rules or default_path("rules"), args.max_ellipsis, tagset)
    save_network(net, args.output)
    exits = sum(1 for n in net.cont_node if n < 0)
    print(f"entries={len(net.entries)} exits={exits} reentry_links={net.count_links()} "
          f"nodes={net.n_nodes}")


def _run_text(args, *, tag: bool) -> None:
    tagset = _tagset(args)
    params = _params(args)
    jobs = _jobs(args)
    net = _network(args, tagset)
    cfg = _config(args, net, tagset)
    compounds_path = args.compounds if not tag else _optional(args.compounds, "compounds")
    compounds = load_compounds(compounds_path) if compounds_path else []
    level = args.level or 2
    grammar = model = None
    if tag:
        cg_path = _optional(args.cg, "cg")
        if cg_path:
            grammar = parse_constraints(read_text(cg_path), source=str(cg_path))
        model_path = _optional(args.model, "model")
        if model_path:
            model = load_model(read_text(model_path), source=str(model_path))
    pipe = Pipeline(net, net.rules, tagset, cfg, grammar, model, compounds, level, params)
    sentences = tokenize(_input_text(args.input))
    out = pipe.run(sentences, tag=tag, jobs=jobs)
    if not tag and args.level:
        out = [[tag_cohort(c, level, params, tagset) for c in s] for s in out]
    tagged = tag or bool(args.level)
    if args.format == "lines":
        text = _format_lines(out, tagged)
    else:
        buf = io.StringIO()
        corpus = AnnotatedCorpus(out, level if tagged else None,
                                 params or (tuple(tagset.level3_default_params)
                                            if tagged and level == 3 else ()))
        write_cohorts(corpus, buf)
        text = buf.getvalue() if out else ""
    _emit(text, args.output)


def cmd_analyze(args) -> None:
    _run_text(args, tag=False)


def cmd_tag(args) -> None:
    _run_text(args, tag=True)


def _spec(raw: str) -> dict[str, str]:
    out = {}
    for item in raw.split(","):
        k, sep, v = item.strip().partition("=")
        if not sep or not k or not v:
            raise UsageError(f"bad --spec item {item!r} (expected key=value)")
        out[k] = v
    return out


def cmd_generate(args) -> None:
    if args.depth < 0:
        raise UsageError("--depth must be >= 0")
    if args.count_only and args.spec:
        raise UsageError("--count-only cannot be combined with --spec")
    tagset = _tagset(args)
    if args.max_ellipsis is None and not args.net:
        args.max_ellipsis = max(2, args.depth)
    net = _network(args, tagset)
    if args.depth > net.max_ellipsis_depth:
        raise UsageError(f"--depth {args.depth} exceeds the network's compiled depth "
                         f"{net.max_ellipsis_depth}")
    if args.spec:
        forms = generate(args.lemma, _spec(args.spec), net, net.rules, args.depth)
        _emit("".join(f + "\n" for f in forms), args.output)
        return
    report = enumerate_inflections(args.lemma, args.depth, net, net.rules,
                                   count_only=args.count_only, category=args.category)
    head = (f"total={report.total} closed={report.closed_count} "
            f"genitive={report.genitive_bearing_count}\n")
    if args.count_only:
        _emit(head, args.output)
        return
    lines = []
    for cell in sorted(report.forms, key=lambda c: (c.surfaces, c.lexical, c.features)):
        feats = " ".join(f"{k}={v}" for k, v in cell.features)
        for i, slot in enumerate(cell.ellipsis_chain, 1):
            feats += f" E{i}:" + ",".join(f"{k}={v}" for k, v in slot.inflection)
        lines.append(f"{'/'.join(cell.surfaces)}\t{cell.lexical}\t{feats}\n")
    _emit("".join(lines), args.output)


def _corpus(path: str) -> AnnotatedCorpus:
    return read_cohorts(read_text(path), source=path)


def cmd_train(args) -> None:
    params = _params(args)
    lam = _lambda(args.lam)
    tagset = _tagset(args)
    gold = _corpus(args.gold)
    model = train_model(gold, order=args.order, level=args.level or 2, params=params,
                        lam=lam, tagset=tagset)
    _emit(dump_model(model), args.output)


def _lambda(raw: str):
    try:
        lam = Fraction(raw)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"--lambda expects a number, got {raw!r}") from None
    if lam <= 0:
        raise UsageError("--lambda must be > 0")
    return lam


def cmd_stats(args) -> None:
    corpus = _corpus(args.corpus)
    if not corpus.cohorts:
        raise EuslemError(f"{args.corpus}: corpus has no tokens")
    _emit(ambiguity_stats(corpus).table(), args.output)


def cmd_eval(args) -> None:
    params = _params(args)
    tagset = _tagset(args)
    gold, system = _corpus(args.gold), _corpus(args.system)
    level = args.level or 2
    report = evaluate(gold, system, level, params, tagset)
    _emit(report.table(), args.output)


HANDLERS = {
    "compile": cmd_compile, "analyze": cmd_analyze, "tag": cmd_tag,
    "generate": cmd_generate, "train": cmd_train, "stats": cmd_stats, "eval": cmd_eval,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required: " + ", ".join(COMMANDS))
        HANDLERS[args.command](args)
    except UsageError as exc:
        print(f"euslem: usage error: {exc}", file=sys.stderr)
        return 1
    except (EuslemError, ValueError) as exc:
        print(f"euslem: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        where = f"{exc.filename}: " if exc.filename else ""
        print(f"euslem: error: {where}{exc.strerror or exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
