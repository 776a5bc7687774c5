"""Lexicon files and their compilation into a morphotactic network.

A lexicon is a set of named sublexicons.  Each entry spells a lexical form
and names the sublexicon that may follow it (its continuation class), or
``#`` to end the word.  Compilation turns every sublexicon into a trie over
lexical symbols and links entry exits to the tries they continue into.
Entries that close a word with a genitive case additionally get a re-entry
link back into the declension sublexicon, which is how intraword noun
ellipsis (``seme-a-r-en-ϵ-a``) is licensed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .errors import LexiconError
from .twolevel import RuleSet

END = "#"
GENITIVE_CASES = frozenset({"GEN", "GEL"})
DEFAULT_OPEN_CATEGORIES = frozenset({"NOUN", "VERB", "ADJECTIVE"})


@dataclass(frozen=True)
class LexEntry:
    lexical_form: tuple[str, ...]
    lemma: str
    gloss: str
    category: str | None
    subcategory: str | None
    features: tuple[tuple[str, str], ...]
    continuation: str
    standard: bool = True
    sublexicon: str = ""
    line: int | None = None

    @property
    def feats(self) -> dict[str, str]:
        return dict(self.features)

    @property
    def form_text(self) -> str:
        return "".join(self.lexical_form)

    @property
    def role(self) -> str:
        f = self.feats
        if "deriv" in f:
            return "derivation"
        if self.lemma:
            return "stem"
        if f or self.category:
            return "inflection"
        return "boundary"

    @property
    def case(self) -> str | None:
        return self.feats.get("case")


@dataclass(frozen=True)
class Sublexicon:
    name: str
    entries: tuple[LexEntry, ...]


@dataclass(frozen=True)
class GenericLemma:
    """Guesser lemma: any stem matching ``pattern`` gets ``category``."""

    category: str
    pattern: str
    continuation: str
    line: int | None = None

    @property
    def regex(self) -> re.Pattern:
        return _pattern_regex(self.pattern)


@dataclass(frozen=True)
class Lexicon:
    sublexicons: tuple[Sublexicon, ...]
    root: str
    reentry: str | None = None
    generics: tuple[GenericLemma, ...] = ()
    categories: frozenset[str] | None = None

    def sublexicon(self, name: str) -> Sublexicon:
        for s in self.sublexicons:
            if s.name == name:
                return s
        raise KeyError(name)

    @property
    def names(self) -> list[str]:
        return [s.name for s in self.sublexicons]

    def entries(self) -> Iterable[LexEntry]:
        for s in self.sublexicons:
            yield from s.entries


@dataclass(frozen=True)
class Diagnostic:
    level: str  # "warning" | "error"
    message: str
    line: int | None = None

    def __str__(self) -> str:
        at = f"line {self.line}: " if self.line else ""
        return f"{self.level}: {at}{self.message}"


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r'"(?:[^"\\]|\\.)*"|(?:%.|[^\s%";])+|;')


def _symbols(text: str) -> tuple[str, ...]:
    if text == "0":
        return ()
    out = []
    i = 0
    while i < len(text):
        if text[i] == "%" and i + 1 < len(text):
            out.append(text[i + 1])
            i += 2
        else:
            out.append(text[i])
            i += 1
    return tuple(out)


def _strip_comment(line: str) -> str:
    in_str = False
    i = 0
    while i < len(line):
        c = line[i]
        if c == "%":
            i += 2
            continue
        if c == '"':
            in_str = not in_str
        elif c == "#" and not in_str:
            # '#' directly after '->' is the end marker, not a comment
            if not line[:i].rstrip().endswith("->"):
                return line[:i]
        i += 1
    return line


def parse_lexicon(text: str, categories: Iterable[str] | None = None,
                  source: str | None = None) -> Lexicon:
    """Parse lexicon-file contents.

    ``categories`` (when given) is the inventory that ``CAT=`` values must
    come from.
    """
    cats = frozenset(categories) if categories is not None else None
    root: str | None = None
    reentry: tuple[str, int] | None = None
    sections: list[tuple[str, int, list[LexEntry]]] = []
    generics: list[GenericLemma] = []
    conts: list[tuple[str, int, int]] = []

    def err(msg, line=None, col=None):
        return LexiconError(msg, line, col, source)

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        toks = [(m.group(0), m.start() + 1) for m in _TOKEN.finditer(line)]
        head = toks[0][0]
        if head == "SUBLEXICON":
            if len(toks) != 2:
                raise err("expected 'SUBLEXICON <Name>'", lineno)
            name = toks[1][0]
            if any(name == s[0] for s in sections):
                raise err(f"sublexicon {name!r} declared twice", lineno, toks[1][1])
            sections.append((name, lineno, []))
            continue
        if toks[-1][0] != ";":
            raise err("missing ';'", lineno, len(line))
        toks = toks[:-1]
        if head == "ROOT":
            if len(toks) != 2:
                raise err("expected 'ROOT <Name> ;'", lineno)
            root = toks[1][0]
            continue
        if head == "REENTRY":
            if len(toks) != 2:
                raise err("expected 'REENTRY <Name> ;'", lineno)
            reentry = (toks[1][0], lineno)
            continue
        if head == "GENERIC":
            generics.append(_parse_generic(line, lineno, err))
            conts.append((generics[-1].continuation, lineno, 1))
            continue
        if not sections:
            raise err("entry outside any SUBLEXICON", lineno, 1)
        entry = _parse_entry(toks, lineno, sections[-1][0], err)
        if cats is not None and entry.category is not None and entry.category not in cats:
            raise err(f"unknown category {entry.category!r}", lineno)
        sections[-1][2].append(entry)
        conts.append((entry.continuation, lineno, toks[-1][1]))

    if not sections:
        raise err("no root sublexicon")
    names = {s[0] for s in sections}
    for cont, lineno, col in conts:
        if cont != END and cont not in names:
            raise err(f"unknown continuation {cont!r}", lineno, col)
    if root is None:
        root = sections[0][0]
    elif root not in names:
        raise err(f"root sublexicon {root!r} is not declared")
    reentry_name = None
    if reentry is not None:
        if reentry[0] not in names:
            raise err(f"re-entry sublexicon {reentry[0]!r} is not declared", reentry[1])
        reentry_name = reentry[0]
    elif "Decl" in names:
        reentry_name = "Decl"
    seen: dict[tuple, int] = {}
    for name, _, entries in sections:
        for e in entries:
            key = (name, e.lexical_form, e.continuation)
            if key in seen:
                raise err(f"duplicate entry {e.form_text or '0'!r} -> {e.continuation} "
                          f"in {name} (first on line {seen[key]})", e.line)
            seen[key] = e.line
    subs = tuple(Sublexicon(n, tuple(es)) for n, _, es in sections)
    return Lexicon(subs, root, reentry_name, tuple(generics), cats)


def _parse_entry(toks, lineno, sublex, err) -> LexEntry:
    form_tok = toks[0][0]
    if form_tok.startswith('"'):
        raise err("entry must start with a lexical form", lineno, toks[0][1])
    form = _symbols(form_tok)
    i = 1
    quoted = ""
    cat = sub = None
    feats: list[tuple[str, str]] = []
    standard = True
    if i < len(toks) and toks[i][0].startswith('"'):
        quoted = toks[i][0][1:-1]
        i += 1
    in_f = False
    while i < len(toks) and toks[i][0] != "->":
        tok, col = toks[i]
        if tok.startswith("CAT="):
            cat, in_f = tok[4:], False
        elif tok.startswith("SUB="):
            sub, in_f = tok[4:], False
        elif tok == "F":
            in_f = True
        elif tok == "NONSTD":
            standard, in_f = False, False
        elif in_f and "=" in tok:
            k, v = tok.split("=", 1)
            if not k or not v:
                raise err(f"bad feature {tok!r}", lineno, col)
            feats.append((k, v))
        else:
            raise err(f"unexpected token {tok!r}", lineno, col)
        i += 1
    if i >= len(toks) or toks[i][0] != "->":
        raise err("expected '-> <Continuation>'", lineno)
    if i + 2 != len(toks):
        raise err("expected exactly one continuation after '->'", lineno, toks[i][1])
    cont = toks[i + 1][0]
    keys = [k for k, _ in feats]
    if len(set(keys)) != len(keys):
        raise err("repeated feature key", lineno)
    is_stem = cat is not None and "deriv" not in keys
    lemma = "".join(form) if is_stem else ""
    if is_stem and not lemma:
        raise err("a lemma entry needs a nonempty lexical form", lineno)
    if sub is not None and cat is None:
        raise err("SUB= requires CAT=", lineno)
    return LexEntry(form, lemma, quoted, cat, sub, tuple(sorted(feats)), cont, standard,
                    sublex, lineno)


def _parse_generic(line: str, lineno: int, err) -> GenericLemma:
    m = re.fullmatch(r"GENERIC\s+CAT=(\S+)\s+PATTERN=(.+?)\s*->\s*(\S+)\s*;", line)
    if not m:
        raise err("expected 'GENERIC CAT=<id> PATTERN=<pattern> -> <Continuation> ;'", lineno)
    pattern = m.group(2).strip()
    try:
        _pattern_regex(pattern)
    except (re.error, ValueError) as exc:
        raise err(f"bad guesser pattern {pattern!r}: {exc}", lineno) from None
    return GenericLemma(m.group(1), pattern, m.group(3), lineno)


def _pattern_regex(pattern: str) -> re.Pattern:
    """Translate a guesser pattern into a regular expression.

    Items: a letter, ``.`` (any letter), ``[abc]`` (one of), each optionally
    followed by ``*`` or ``+``; ``(item)`` marks an optional item.
    """
    out = []
    for tok in pattern.split():
        rep = ""
        opt = tok.startswith("(") and tok.endswith(")")
        if opt:
            tok = tok[1:-1]
        if len(tok) > 1 and tok[-1] in "*+":
            tok, rep = tok[:-1], tok[-1]
        if tok == ".":
            atom = r"[^\W\d_]"
        elif re.fullmatch(r"\[[^\]]+\]", tok):
            atom = "[" + re.escape(tok[1:-1]) + "]"
        elif len(tok) == 1:
            atom = re.escape(tok)
        else:
            raise ValueError(f"bad pattern item {tok!r}")
        out.append(f"(?:{atom}{rep})?" if opt else atom + rep)
    if not out:
        raise ValueError("empty pattern")
    return re.compile("".join(out))


# ---------------------------------------------------------------------------
# validation

def validate_lexicon(lex: Lexicon) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    names = lex.names
    # reachability from root (generic continuations and re-entry count as references)
    edges: dict[str, set[str]] = {n: set() for n in names}
    for s in lex.sublexicons:
        for e in s.entries:
            if e.continuation != END:
                edges[s.name].add(e.continuation)
    reached = {lex.root}
    todo = [lex.root]
    extra = [g.continuation for g in lex.generics]
    if lex.reentry:
        extra.append(lex.reentry)
    for n in extra:
        if n not in reached:
            reached.add(n)
            todo.append(n)
    while todo:
        n = todo.pop()
        for d in edges[n]:
            if d not in reached:
                reached.add(d)
                todo.append(d)
    for s in lex.sublexicons:
        if s.name not in reached:
            diags.append(Diagnostic("warning", f"sublexicon {s.name!r} is unreachable from root"))
    # shadowing: a non-standard entry identical to a standard one never adds a reading
    for s in lex.sublexicons:
        std = {(e.lexical_form, e.lemma, e.category, e.subcategory, e.features, e.continuation)
               for e in s.entries if e.standard}
        for e in s.entries:
            key = (e.lexical_form, e.lemma, e.category, e.subcategory, e.features, e.continuation)
            if not e.standard and key in std:
                diags.append(Diagnostic(
                    "warning", f"non-standard entry {e.form_text!r} in {s.name} is shadowed "
                    "by an identical standard entry", e.line))
    for cycle in _zero_length_cycles(lex):
        diags.append(Diagnostic("error", "zero-length continuation cycle: " + " -> ".join(cycle)))
    return diags


def _zero_length_cycles(lex: Lexicon) -> list[list[str]]:
    """Cycles through sublexicons using only empty-form entries."""
    graph: dict[str, list[str]] = {n: [] for n in lex.names}
    for s in lex.sublexicons:
        for e in s.entries:
            if not e.lexical_form and e.continuation != END:
                graph[s.name].append(e.continuation)
    cycles = []
    color = {n: 0 for n in graph}
    stack: list[str] = []

    def visit(n):
        color[n] = 1
        stack.append(n)
        for d in graph[n]:
            if color[d] == 1:
                cycles.append(stack[stack.index(d):] + [d])
            elif color[d] == 0:
                visit(d)
        stack.pop()
        color[n] = 2

    for n in graph:
        if color[n] == 0:
            visit(n)
    return cycles


# ---------------------------------------------------------------------------
# network

@dataclass(frozen=True)
class MorphNetwork:
    """Tries over lexical symbols joined by continuation links.

    Node ids index ``children`` and ``exits``.  ``cont_node[e]`` is the trie
    root entry ``e`` continues into, or -1 for the end marker.
    """

    lexicon: Lexicon
    rules: RuleSet
    entries: tuple[LexEntry, ...]
    children: tuple[dict, ...]
    exits: tuple[tuple[int, ...], ...]
    cont_node: tuple[int, ...]
    sublex_root: dict
    root_node: int
    genitive_entries: frozenset[int]
    reentry: dict
    max_ellipsis_depth: int
    generics: tuple[GenericLemma, ...] = ()
    open_categories: frozenset[str] = DEFAULT_OPEN_CATEGORIES

    @property
    def n_nodes(self) -> int:
        return len(self.children)

    @property
    def reentry_node(self) -> int | None:
        if self.lexicon.reentry is None:
            return None
        return self.sublex_root[self.lexicon.reentry]

    def entries_for_lemma(self, lemma: str) -> list[int]:
        return [i for i, e in enumerate(self.entries) if e.lemma == lemma]

    def node_entries(self, node: int) -> tuple[int, ...]:
        """Every entry reachable inside the trie below ``node``."""
        table = self.__dict__.get("_below")
        if table is None:
            table = {}
            object.__setattr__(self, "_below", table)
        hit = table.get(node)
        if hit is None:
            out = []
            todo = [node]
            while todo:
                n = todo.pop()
                out.extend(self.exits[n])
                todo.extend(self.children[n].values())
            hit = table[node] = tuple(sorted(out))
        return hit

    def count_paths(self, node: int, budget: int = 0, standard: bool = True,
                    _memo: dict | None = None) -> tuple[int, int]:
        """Count paths from trie root ``node`` to the end marker.

        Returns ``(total, genitive_bearing)`` where both count paths using at
        most ``budget`` re-entries and the second counts only those ending
        at a genitive exit.
        """
        memo = {} if _memo is None else _memo
        key = (node, budget)
        if key in memo:
            return memo[key]
        total = gen = 0
        for e in self.node_entries(node):
            entry = self.entries[e]
            if standard and not entry.standard:
                continue
            nxt = self.cont_node[e]
            if nxt < 0:
                total += 1
                if e in self.genitive_entries:
                    gen += 1
                    if budget > 0 and e in self.reentry:
                        t, g = self.count_paths(self.reentry[e], budget - 1, standard, memo)
                        total += t
                        gen += g
            else:
                t, g = self.count_paths(nxt, budget, standard, memo)
                total += t
                gen += g
        memo[key] = (total, gen)
        return memo[key]

    def count_links(self) -> int:
        return len(self.reentry)


def compile_network(lex: Lexicon, rules: RuleSet, max_ellipsis_depth: int = 2,
                    genitive_cases: Iterable[str] = GENITIVE_CASES) -> MorphNetwork:
    if max_ellipsis_depth < 0:
        raise ValueError("max_ellipsis_depth must be >= 0")
    cycles = _zero_length_cycles(lex)
    if cycles:
        raise LexiconError("zero-length continuation cycle: " + " -> ".join(cycles[0]))
    gcases = frozenset(genitive_cases)
    lex_alpha = rules.lexical_alphabet(variants=True)
    entries: list[LexEntry] = []
    children: list[dict] = []
    exits: list[list[int]] = []
    sublex_root = {}
    for s in lex.sublexicons:
        root = len(children)
        children.append({})
        exits.append([])
        sublex_root[s.name] = root
        for e in s.entries:
            for sym in e.lexical_form:
                if sym not in lex_alpha:
                    raise LexiconError(f"symbol {sym!r} in {e.form_text!r} has no feasible pair",
                                       e.line)
            node = root
            for sym in e.lexical_form:
                nxt = children[node].get(sym)
                if nxt is None:
                    nxt = len(children)
                    children.append({})
                    exits.append([])
                    children[node][sym] = nxt
                node = nxt
            exits[node].append(len(entries))
            entries.append(e)
    cont_node = tuple(-1 if e.continuation == END else sublex_root[e.continuation]
                      for e in entries)
    genitive = frozenset(
        i for i, e in enumerate(entries)
        if e.continuation == END and e.case is not None
        and e.case.split("+")[-1] in gcases)
    reentry = {}
    if max_ellipsis_depth > 0 and lex.reentry is not None:
        target = sublex_root[lex.reentry]
        reentry = {i: target for i in sorted(genitive)}
    return MorphNetwork(lex, rules, tuple(entries), tuple(children),
                        tuple(tuple(x) for x in exits), cont_node, sublex_root,
                        sublex_root[lex.root], genitive, reentry, max_ellipsis_depth)


def attach_guesser(net: MorphNetwork, generics: Sequence[GenericLemma],
                   open_categories: Iterable[str] = DEFAULT_OPEN_CATEGORIES) -> MorphNetwork:
    """Return a copy of ``net`` with guesser arcs for ``generics``."""
    opened = frozenset(open_categories)
    for g in generics:
        if g.category not in opened:
            raise LexiconError(f"generic lemma for closed category {g.category!r}", g.line)
        if g.continuation != END and g.continuation not in net.sublex_root:
            raise LexiconError(f"unknown continuation {g.continuation!r}", g.line)
    if not generics:
        return net
    return replace(net, generics=net.generics + tuple(generics), open_categories=opened)


def detach_guesser(net: MorphNetwork) -> MorphNetwork:
    return replace(net, generics=())
