"""Morphological analysis and generation.

Analysis walks the morphotactic network and the combined two-level rule
automaton in lockstep, consuming one lexical/surface pair per step, so every
reading returned is both a network path and a licensed pairing with the
word.  Genitive exits may re-enter declension (bounded by the ellipsis
depth); each re-entry normally introduces an elided noun, recorded as an
:class:`EllipsisSlot` on the word-level analysis.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

from .errors import UnanalyzableWord, UnknownLemma
from .lexicon import END, MorphNetwork
from .readings import Analysis, Cohort, EllipsisSlot, MorphemeSegment, Reading, freeze
from .twolevel import RuleSet

REENTRY = "R"


@dataclass(frozen=True)
class AnalyzerConfig:
    max_ellipsis_depth: int = 2
    allow_variants: bool = False
    allow_guesser: bool = False
    max_null_run: int = 3
    elided_category: str = "NOUN"
    # genitives after which re-entry may also be read without an elided noun
    optional_ellipsis_cases: frozenset[str] = frozenset({"GEL"})
    # (stem category, derivational suffix gloss) -> composed category
    derivation_map: Mapping[tuple[str, str], str] = field(default_factory=dict)

    def __post_init__(self):
        if self.max_ellipsis_depth < 0:
            raise ValueError("max_ellipsis_depth must be >= 0")
        if self.max_null_run < 0:
            raise ValueError("max_null_run must be >= 0")


# ---------------------------------------------------------------------------
# the search

class _Tables:
    """Per (rules, mode) lookup tables for the inner loop."""

    _cache: dict = {}

    def __new__(cls, rules: RuleSet, variants: bool):
        key = (id(rules), variants)
        hit = cls._cache.get(key)
        if hit is not None and hit.rules is rules:
            return hit
        self = super().__new__(cls)
        self.rules = rules
        dfa, dead = rules.automaton(variants)
        self.table = dfa.table
        self.start = dfa.start
        self.finals = dfa.finals
        self.dead = dead
        feas = rules.feasible(variants)
        self.by_lex: dict[str, list[tuple[int, str | None]]] = {}
        self.inserts: list[tuple[int, str]] = []
        for p in rules.alphabet:
            if p not in feas:
                continue
            pid = rules.index[p]
            if p.lexical is None:
                self.inserts.append((pid, p.surface))
            else:
                self.by_lex.setdefault(p.lexical, []).append((pid, p.surface))
        self.surface = rules.surface_alphabet(variants)
        # generation memo: (q, lrun, srun, symbols, limit) -> reachable suffix configs
        self.steps: dict = {}
        self.tail_steps: dict = {}
        self._arcs: dict = {}
        cls._cache[key] = self
        return self

    def node_arcs(self, net) -> list[tuple[dict, list]]:
        """Per trie node: arcs keyed by surface symbol, plus deletion arcs."""
        hit = self._arcs.get(id(net.children))
        if hit is None or hit[0] is not net.children:
            table = []
            for kids in net.children:
                by_surf: dict[str, list] = {}
                nulls = []
                for sym, child in kids.items():
                    for pid, surf in self.by_lex.get(sym, ()):
                        if surf is None:
                            nulls.append((child, pid))
                        else:
                            by_surf.setdefault(surf, []).append((child, pid))
                table.append((by_surf, nulls))
            hit = self._arcs[id(net.children)] = (net.children, table)
        return hit[1]


class _TailTables:
    """Surface-tail lookup tables for small continuation subgraphs.

    Without insertion pairs, everything a word can still do after entering
    a sublexicon depends only on the automaton state, the deletion run and
    the re-entry budget.  For subgraphs with few paths we enumerate them
    once, forward, and index the resulting paths by surface tail, so
    analysis reduces to walking the stem and one dictionary lookup.
    Offsets in stored paths are relative to the entry point.
    """

    max_paths = 20_000

    def __init__(self):
        self._owner: tuple | None = None  # (network, rules)
        self.tables: dict = {}
        self.counts: dict = {}

    def bind(self, net, rules) -> _TailTables:
        owner = self._owner
        if owner is None or owner[0] is not net or owner[1] is not rules:
            self._owner = (net, rules)
            self.tables = {}
            self.counts = {}
        return self

    def get(self, net, t, node, q, srun, budget, limit, variants) -> dict | None:
        key = (node, q, srun, budget, limit)
        table = self.tables.get(key)
        if table is None:
            n_paths = net.count_paths(node, budget, standard=not variants, _memo=self.counts)[0]
            if n_paths > self.max_paths:
                table = False
            else:
                table = _tail_table(net, t, node, q, srun, budget, limit, variants)
            self.tables[key] = table
        return table or None


_tail_tables = {False: _TailTables(), True: _TailTables()}


def _tail_table(net, t, node, q0, srun0, budget, limit, variants) -> dict:
    table, dead, finals, by_lex = t.table, t.dead, t.finals, t.by_lex
    entries, cont_node, reentry = net.entries, net.cont_node, net.reentry
    out: dict[str, list] = {}

    def advance(configs, symbols):
        for sym in symbols:
            nxt = []
            for q, srun, surf in configs:
                for pid, ch in by_lex.get(sym, ()):
                    nq = table[q][pid]
                    if nq in dead:
                        continue
                    if ch is None:
                        if srun < limit:
                            nxt.append((nq, srun + 1, surf))
                    else:
                        nxt.append((nq, 0, surf + ch))
            configs = nxt
        return configs

    def from_node(node, budget, path, configs):
        for e in net.node_entries(node):
            if variants or entries[e].standard:
                from_entry(e, budget, path, configs)

    steps = t.tail_steps

    def from_entry(e, budget, path, configs):
        new = []
        form = entries[e].lexical_form
        for q, srun, surf, items in configs:
            start = len(surf)
            key = (q, srun, form, limit)
            tail = steps.get(key)
            if tail is None:
                tail = steps[key] = tuple(advance([(q, srun, "")], form))
            for nq, nsrun, suffix in tail:
                end = start + len(suffix)
                new.append((nq, nsrun, surf + suffix, items + ((e, start, end),)))
        if not new:
            return
        nxt = cont_node[e]
        if nxt < 0:
            for q, _, surf, items in new:
                if q in finals:
                    out.setdefault(surf, []).append(items)
            if budget > 0 and e in reentry:
                from_node(reentry[e], budget - 1, path,
                          [(q, sr, surf, items + (REENTRY,)) for q, sr, surf, items in new])
        else:
            from_node(nxt, budget, path, new)

    from_node(node, budget, (), [(q0, srun0, "", ())])
    return {k: tuple(v) for k, v in out.items()}


def _shift(path: tuple, by: int) -> tuple:
    return tuple(x if x == REENTRY else (x[0], x[1] + by, x[2] + by) for x in path)


def _search(word: str, net: MorphNetwork, rules: RuleSet, *, variants: bool, budget: int,
            max_null_run: int, guesser: bool) -> list[tuple]:
    """All network paths whose pairing with ``word`` the rules accept.

    A path is a tuple of items: ``(entry_id, start, end)``, the re-entry
    marker, or ``("G", generic_index, start, end)`` for a guessed stem.
    """
    t = _Tables(rules, variants)
    table, dead, finals = t.table, t.dead, t.finals
    by_lex, inserts = t.by_lex, t.inserts
    node_arcs = t.node_arcs(net)
    exits, cont_node = net.exits, net.cont_node
    entries, reentry = net.entries, net.reentry
    tails = None if inserts else _tail_tables[variants].bind(net, rules)
    n = len(word)

    def enter(node, i, q, lrun, srun, budget):
        if tails is not None:
            tab = tails.get(net, t, node, q, srun, budget, max_null_run, variants)
            if tab is not None:
                hit = tab.get(word[i:], ())
                return [_shift(p, i) for p in hit] if i else list(hit)
        return walk(node, i, q, lrun, srun, budget, i)

    def walk(node, i, q, lrun, srun, budget, seg_start):
        out = []
        for e in exits[node]:
            if not variants and not entries[e].standard:
                continue
            item = (e, seg_start, i)
            nxt = cont_node[e]
            if nxt < 0:
                if i == n and q in finals:
                    out.append((item,))
                if budget > 0 and e in reentry:
                    for rest in enter(reentry[e], i, q, lrun, srun, budget - 1):
                        out.append((item, REENTRY) + rest)
            else:
                for rest in enter(nxt, i, q, lrun, srun, budget):
                    out.append((item,) + rest)
        if i < n:
            c = word[i]
            if inserts and lrun < max_null_run:
                for pid, surf in inserts:
                    if surf == c:
                        nq = table[q][pid]
                        if nq not in dead:
                            out += walk(node, i + 1, nq, lrun + 1, 0, budget, seg_start)
        else:
            c = None
        by_surf, nulls = node_arcs[node]
        if nulls and srun < max_null_run:
            for child, pid in nulls:
                nq = table[q][pid]
                if nq not in dead:
                    out += walk(child, i, nq, 0, srun + 1, budget, seg_start)
        if c is not None:
            for child, pid in by_surf.get(c, ()):
                nq = table[q][pid]
                if nq not in dead:
                    out += walk(child, i + 1, nq, 0, 0, budget, seg_start)
        return out

    if not guesser:
        return walk(net.root_node, 0, t.start, 0, 0, budget, 0)
    results = []
    for gi, g in enumerate(net.generics):
        rx = g.regex
        nxt = -1 if g.continuation == END else net.sublex_root[g.continuation]
        q = t.start
        for k in range(1, n + 1):
            opts = by_lex.get(word[k - 1], ())
            pid = next((p for p, s in opts if s == word[k - 1]), None)
            if pid is None:
                break
            q = table[q][pid]
            if q in dead:
                break
            if not rx.fullmatch(word[:k]):
                continue
            item = ("G", gi, 0, k)
            if nxt < 0:
                if k == n and q in finals:
                    results.append((item,))
            else:
                results += [(item,) + rest for rest in enter(nxt, k, q, 0, 0, budget)]
    return results


# ---------------------------------------------------------------------------
# building analyses from paths

def _merge(into: dict, feats: Iterable[tuple[str, str]]) -> None:
    for k, v in feats:
        if k == "case" and "case" in into:
            into[k] = into[k] + "+" + v
        else:
            into[k] = v


class _Info(NamedTuple):
    role: str
    lemma: str | None
    category: str | None
    subcategory: str | None
    features: tuple
    deriv: str | None
    standard: bool
    form: str
    gloss: str
    last_case: str
    all_features: tuple
    # shared fold key for stems with the same category signature
    stem_key: tuple | None


_info_cache: dict = {}


def _entry_info(net: MorphNetwork) -> list[_Info]:
    hit = _info_cache.get(id(net.entries))
    if hit is not None and hit[0] is net.entries:
        return hit[1]
    infos = []
    for e in net.entries:
        feats = e.feats
        infos.append(_Info(e.role, e.lemma, e.category, e.subcategory,
                           tuple(kv for kv in e.features if kv[0] != "deriv"),
                           feats.get("deriv"), e.standard, e.form_text, e.gloss,
                           (e.case or "").split("+")[-1], e.features,
                           ("stem", e.category, e.subcategory, e.features, e.standard)
                           if e.role == "stem" else None))
    _info_cache.clear()
    _info_cache[id(net.entries)] = (net.entries, infos)
    return infos


def _apply(info: _Info, main: dict, current: dict, cfg: AnalyzerConfig) -> str | None:
    """Fold one entry into the feature dicts; returns a composed category if any."""
    role = info.role
    if role == "stem":
        main["category"] = info.category
        if info.subcategory:
            main["subcategory"] = info.subcategory
        main.update(info.features)
    elif role == "derivation":
        derived = cfg.derivation_map.get((main.get("category"), info.deriv))
        if info.category:
            main["category"] = info.category
            main.pop("subcategory", None)
        if info.subcategory:
            main["subcategory"] = info.subcategory
        _merge(main, info.features)
        main["deriv"] = info.deriv
        return derived
    else:
        _merge(current, info.features)
    return None


def _expand(items: tuple, net: MorphNetwork, cfg: AnalyzerConfig, word: str | None,
            source: str, cap: bool) -> list[Analysis]:
    """All analyses for one path (optional-ellipsis re-entries fork in two)."""
    infos = _entry_info(net)
    memo = _build_cache.bind(net, cfg)
    if REENTRY not in items:
        return [_build(items, (), infos, net, cfg, word, source, cap, memo)]
    choices = []
    prev = ""
    for item in items:
        if item == REENTRY:
            choices.append((True, False) if prev in cfg.optional_ellipsis_cases else (True,))
        elif item[0] != "G":
            prev = infos[item[0]].last_case
    return [_build(items, combo, infos, net, cfg, word, source, cap, memo)
            for combo in itertools.product(*choices)]


def _fold(items, ellipsis_choice, infos, net, cfg):
    """Word features, ellipsis chain, composed category and standardness of a path."""
    main: dict[str, str] = {}
    slots: list[dict] = []
    current = main
    derived = None
    standard = True
    k = 0
    for item in items:
        if item == REENTRY:
            if ellipsis_choice[k]:
                slots.append({})
                current = slots[-1]
            else:
                current = main
            k += 1
        elif item[0] == "G":
            main["category"] = net.generics[item[1]].category
        else:
            info = infos[item[0]]
            if not info.standard:
                standard = False
            derived = _apply(info, main, current, cfg) or derived
    chain = tuple(EllipsisSlot(cfg.elided_category, freeze(s)) for s in slots)
    return main, chain, derived, standard


class _BuildCache:
    """Memo for folds and segments, bound to one network and config."""

    limit = 200_000

    def __init__(self):
        self.owner = None
        self.folds: dict = {}
        self.segments: dict = {}

    def bind(self, net, cfg) -> _BuildCache:
        owner = self.owner
        if owner is not None and owner[0] is net and owner[1] is cfg \
                and len(self.folds) <= self.limit and len(self.segments) <= self.limit:
            return self
        # folding only reads the derivation map and the elided category
        sig = (cfg.elided_category, tuple(sorted(cfg.derivation_map.items())))
        if owner is None or owner[0] is not net or owner[2] != sig \
                or len(self.folds) > self.limit or len(self.segments) > self.limit:
            self.folds = {}
            # the re-entry marker maps to itself in both tables (REENTRY[0] is REENTRY)
            self.segments = {REENTRY: (None, None)}
            self.fold_keys = {e: info.stem_key or e for e, info in enumerate(_entry_info(net))}
            self.fold_keys[REENTRY] = REENTRY
        self.owner = (net, cfg, sig)
        return self


_build_cache = _BuildCache()


def _build(items, ellipsis_choice, infos, net, cfg, word, source, cap, memo=None) -> Analysis:
    memo = memo or _build_cache.bind(net, cfg)
    fk = memo.fold_keys
    # stems fold identically when their category signature matches
    if source == "guesser":
        key = tuple([x if x == REENTRY else ("G", x[1]) if x[0] == "G" else fk[x[0]]
                     for x in items])
    else:
        key = tuple([fk[x[0]] for x in items])
    hit = memo.folds.get((key, ellipsis_choice))
    if hit is None:
        main, chain, derived, standard = _fold(items, ellipsis_choice, infos, net, cfg)
        hit = memo.folds[(key, ellipsis_choice)] = (freeze(main), main, chain, derived,
                                                    standard)
    feats, main, chain, derived, standard = hit
    if cap:
        feats = freeze({**main, "CAP": "yes"})
    lemma = ""
    segments = []
    segs = memo.segments
    for item in items:
        got = segs.get(item)
        if got is None:
            if item[0] == "G":
                _, gi, a, b = item
                lemma = word[a:b] if word is not None else ""
                segments.append(MorphemeSegment(
                    lemma, (a, b), "generic " + net.generics[gi].category.lower(), (), "stem"))
                continue
            e, a, b = item
            info = infos[e]
            got = segs[item] = (MorphemeSegment(info.form, (a, b), info.gloss,
                                                info.all_features, info.role),
                                info.lemma if info.role == "stem" else None)
        seg, stem_lemma = got
        if seg is None:
            continue
        if stem_lemma is not None:
            lemma = stem_lemma
        segments.append(seg)
    if source == "variant":
        standard = False
    return Analysis(lemma, tuple(segments), feats, chain, None, derived, source, standard)


def _sort_key(a: Analysis):
    # lemma, segments, features and ellipsis chain are plain comparable tuples
    return (a[:4], a.derived_category or "", a.source, a.standard)


def _prepare(word: str, rules: RuleSet, variants: bool) -> tuple[str, bool]:
    if not word:
        raise ValueError("empty input")
    cap = word[0].isupper()
    w = word[0].lower() + word[1:] if cap else word
    bad = set(w) - rules.surface_alphabet(variants)
    if bad:
        bad = sorted(bad)
        raise UnanalyzableWord(f"{word!r} contains symbols outside the surface alphabet: "
                               + " ".join(repr(c) for c in bad))
    return w, cap


def _check_depth(net: MorphNetwork, cfg: AnalyzerConfig) -> None:
    if cfg.max_ellipsis_depth > net.max_ellipsis_depth:
        raise ValueError(f"network compiled for ellipsis depth {net.max_ellipsis_depth}, "
                         f"config asks for {cfg.max_ellipsis_depth}")


def _run(w, cap, net, rules, cfg, *, variants, guesser, source) -> list[Analysis]:
    paths = _search(w, net, rules, variants=variants, budget=cfg.max_ellipsis_depth,
                    max_null_run=cfg.max_null_run, guesser=guesser)
    found = {}
    for items in paths:
        for a in _expand(items, net, cfg, w, source, cap):
            found[a] = None
    return sorted(found, key=_sort_key) if len(found) > 1 else list(found)


def analyze(word: str, net: MorphNetwork, rules: RuleSet,
            cfg: AnalyzerConfig = AnalyzerConfig()) -> list[Analysis]:
    """Every reading of ``word``.

    Standard lexicon readings are returned when any exist; otherwise
    variant readings (if enabled), otherwise guesser readings (if enabled).
    """
    _check_depth(net, cfg)
    w, cap = _prepare(word, rules, cfg.allow_variants)
    if not rules.surface_alphabet(False).issuperset(w):
        out = []
    else:
        out = _run(w, cap, net, rules, cfg, variants=False, guesser=False, source="lexicon")
    if not out and cfg.allow_variants:
        out = _run(w, cap, net, rules, cfg, variants=True, guesser=False, source="variant")
    if not out and cfg.allow_guesser and net.generics:
        out = guess(word, net, rules, cfg)
    return out


def guess(word: str, net: MorphNetwork, rules: RuleSet,
          cfg: AnalyzerConfig = AnalyzerConfig(allow_guesser=True)) -> list[Analysis]:
    """Readings built only from guesser arcs (generic lemmas)."""
    _check_depth(net, cfg)
    w, cap = _prepare(word, rules, False)
    return _run(w, cap, net, rules, cfg, variants=False, guesser=True, source="guesser")


# ---------------------------------------------------------------------------
# generation and paradigms

def realize(lexical: Sequence[str], rules: RuleSet, variants: bool = False,
            max_null_run: int = 3) -> list[str]:
    """All surface strings the rules license for a lexical symbol sequence."""
    t = _Tables(rules, variants)
    table, dead, finals = t.table, t.dead, t.finals
    n = len(lexical)
    out: set[str] = set()

    def walk(i, q, lrun, srun, acc):
        if i == n and q in finals:
            out.add("".join(acc))
        if lrun < max_null_run:
            for pid, surf in t.inserts:
                nq = table[q][pid]
                if nq not in dead:
                    acc.append(surf)
                    walk(i, nq, lrun + 1, 0, acc)
                    acc.pop()
        if i < n:
            for pid, surf in t.by_lex.get(lexical[i], ()):
                nq = table[q][pid]
                if nq in dead:
                    continue
                if surf is None:
                    if srun < max_null_run:
                        walk(i + 1, nq, 0, srun + 1, acc)
                else:
                    acc.append(surf)
                    walk(i + 1, nq, 0, 0, acc)
                    acc.pop()

    walk(0, t.start, 0, 0, [])
    return sorted(out)


class ParadigmCell(NamedTuple):
    """One inflected form: the entry path, its lexical string and realizations."""

    path: tuple
    lexical: str
    surfaces: tuple[str, ...]
    features: tuple[tuple[str, str], ...]
    ellipsis_chain: tuple[EllipsisSlot, ...]

    @property
    def reentries(self) -> int:
        return sum(1 for x in self.path if x == REENTRY)


@dataclass(frozen=True)
class ParadigmReport:
    lemma: str
    depth: int
    total: int
    closed_count: int
    genitive_bearing_count: int
    forms: frozenset[ParadigmCell] | None = None

    @property
    def surfaces(self) -> set[str]:
        return {s for c in self.forms or () for s in c.surfaces}


def _lemma_entries(net: MorphNetwork, lemma: str, category: str | None) -> list[int]:
    ids = net.entries_for_lemma(lemma)
    if not ids:
        raise UnknownLemma(f"unknown lemma {lemma!r}")
    if category is None:
        nouns = [i for i in ids if net.entries[i].category == "NOUN"]
        return nouns or ids
    ids = [i for i in ids if net.entries[i].category == category]
    if not ids:
        raise UnknownLemma(f"no {category} entry for lemma {lemma!r}")
    return ids


def iter_paths(net: MorphNetwork, entry: int, depth: int,
               standard: bool = True) -> Iterator[tuple]:
    """Entry paths from a lemma entry to the end marker, using <= depth re-entries."""

    def from_node(node, budget):
        for e in net.node_entries(node):
            if standard and not net.entries[e].standard:
                continue
            yield from from_entry(e, budget)

    def from_entry(e, budget):
        nxt = net.cont_node[e]
        if nxt < 0:
            yield (e,)
            if budget > 0 and e in net.reentry:
                for rest in from_node(net.reentry[e], budget - 1):
                    yield (e, REENTRY) + rest
        else:
            for rest in from_node(nxt, budget):
                yield (e,) + rest

    if depth > 0 and not net.reentry and net.genitive_entries:
        raise ValueError("network was compiled without re-entry links")
    yield from from_entry(entry, depth)


def _iter_cells(net: MorphNetwork, rules: RuleSet, entry: int, depth: int,
                cfg: AnalyzerConfig) -> Iterator[ParadigmCell]:
    """Paradigm cells below ``entry``, realizing surfaces along the way.

    Each path prefix carries the set of automaton configurations
    ``(state, lexical-null run, surface-null run, surface)`` reachable on it,
    so shared prefixes are paired with the rules only once.
    """
    t = _Tables(rules, False)
    table, dead, finals = t.table, t.dead, t.finals
    by_lex, inserts = t.by_lex, t.inserts
    limit = cfg.max_null_run
    infos = _entry_info(net)
    entries = net.entries

    def with_inserts(configs):
        if not inserts:
            return configs
        out = set(configs)
        todo = list(configs)
        while todo:
            q, lrun, srun, surf = todo.pop()
            if lrun >= limit:
                continue
            for pid, ch in inserts:
                nq = table[q][pid]
                if nq not in dead:
                    c = (nq, lrun + 1, 0, surf + ch)
                    if c not in out:
                        out.add(c)
                        todo.append(c)
        return frozenset(out)

    def pair(configs, symbols):
        for sym in symbols:
            nxt = set()
            for q, lrun, srun, surf in with_inserts(configs):
                for pid, ch in by_lex.get(sym, ()):
                    nq = table[q][pid]
                    if nq in dead:
                        continue
                    if ch is None:
                        if srun < limit:
                            nxt.add((nq, 0, srun + 1, surf))
                    else:
                        nxt.add((nq, 0, 0, surf + ch))
            configs = nxt
        return configs

    steps = t.steps

    def advance(configs, symbols):
        # configurations evolve independently and surfaces only grow at the
        # end, so each (state, entry) step is paired once and reused
        out = set()
        for q, lrun, srun, surf in configs:
            key = (q, lrun, srun, symbols, limit)
            tail = steps.get(key)
            if tail is None:
                tail = steps[key] = tuple(pair({(q, lrun, srun, "")}, symbols))
            for c in tail:
                out.add((c[0], c[1], c[2], surf + c[3]))
        return out

    node_entries, cont_node, reentry = net.node_entries, net.cont_node, net.reentry
    found = []

    def from_node(node, budget, path, configs):
        for e in node_entries(node):
            if entries[e].standard:
                from_entry(e, budget, path, configs)

    def from_entry(e, budget, path, configs):
        configs = advance(configs, entries[e].lexical_form)
        path = path + (e,)
        nxt = cont_node[e]
        if nxt < 0:
            found.append((path, configs))
            if budget > 0 and e in reentry:
                from_node(reentry[e], budget - 1, path + (REENTRY,), configs)
        else:
            from_node(nxt, budget, path, configs)

    if depth > 0 and not net.reentry and net.genitive_entries:
        raise ValueError("network was compiled without re-entry links")
    from_entry(entry, depth, (), {(t.start, 0, 0, "")})
    # features come from the analyzer's fold memo: every re-entry opens a slot
    memo = _build_cache.bind(net, cfg)
    fk, folds = memo.fold_keys, memo.folds
    for path, configs in found:
        choice = (True,) * path.count(REENTRY)
        key = (tuple([fk[x] for x in path]), choice)
        hit = folds.get(key)
        if hit is None:
            items = tuple(x if x == REENTRY else (x, 0, 0) for x in path)
            main, chain, derived, standard = _fold(items, choice, infos, net, cfg)
            hit = folds[key] = (freeze(main), main, chain, derived, standard)
        surfaces = tuple(sorted({c[3] for c in with_inserts(configs) if c[0] in finals}))
        lexical = "".join(infos[x].form for x in path if x != REENTRY)
        yield ParadigmCell(path, lexical, surfaces, hit[0], hit[2])


def enumerate_inflections(lemma: str, depth: int, net: MorphNetwork, rules: RuleSet,
                          count_only: bool = False, category: str | None = None,
                          cfg: AnalyzerConfig | None = None) -> ParadigmReport:
    """Paradigm of ``lemma`` with up to ``depth`` genitive re-entries.

    ``closed_count`` and ``genitive_bearing_count`` partition the depth-0
    forms; ``total`` counts forms at the requested depth.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if depth > net.max_ellipsis_depth:
        raise ValueError(f"network compiled for ellipsis depth {net.max_ellipsis_depth}")
    cfg = cfg or AnalyzerConfig(max_ellipsis_depth=depth)
    ids = _lemma_entries(net, lemma, category)
    total = closed = gen = 0
    memo: dict = {}
    memo0: dict = {}
    for e in ids:
        node = net.cont_node[e]
        if node < 0:
            t0, g0 = 1, int(e in net.genitive_entries)
            t = t0 + (net.count_paths(net.reentry[e], depth - 1, _memo=memo)[0]
                      if depth > 0 and e in net.reentry else 0)
        else:
            t0, g0 = net.count_paths(node, 0, _memo=memo0)
            t, _ = net.count_paths(node, depth, _memo=memo)
        total += t
        closed += t0 - g0
        gen += g0
    forms = None
    if not count_only:
        forms = frozenset(c for e in ids for c in _iter_cells(net, rules, e, depth, cfg))
    return ParadigmReport(lemma, depth, total, closed, gen, forms)


def generate(lemma: str, spec: Mapping[str, str], net: MorphNetwork, rules: RuleSet,
             depth: int = 0) -> list[str]:
    """Surface forms of ``lemma`` whose features include every ``spec`` item."""
    ids = net.entries_for_lemma(lemma)
    if not ids:
        raise UnknownLemma(f"unknown lemma {lemma!r}")
    cfg = AnalyzerConfig(max_ellipsis_depth=depth)
    want = set(spec.items())
    out: set[str] = set()
    for e in ids:
        for cell in _iter_cells(net, rules, e, depth, cfg):
            if want <= set(cell.features):
                out.update(cell.surfaces)
    return sorted(out)


# ---------------------------------------------------------------------------
# compounds

def _member_matches(cohort: Cohort, member: str) -> bool:
    if cohort.surface.lower() == member:
        return True
    return any(r.analysis.lemma == member for r in cohort.readings)


def _bare_stem(a: Analysis) -> bool:
    return not a.ellipsis_chain and all(s.role == "stem" or not s.lexical_form
                                        for s in a.segments)


def _member_readings(cohort: Cohort, member: str, final: bool) -> list[Reading]:
    """Readings eligible for a compound member.

    Only the last member carries inflection, so earlier members contribute
    uninflected stem readings.  Readings of the member lemma are preferred.
    """
    plain = [r for r in cohort.readings if r.analysis.compound_index is None]
    own = [r for r in plain if r.analysis.lemma == member] or plain
    if not final:
        own = [r for r in own if _bare_stem(r.analysis)] or own
    return own


def mark_compounds(sentence: Sequence[Cohort],
                   compound_lexicon: Iterable[str | Sequence[str]]) -> list[Cohort]:
    """Add compound-indexed readings for multiword lemmas, longest-leftmost first.

    Member ``i`` of an ``n``-word compound gains copies of its eligible
    readings with ``compound_index == (i, n)``; the plain readings stay, so
    ambiguity grows.
    """
    compounds = sorted({tuple(c.split()) if isinstance(c, str) else tuple(c)
                        for c in compound_lexicon}, key=lambda c: (-len(c), c))
    compounds = [tuple(m.lower() for m in c) for c in compounds if c]
    out = list(sentence)
    i = 0
    while i < len(out):
        hit = None
        for comp in compounds:
            n = len(comp)
            if i + n <= len(out) and all(_member_matches(out[i + k], comp[k]) for k in range(n)):
                hit = comp
                break
        if hit is None:
            i += 1
            continue
        n = len(hit)
        for k in range(n):
            c = out[i + k]
            extra = [Reading(r.analysis._replace(compound_index=(k + 1, n)), r.tag)
                     for r in _member_readings(c, hit[k], k == n - 1)]
            seen = set(c.readings)
            out[i + k] = c.with_readings(list(c.readings) + [r for r in extra if r not in seen])
        i += n
    return out


def joint_interpretations(cohorts: Sequence[Cohort]) -> int:
    """Joint readings of a span: product of indexed-reading counts per cohort.

    Cohorts without compound-indexed readings contribute all their readings.
    """
    total = 1
    for c in cohorts:
        indexed = [r for r in c.readings if r.analysis.compound_index is not None]
        total *= len(indexed or c.readings)
    return total
