"""Two-level rules: parsing, compilation to pair recognizers, and pairing checks.

A rule constrains how a lexical symbol may be realized on the surface in a
given left/right context.  All rules act in parallel: a lexical/surface
pairing is accepted iff every rule's recognizer accepts the pair string.

Rule file notation::

    ALPHABET a b c +:0 +:r A:a A:0 ;
    SET V = a e i o u A ;
    RULE "r-epenthesis" +:r <=> A _ V ;
    RULE "h-drop" VARIANT h:0 => _ ;

``0`` is the NULL symbol, ``%x`` escapes a literal character.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from . import automata
from .errors import NoAlignment, RuleCompileError, RuleSyntaxError

NULL = None

OPERATORS = {
    "=>": "context-requirement",
    "<=": "surface-coercion",
    "<=>": "double-arrow",
    "/<=": "exclusion",
}

ONE, STAR, PLUS, OPT = "one", "zero-or-more", "one-or-more", "optional"


class PairSymbol(NamedTuple):
    lexical: str | None
    surface: str | None

    def __str__(self) -> str:
        lex = _show(self.lexical)
        if self.lexical == self.surface:
            return lex
        return f"{lex}:{_show(self.surface)}"


def _show(sym: str | None) -> str:
    if sym is None:
        return "0"
    if sym in _SPECIAL or sym.isspace():
        return "%" + sym
    return sym


_SPECIAL = set('0:;%#"()*_?')


@dataclass(frozen=True)
class ContextPattern:
    """Sequence of (pair-set, repetition) items."""

    items: tuple[tuple[frozenset, str], ...] = ()

    def __len__(self) -> int:
        return len(self.items)


@dataclass(frozen=True)
class TwoLevelRule:
    name: str
    pair: PairSymbol
    operator: str
    left: ContextPattern
    right: ContextPattern
    variant_only: bool = False
    line: int | None = None


@dataclass(frozen=True)
class PairRecognizer:
    """Minimal DFA over classified pairs.

    ``pair_class[i]`` maps alphabet index ``i`` to its class; ``table[q][c]``
    gives the successor.  State ``sink`` is the rejecting trap state (or -1
    if the recognizer has none).
    """

    alphabet: tuple[PairSymbol, ...]
    pair_class: tuple[int, ...]
    table: tuple[tuple[int, ...], ...]
    start: int
    accepting: frozenset[int]
    sink: int

    @property
    def n_states(self) -> int:
        return len(self.table)

    def accepts(self, pairs: Iterable[PairSymbol]) -> bool:
        index = {p: i for i, p in enumerate(self.alphabet)}
        q = self.start
        for p in pairs:
            i = index.get(p)
            if i is None:
                return False
            q = self.table[q][self.pair_class[i]]
        return q in self.accepting


class RuleSet:
    """Feasible-pair alphabet, named sets and rules.

    Immutable after construction; compiled automata are derived lazily and
    cached (recomputation is idempotent, so concurrent readers are safe).
    """

    def __init__(self, alphabet: Iterable[PairSymbol], rules: Sequence[TwoLevelRule] = (),
                 sets: dict[str, frozenset] | None = None,
                 variant_pairs: Iterable[PairSymbol] = ()):
        self.alphabet: tuple[PairSymbol, ...] = tuple(sorted(set(alphabet), key=_pair_key))
        self.index = {p: i for i, p in enumerate(self.alphabet)}
        self.rules: tuple[TwoLevelRule, ...] = tuple(rules)
        self.sets = dict(sets or {})
        self.variant_pairs = frozenset(variant_pairs)
        names = [r.name for r in self.rules]
        dup = {n for n in names if names.count(n) > 1}
        if dup:
            raise RuleSyntaxError(f"duplicate rule name {sorted(dup)[0]!r}")
        for r in self.rules:
            if r.pair not in self.index:
                raise RuleSyntaxError(f"rule {r.name!r}: pair {r.pair} is not feasible")
        self._compiled: dict[bool, tuple[automata.DFA, frozenset[int]]] = {}
        self._alpha_cache: dict[bool, tuple] = {}

    def __repr__(self) -> str:
        return f"RuleSet({len(self.alphabet)} pairs, {len(self.rules)} rules)"

    def active_rules(self, variants: bool = False) -> tuple[TwoLevelRule, ...]:
        return tuple(r for r in self.rules if variants or not r.variant_only)

    def feasible(self, variants: bool = False) -> frozenset[PairSymbol]:
        return self._alphabets(variants)[0]

    def surface_alphabet(self, variants: bool = False) -> frozenset[str]:
        return self._alphabets(variants)[1]

    def lexical_alphabet(self, variants: bool = False) -> frozenset[str]:
        return self._alphabets(variants)[2]

    def _alphabets(self, variants: bool) -> tuple[frozenset, frozenset, frozenset]:
        hit = self._alpha_cache.get(variants)
        if hit is None:
            feas = frozenset(self.alphabet)
            if not variants:
                feas -= self.variant_pairs
            hit = (feas,
                   frozenset(p.surface for p in feas if p.surface is not None),
                   frozenset(p.lexical for p in feas if p.lexical is not None))
            self._alpha_cache[variants] = hit
        return hit

    def automaton(self, variants: bool = False) -> tuple[automata.DFA, frozenset[int]]:
        """Intersection of all active rules and the feasibility filter.

        Returns the DFA over alphabet indices and its set of dead states.
        """
        if variants not in self._compiled:
            n = len(self.alphabet)
            feas = self.feasible(variants)
            # one accepting state looping on feasible pairs, plus a trap
            filt = automata.DFA(
                n, [[0 if p in feas else 1 for p in self.alphabet], [1] * n], 0, frozenset({0}))
            parts = [filt] + [_compile_dfa(r, self.alphabet) for r in self.active_rules(variants)]
            dfa = automata.intersect_all(parts, n)
            dead = frozenset(range(dfa.n_states)) - dfa.live_states()
            self._compiled[variants] = (dfa, dead)
        return self._compiled[variants]


def _pair_key(p: PairSymbol) -> tuple:
    return (p.lexical is None, p.lexical or "", p.surface is None, p.surface or "")


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r'"(?:[^"\\]|\\.)*"|(?:%.|[^\s%"])+')


@dataclass
class _Tok:
    text: str
    line: int
    col: int


def _statements(text: str) -> list[list[_Tok]]:
    stmts: list[list[_Tok]] = []
    cur: list[_Tok] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw)
        pos = 0
        while pos < len(line):
            if line[pos].isspace():
                pos += 1
                continue
            m = _TOKEN.match(line, pos)
            if not m:
                raise RuleSyntaxError(f"unexpected character {line[pos]!r}", lineno, pos + 1)
            tok = m.group(0)
            # a trailing unescaped ';' terminates the statement
            if tok != ";" and tok.endswith(";") and not tok.endswith("%;"):
                cur.append(_Tok(tok[:-1], lineno, pos + 1))
                tok = ";"
            if tok == ";":
                stmts.append(cur)
                cur = []
            else:
                cur.append(_Tok(tok, lineno, pos + 1))
            pos = m.end()
    if cur:
        raise RuleSyntaxError("missing ';' at end of statement", cur[0].line, cur[0].col)
    return stmts


def _strip_comment(line: str) -> str:
    out = []
    i = 0
    in_str = False
    while i < len(line):
        c = line[i]
        if c == "%" and i + 1 < len(line):
            out.append(line[i:i + 2])
            i += 2
            continue
        if c == '"':
            in_str = not in_str
        elif c == "#" and not in_str:
            break
        out.append(c)
        i += 1
    return "".join(out)


def _split_symbols(text: str) -> list[str]:
    """Split a token into symbols, honouring % escapes."""
    out = []
    i = 0
    while i < len(text):
        if text[i] == "%" and i + 1 < len(text):
            out.append("%" + text[i + 1])
            i += 2
        else:
            out.append(text[i])
            i += 1
    return out


def _symbol(sym: str, tok: _Tok) -> str | None:
    if sym == "0":
        return NULL
    if sym.startswith("%"):
        return sym[1]
    if len(sym) != 1:
        raise RuleSyntaxError(f"bad symbol {sym!r}", tok.line, tok.col)
    return sym


def _parse_pair_token(tok: _Tok) -> tuple[str, object]:
    """Classify a pair-ish token.

    Returns one of ``("pair", PairSymbol)``, ``("lex", sym)``, ``("surf", sym)``,
    ``("any", None)``, ``("name", text)``.
    """
    syms = _split_symbols(tok.text)
    if syms == ["?"]:
        return "any", None
    if ":" in syms:
        k = syms.index(":")
        left, right = syms[:k], syms[k + 1:]
        if len(left) > 1 or len(right) > 1:
            raise RuleSyntaxError(f"bad pair {tok.text!r}", tok.line, tok.col)
        if not left and not right:
            raise RuleSyntaxError("empty pair", tok.line, tok.col)
        if not right:
            return "lex", _symbol(left[0], tok)
        if not left:
            return "surf", _symbol(right[0], tok)
        lex, surf = _symbol(left[0], tok), _symbol(right[0], tok)
        if lex is None and surf is None:
            raise RuleSyntaxError("pair with both sides NULL", tok.line, tok.col)
        return "pair", PairSymbol(lex, surf)
    if len(syms) == 1:
        s = _symbol(syms[0], tok)
        if s is None:
            raise RuleSyntaxError("bare NULL is not a pair", tok.line, tok.col)
        return "sym", s
    if re.fullmatch(r"[A-Za-z][A-Za-z0-9_\-]*", tok.text):
        return "name", tok.text
    raise RuleSyntaxError(f"bad token {tok.text!r}", tok.line, tok.col)


def _parse_item(tok: _Tok) -> tuple[_Tok, str]:
    text = tok.text
    if text.startswith("(") and text.endswith(")") and len(text) > 2:
        return _Tok(text[1:-1], tok.line, tok.col + 1), OPT
    if len(text) > 1 and text[-1] in "*+" and not text.endswith("%" + text[-1]):
        return _Tok(text[:-1], tok.line, tok.col), STAR if text[-1] == "*" else PLUS
    return tok, ONE


def parse_rules(text: str, source: str | None = None) -> RuleSet:
    """Parse a rule file into a :class:`RuleSet`."""
    try:
        return _parse_rules(text)
    except RuleSyntaxError as exc:
        if source and exc.source is None:
            exc.source = source
            exc.args = (exc._format(),)
        raise


def _parse_rules(text: str) -> RuleSet:
    declared: list[PairSymbol] = []
    raw_sets: dict[str, tuple[_Tok, list[_Tok]]] = {}
    raw_rules: list[tuple[_Tok, str, bool, PairSymbol, str, list[_Tok], list[_Tok]]] = []
    mentioned: list[tuple[str, object, _Tok]] = []

    for stmt in _statements(text):
        if not stmt:
            continue
        head = stmt[0]
        kw = head.text
        if kw == "ALPHABET":
            for tok in stmt[1:]:
                kind, val = _parse_pair_token(tok)
                if kind == "pair":
                    declared.append(val)
                elif kind == "sym":
                    declared.append(PairSymbol(val, val))
                else:
                    raise RuleSyntaxError(f"bad alphabet entry {tok.text!r}", tok.line, tok.col)
        elif kw == "SET":
            if len(stmt) < 3 or stmt[2].text != "=":
                raise RuleSyntaxError("expected 'SET <Name> = <symbol> ... ;'", head.line, head.col)
            name = stmt[1].text
            if name in raw_sets:
                raise RuleSyntaxError(f"set {name!r} defined twice", head.line, head.col)
            raw_sets[name] = (stmt[1], stmt[3:])
        elif kw == "RULE":
            raw_rules.append(_parse_rule_stmt(stmt))
        else:
            raise RuleSyntaxError(f"unknown statement {kw!r}", head.line, head.col)

    rule_pairs = [r[3] for r in raw_rules]
    std_pairs = set(declared) | {r[3] for r in raw_rules if not r[2]}
    context_tokens = [t for r in raw_rules for t in r[5] + r[6]]
    for _, members in raw_sets.values():
        context_tokens.extend(members)
    for tok in context_tokens:
        inner, _ = _parse_item(tok)
        kind, val = _parse_pair_token(inner)
        mentioned.append((kind, val, inner))
        if kind == "pair":
            std_pairs.add(val)

    alphabet = set(declared) | set(rule_pairs) | std_pairs
    lexical_syms = {p.lexical for p in alphabet}
    for kind, val, tok in mentioned:
        if kind == "sym" and val not in lexical_syms and val not in raw_sets:
            if val.isupper():
                raise RuleSyntaxError(f"undefined set {val!r}", tok.line, tok.col)
            alphabet.add(PairSymbol(val, val))
            std_pairs.add(PairSymbol(val, val))
            lexical_syms.add(val)
    variant_pairs = alphabet - std_pairs

    resolver = _Resolver(alphabet, raw_sets)
    sets = {name: resolver.set_members(name) for name in raw_sets}
    seen_names: set[str] = set()
    for tok, name, *_ in raw_rules:
        if name in seen_names:
            raise RuleSyntaxError(f"duplicate rule name {name!r}", tok.line, tok.col)
        seen_names.add(name)
    rules = []
    for tok, name, variant, pair, op, left, right in raw_rules:
        rules.append(TwoLevelRule(name, pair, op, resolver.pattern(left), resolver.pattern(right),
                                  variant, tok.line))
    return RuleSet(alphabet, rules, sets, variant_pairs)


def _parse_rule_stmt(stmt: list[_Tok]):
    head = stmt[0]
    if len(stmt) < 2 or not (stmt[1].text.startswith('"') and stmt[1].text.endswith('"')):
        raise RuleSyntaxError('expected RULE "<name>"', head.line, head.col)
    name = stmt[1].text[1:-1]
    rest = stmt[2:]
    variant = False
    if rest and rest[0].text == "VARIANT":
        variant = True
        rest = rest[1:]
    if len(rest) < 3:
        raise RuleSyntaxError("incomplete rule", head.line, head.col)
    kind, pair = _parse_pair_token(rest[0])
    if kind == "sym":
        pair = PairSymbol(pair, pair)
    elif kind != "pair":
        raise RuleSyntaxError(f"rule centre must be a pair, got {rest[0].text!r}",
                              rest[0].line, rest[0].col)
    op_tok = rest[1]
    if op_tok.text not in OPERATORS:
        raise RuleSyntaxError(f"unknown operator {op_tok.text!r}", op_tok.line, op_tok.col)
    ctx = rest[2:]
    bars = [i for i, t in enumerate(ctx) if t.text == "_"]
    if len(bars) != 1:
        raise RuleSyntaxError("context needs exactly one '_'", op_tok.line, op_tok.col)
    k = bars[0]
    return head, name, variant, pair, OPERATORS[op_tok.text], ctx[:k], ctx[k + 1:]


class _Resolver:
    def __init__(self, alphabet: set[PairSymbol], raw_sets):
        self.alphabet = alphabet
        self.raw_sets = raw_sets
        self._cache: dict[str, frozenset] = {}
        self._busy: set[str] = set()

    def set_members(self, name: str) -> frozenset:
        if name in self._cache:
            return self._cache[name]
        tok, members = self.raw_sets[name]
        if name in self._busy:
            raise RuleSyntaxError(f"set {name!r} is defined in terms of itself", tok.line, tok.col)
        self._busy.add(name)
        out: set[PairSymbol] = set()
        for m in members:
            out |= self.resolve(m)
        self._busy.discard(name)
        if not out:
            raise RuleSyntaxError(f"set {name!r} resolves to no feasible pair", tok.line, tok.col)
        self._cache[name] = frozenset(out)
        return self._cache[name]

    def resolve(self, tok: _Tok) -> frozenset:
        kind, val = _parse_pair_token(tok)
        if kind == "pair":
            return frozenset({val})
        if kind == "any":
            return frozenset(self.alphabet)
        if kind in ("sym", "name") and val in self.raw_sets:
            return self.set_members(val)
        if kind == "name":
            raise RuleSyntaxError(f"undefined set {val!r}", tok.line, tok.col)
        if kind in ("sym", "lex"):
            return frozenset(p for p in self.alphabet if p.lexical == val)
        return frozenset(p for p in self.alphabet if p.surface == val)

    def pattern(self, toks: list[_Tok]) -> ContextPattern:
        items = []
        for tok in toks:
            inner, rep = _parse_item(tok)
            pairs = self.resolve(inner)
            if not pairs:
                raise RuleSyntaxError(f"{inner.text!r} matches no feasible pair",
                                      inner.line, inner.col)
            items.append((pairs, rep))
        return ContextPattern(tuple(items))


# ---------------------------------------------------------------------------
# compilation

def _pattern_nfa(pattern: ContextPattern, index: dict[PairSymbol, int]) -> automata.NFA:
    parts = []
    for pairs, rep in pattern.items:
        base = automata.symbol_set(index[p] for p in pairs if p in index)
        if rep == STAR:
            base = automata.star(base)
        elif rep == PLUS:
            base = automata.plus(base)
        elif rep == OPT:
            base = automata.optional(base)
        parts.append(base)
    return automata.concat(*parts)


def _compile_dfa(rule: TwoLevelRule, alphabet: Sequence[PairSymbol]) -> automata.DFA:
    n = len(alphabet)
    index = {p: i for i, p in enumerate(alphabet)}
    if rule.pair not in index:
        raise RuleCompileError(f"rule {rule.name!r}: pair {rule.pair} not in alphabet", rule.line)
    left = _pattern_nfa(rule.left, index)
    right = _pattern_nfa(rule.right, index)
    for side, nfa in (("left", left), ("right", right)):
        if automata.determinize(nfa, n).is_empty():
            raise RuleCompileError(
                f"rule {rule.name!r}: {side} context compiles to the empty language", rule.line)
    sig = automata.sigma_star(n)
    centre = automata.symbol_set([index[rule.pair]])
    violations = []
    if rule.operator in ("context-requirement", "double-arrow"):
        not_left = automata.determinize(automata.concat(sig, left), n).complement().to_nfa()
        not_right = automata.determinize(automata.concat(right, sig), n).complement().to_nfa()
        violations.append(automata.concat(not_left, centre, sig))
        violations.append(automata.concat(sig, centre, not_right))
    if rule.operator in ("surface-coercion", "double-arrow"):
        others = [i for p, i in index.items()
                  if p.lexical == rule.pair.lexical and p.surface != rule.pair.surface]
        if others:
            violations.append(automata.concat(sig, left, automata.symbol_set(others), right, sig))
    if rule.operator == "exclusion":
        violations.append(automata.concat(sig, left, centre, right, sig))
    if not violations:
        return automata.universal(n)
    bad = automata.determinize(automata.union(*violations), n)
    return bad.complement().minimize()


def compile_rule(rule: TwoLevelRule, alphabet: Iterable[PairSymbol]) -> PairRecognizer:
    """Compile one rule into a deterministic recognizer over ``alphabet``."""
    alpha = tuple(sorted(set(alphabet), key=_pair_key))
    dfa = _compile_dfa(rule, alpha)
    # pairs with identical columns form one class
    columns: dict[tuple[int, ...], int] = {}
    pair_class = []
    for i in range(len(alpha)):
        col = tuple(row[i] for row in dfa.table)
        pair_class.append(columns.setdefault(col, len(columns)))
    table = tuple(tuple(col[q] for col in columns) for q in range(dfa.n_states))
    dead = frozenset(range(dfa.n_states)) - dfa.live_states()
    return PairRecognizer(alpha, tuple(pair_class), table, dfa.start, dfa.finals,
                          min(dead) if dead else -1)


def licensed_pairs(rules: RuleSet, variants: bool = True) -> frozenset[PairSymbol]:
    """The feasible-pair alphabet (including variant-only pairs unless told otherwise)."""
    return rules.feasible(variants)


# ---------------------------------------------------------------------------
# pairing check

def check_pairing(lexical: Sequence[str], surface: Sequence[str], rules: RuleSet,
                  variants: bool = False, max_null_run: int = 3) -> bool:
    """True iff some NULL-padded alignment is feasible and satisfies every rule.

    Raises :class:`NoAlignment` when no alignment exists over the feasible
    pairs at all, regardless of rules.
    """
    if _align(lexical, surface, rules, variants, max_null_run, use_rules=True):
        return True
    if not _align(lexical, surface, rules, variants, max_null_run, use_rules=False):
        raise NoAlignment(f"no alignment of {''.join(lexical)!r} with {''.join(surface)!r}")
    return False


def _align(lexical, surface, rules, variants, max_null_run, use_rules) -> bool:
    feas = rules.feasible(variants)
    by_lex: dict[str | None, list[PairSymbol]] = {}
    for p in feas:
        by_lex.setdefault(p.lexical, []).append(p)
    if use_rules:
        dfa, dead = rules.automaton(variants)
        table = dfa.table
        start, finals = dfa.start, dfa.finals
    else:
        table, dead, start, finals = None, frozenset(), 0, None
    index = rules.index
    n, m = len(lexical), len(surface)
    seen = set()
    stack = [(0, 0, start, 0, 0)]
    while stack:
        key = stack.pop()
        if key in seen:
            continue
        seen.add(key)
        i, j, q, lrun, srun = key
        if i == n and j == m and (table is None or q in finals):
            return True
        moves = []
        if i < n:
            for p in by_lex.get(lexical[i], ()):
                if p.surface is None:
                    if srun < max_null_run:
                        moves.append((p, i + 1, j, 0, srun + 1))
                elif j < m and p.surface == surface[j]:
                    moves.append((p, i + 1, j + 1, 0, 0))
        if j < m and lrun < max_null_run:
            for p in by_lex.get(None, ()):
                if p.surface == surface[j]:
                    moves.append((p, i, j + 1, lrun + 1, 0))
        for p, ni, nj, nl, ns in moves:
            nq = q if table is None else table[q][index[p]]
            if nq in dead:
                continue
            stack.append((ni, nj, nq, nl, ns))
    return False


def pair_strings(alphabet: Sequence[PairSymbol], max_len: int):
    """Every pair string over ``alphabet`` up to ``max_len`` (shortest first)."""
    for k in range(max_len + 1):
        yield from itertools.product(alphabet, repeat=k)
