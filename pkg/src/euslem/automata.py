"""Small finite-state toolkit over integer alphabets.

Symbols are integers ``0 .. n-1``.  NFAs are built Thompson-style and turned
into total DFAs by subset construction; DFAs support complement, boolean
products and minimization.  This is just enough machinery to compile
two-level rules and guesser patterns.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable, Sequence


class NFA:
    """Epsilon-NFA with a single start state."""

    def __init__(self) -> None:
        self.moves: list[dict[int, set[int]]] = []
        self.eps: list[set[int]] = []
        self.start = self.add_state()
        self.finals: set[int] = set()

    def add_state(self) -> int:
        self.moves.append({})
        self.eps.append(set())
        return len(self.moves) - 1

    def add(self, src: int, sym: int | None, dst: int) -> None:
        if sym is None:
            self.eps[src].add(dst)
        else:
            self.moves[src].setdefault(sym, set()).add(dst)

    def _embed(self, other: NFA) -> int:
        """Copy ``other``'s states into self; return the offset used."""
        off = len(self.moves)
        for moves, eps in zip(other.moves, other.eps):
            self.moves.append({s: {d + off for d in ds} for s, ds in moves.items()})
            self.eps.append({d + off for d in eps})
        return off


def epsilon() -> NFA:
    nfa = NFA()
    nfa.finals.add(nfa.start)
    return nfa


def symbol_set(symbols: Iterable[int]) -> NFA:
    nfa = NFA()
    end = nfa.add_state()
    for s in symbols:
        nfa.add(nfa.start, s, end)
    nfa.finals.add(end)
    return nfa


def concat(*parts: NFA) -> NFA:
    out = epsilon()
    for part in parts:
        off = out._embed(part)
        for f in out.finals:
            out.add(f, None, part.start + off)
        out.finals = {f + off for f in part.finals}
    return out


def union(*parts: NFA) -> NFA:
    out = NFA()
    for part in parts:
        off = out._embed(part)
        out.add(out.start, None, part.start + off)
        out.finals |= {f + off for f in part.finals}
    return out


def star(part: NFA) -> NFA:
    out = NFA()
    off = out._embed(part)
    out.add(out.start, None, part.start + off)
    for f in part.finals:
        out.add(f + off, None, part.start + off)
    out.finals = {f + off for f in part.finals} | {out.start}
    return out


def plus(part: NFA) -> NFA:
    return concat(part, star(part))


def optional(part: NFA) -> NFA:
    return union(part, epsilon())


def sigma_star(n_symbols: int) -> NFA:
    return star(symbol_set(range(n_symbols)))


class DFA:
    """Total deterministic automaton; ``table[state][symbol] -> state``."""

    __slots__ = ("n_symbols", "table", "start", "finals")

    def __init__(self, n_symbols: int, table: list[list[int]], start: int,
                 finals: frozenset[int]):
        self.n_symbols = n_symbols
        self.table = table
        self.start = start
        self.finals = finals

    @property
    def n_states(self) -> int:
        return len(self.table)

    def run(self, seq: Iterable[int], state: int | None = None) -> int:
        q = self.start if state is None else state
        for s in seq:
            q = self.table[q][s]
        return q

    def accepts(self, seq: Iterable[int]) -> bool:
        return self.run(seq) in self.finals

    def complement(self) -> DFA:
        return DFA(self.n_symbols, [row[:] for row in self.table], self.start,
                   frozenset(range(self.n_states)) - self.finals)

    def live_states(self) -> frozenset[int]:
        """States from which some final state is reachable."""
        rev: list[set[int]] = [set() for _ in self.table]
        for q, row in enumerate(self.table):
            for d in row:
                rev[d].add(q)
        live = set(self.finals)
        todo = deque(self.finals)
        while todo:
            q = todo.popleft()
            for p in rev[q]:
                if p not in live:
                    live.add(p)
                    todo.append(p)
        return frozenset(live)

    def is_empty(self) -> bool:
        return self.start not in self.live_states()

    def to_nfa(self) -> NFA:
        nfa = NFA()
        # state 0 of the NFA is a fresh start; DFA state q lives at q + 1
        for _ in self.table:
            nfa.add_state()
        nfa.add(nfa.start, None, self.start + 1)
        for q, row in enumerate(self.table):
            for s, d in enumerate(row):
                nfa.add(q + 1, s, d + 1)
        nfa.finals = {q + 1 for q in self.finals}
        return nfa

    def minimize(self) -> DFA:
        reachable = _reachable(self)
        states = sorted(reachable)
        # Moore refinement on the reachable part
        block = {q: (q in self.finals) for q in states}
        n_blocks = len(set(block.values()))
        while True:
            sig = {q: (block[q], tuple(block[d] for d in self.table[q])) for q in states}
            ids: dict[tuple, int] = {}
            new = {}
            for q in states:
                new[q] = ids.setdefault(sig[q], len(ids))
            block = new
            if len(ids) == n_blocks:
                break
            n_blocks = len(ids)
        # renumber in BFS order from the start for a canonical layout
        order: dict[int, int] = {}
        todo = deque([block[self.start]])
        rep = {}
        for q in states:
            rep.setdefault(block[q], q)
        order[block[self.start]] = 0
        while todo:
            b = todo.popleft()
            for d in self.table[rep[b]]:
                bd = block[d]
                if bd not in order:
                    order[bd] = len(order)
                    todo.append(bd)
        table = [[0] * self.n_symbols for _ in order]
        finals = set()
        for b, i in order.items():
            q = rep[b]
            table[i] = [order[block[d]] for d in self.table[q]]
            if q in self.finals:
                finals.add(i)
        return DFA(self.n_symbols, table, 0, frozenset(finals))


def _reachable(dfa: DFA) -> set[int]:
    seen = {dfa.start}
    todo = deque([dfa.start])
    while todo:
        q = todo.popleft()
        for d in dfa.table[q]:
            if d not in seen:
                seen.add(d)
                todo.append(d)
    return seen


def _closure(nfa: NFA, states: Iterable[int]) -> frozenset[int]:
    out = set(states)
    todo = list(out)
    while todo:
        q = todo.pop()
        for d in nfa.eps[q]:
            if d not in out:
                out.add(d)
                todo.append(d)
    return frozenset(out)


def determinize(nfa: NFA, n_symbols: int) -> DFA:
    start = _closure(nfa, [nfa.start])
    index = {start: 0}
    subsets = [start]
    table: list[list[int]] = []
    i = 0
    while i < len(subsets):
        cur = subsets[i]
        row = []
        for s in range(n_symbols):
            nxt: set[int] = set()
            for q in cur:
                nxt.update(nfa.moves[q].get(s, ()))
            key = _closure(nfa, nxt)
            if key not in index:
                index[key] = len(subsets)
                subsets.append(key)
            row.append(index[key])
        table.append(row)
        i += 1
    finals = frozenset(i for i, sub in enumerate(subsets) if sub & nfa.finals)
    return DFA(n_symbols, table, 0, finals)


def product(a: DFA, b: DFA, mode: str = "and") -> DFA:
    if a.n_symbols != b.n_symbols:
        raise ValueError("alphabet size mismatch")
    index = {(a.start, b.start): 0}
    pairs = [(a.start, b.start)]
    table: list[list[int]] = []
    i = 0
    while i < len(pairs):
        p, q = pairs[i]
        row = []
        for s in range(a.n_symbols):
            key = (a.table[p][s], b.table[q][s])
            if key not in index:
                index[key] = len(pairs)
                pairs.append(key)
            row.append(index[key])
        table.append(row)
        i += 1
    if mode == "and":
        finals = {i for i, (p, q) in enumerate(pairs) if p in a.finals and q in b.finals}
    elif mode == "or":
        finals = {i for i, (p, q) in enumerate(pairs) if p in a.finals or q in b.finals}
    else:
        raise ValueError(f"unknown product mode {mode!r}")
    return DFA(a.n_symbols, table, 0, frozenset(finals))


def universal(n_symbols: int) -> DFA:
    return DFA(n_symbols, [[0] * n_symbols], 0, frozenset({0}))


def intersect_all(dfas: Sequence[DFA], n_symbols: int) -> DFA:
    out = universal(n_symbols)
    for d in dfas:
        out = product(out, d, "and").minimize()
    return out
