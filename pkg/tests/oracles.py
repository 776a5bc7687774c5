"""Independent reference implementations used as test oracles.

None of these import the code under test except for plain data types; they
re-derive results directly from definitions, trading speed for obviousness.
"""

from __future__ import annotations

import itertools
import re
import sys
import unicodedata
from fractions import Fraction

# ---------------------------------------------------------------------------
# two-level operator semantics by direct context scanning


def _match(items, seq) -> bool:
    """Does the whole of ``seq`` match the (pair-set, repetition) items?"""
    if not items:
        return not seq
    (pairs, rep), rest = items[0], items[1:]
    if rep == "one":
        return bool(seq) and seq[0] in pairs and _match(rest, seq[1:])
    if rep == "optional":
        return _match(rest, seq) or (bool(seq) and seq[0] in pairs and _match(rest, seq[1:]))
    # zero-or-more / one-or-more: try every run length
    lo = 1 if rep == "one-or-more" else 0
    for k in range(lo, len(seq) + 1):
        if all(p in pairs for p in seq[:k]) and _match(rest, seq[k:]):
            return True
    return False


def left_ok(rule, s, i) -> bool:
    return any(_match(rule.left.items, s[k:i]) for k in range(i + 1))


def right_ok(rule, s, i) -> bool:
    return any(_match(rule.right.items, s[i + 1:k]) for k in range(i + 1, len(s) + 1))


def rule_accepts(rule, s, alphabet) -> bool:
    """Brute-force evaluation of one rule on pair string ``s``."""
    s = tuple(s)
    op = rule.operator
    for i, p in enumerate(s):
        in_ctx = None

        def ctx():
            nonlocal in_ctx
            if in_ctx is None:
                in_ctx = left_ok(rule, s, i) and right_ok(rule, s, i)
            return in_ctx

        if op in ("context-requirement", "double-arrow") and p == rule.pair and not ctx():
            return False
        if op in ("surface-coercion", "double-arrow") and p in alphabet \
                and p.lexical == rule.pair.lexical and p.surface != rule.pair.surface and ctx():
            return False
        if op == "exclusion" and p == rule.pair and ctx():
            return False
    return True


# ---------------------------------------------------------------------------
# exhaustive decoding


def oracle_transition(counts, inventory, lam, history, tag) -> Fraction:
    row = counts.get(tuple(history), {})
    total = sum(row.values())
    return (row.get(tag, 0) + lam) / (total + lam * (len(inventory) + 1))


def oracle_emission(form_counts, lemma_counts, inventory, lam, form, lemma, tag) -> Fraction:
    forms = {f for f, _ in form_counts}
    lemmas = {l for l, _ in lemma_counts}
    tag_total = sum(n for (_, t), n in form_counts.items() if t == tag)
    if form in forms:
        return (form_counts.get((form, tag), 0) + lam) / (tag_total + lam * (len(forms) + 1))
    if lemma in lemmas:
        return (lemma_counts.get((lemma, tag), 0) + lam) / (tag_total + lam * (len(lemmas) + 1))
    return Fraction(1, len(inventory))


def exhaustive_decode(sentence, model_spec):
    """Best reading-index tuple by enumerating every path.

    ``sentence`` is a list of (form, [(lemma, tag), ...]); ``model_spec`` a
    dict with order, inventory, lam, trans, forms, lemmas.  Ties go to the
    lexicographically smallest index tuple.
    """
    k = model_spec["order"] - 1
    inv, lam = model_spec["inventory"], model_spec["lam"]
    best = None
    for choice in itertools.product(*(range(len(r)) for _, r in sentence)):
        hist = ["<S>"] * k
        p = Fraction(1)
        for (form, readings), j in zip(sentence, choice):
            lemma, tag = readings[j]
            p *= oracle_transition(model_spec["trans"], inv, lam, hist, tag)
            p *= oracle_emission(model_spec["forms"], model_spec["lemmas"], inv, lam,
                                 form, lemma, tag)
            hist = (hist + [tag])[1:] if k else []
        p *= oracle_transition(model_spec["trans"], inv, lam, hist, "</S>")
        if best is None or p > best[0]:
            best = (p, choice)
    return best


# ---------------------------------------------------------------------------
# tokenization


def _punct_class() -> str:
    chars = [chr(c) for c in range(sys.maxunicode + 1)
             if unicodedata.category(chr(c)).startswith("P")]
    return "".join(re.escape(c) for c in chars)


_PUNCT = None


def reference_tokenize(text: str) -> list[list[str]]:
    global _PUNCT
    if _PUNCT is None:
        cls = _punct_class()
        _PUNCT = re.compile(f"[{cls}]|[^\\s{cls}]+")
    toks = _PUNCT.findall(text)
    ends = [i for i, t in enumerate(toks)
            if t in ".?!" and (i + 1 == len(toks) or toks[i + 1] not in ".?!")]
    out, start = [], 0
    for e in ends:
        out.append(toks[start:e + 1])
        start = e + 1
    if start < len(toks):
        out.append(toks[start:])
    return out


# ---------------------------------------------------------------------------
# paradigm counting straight from lexicon text


def lexicon_path_counts(lex, start: str, depth: int, genitive=("GEN", "GEL")):
    """Count word paths from sublexicon ``start`` by walking entries by name.

    Returns (total, genitive_bearing) for paths using at most ``depth``
    re-entries into ``lex.reentry``.  Works on the parsed lexicon, never on
    the compiled network.
    """
    by_name = {s.name: s.entries for s in lex.sublexicons}

    def walk(name, budget):
        total = gen = 0
        for e in by_name[name]:
            if not e.standard:
                continue
            if e.continuation == "#":
                case = dict(e.features).get("case", "")
                is_gen = case.split("+")[-1] in genitive
                total += 1
                gen += is_gen
                if is_gen and budget > 0:
                    t, g = walk(lex.reentry, budget - 1)
                    total += t
                    gen += g
            else:
                t, g = walk(e.continuation, budget)
                total += t
                gen += g
        return total, gen

    return walk(start, depth)
