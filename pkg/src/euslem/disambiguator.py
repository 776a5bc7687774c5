"""Hybrid disambiguation: reductionist constraints, then an n-gram decoder.

Constraints discard readings in context; whatever ambiguity survives is
resolved by a bigram or trigram model with add-lambda smoothing, decoded
exactly (rational arithmetic) so ties are detected and broken
deterministically.
"""

from __future__ import annotations

import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence
from urllib.parse import quote, unquote

from .errors import ConstraintSyntaxError, ModelFormatError, TrainingError
from .readings import Cohort, Reading, Tag
from .tagset import TagsetConfig, project_tag

START = "<S>"
END = "</S>"
BOUNDARIES = (START, END)


# ---------------------------------------------------------------------------
# constraint rules

def reading_atoms(r: Reading) -> frozenset[str]:
    """Everything a pattern atom can match on a reading."""
    a = r.analysis
    atoms = {f'"{a.lemma}"'}
    for k, v in a.features:
        atoms.add(v)
        atoms.add(f"{k}={v}")
    for slot in a.ellipsis_chain:
        atoms.add(slot.elided_category)
        atoms.update(v for _, v in slot.inflection)
    if a.derived_category:
        atoms.add(a.derived_category)
    if r.tag is not None:
        atoms.add(r.tag.label)
    return frozenset(atoms)


@dataclass(frozen=True)
class TagPattern:
    atoms: frozenset[str]

    def __post_init__(self):
        if not self.atoms:
            raise ValueError("empty pattern")

    def matches(self, r: Reading) -> bool:
        return self.atoms <= reading_atoms(r)

    def __str__(self) -> str:
        return "(" + " ".join(sorted(self.atoms)) + ")"


@dataclass(frozen=True)
class Condition:
    offset: int
    careful: bool
    scan: bool
    pattern: TagPattern

    def holds(self, sentence: Sequence[Cohort], pos: int) -> bool:
        step = -1 if self.offset < 0 else 1
        p = pos + self.offset
        while 0 <= p < len(sentence):
            if self._cohort_matches(sentence[p]):
                return True
            if not self.scan:
                return False
            p += step
        return False

    def _cohort_matches(self, c: Cohort) -> bool:
        hits = [self.pattern.matches(r) for r in c.readings]
        return bool(hits) and (all(hits) if self.careful else any(hits))


@dataclass(frozen=True)
class Constraint:
    action: str  # SELECT or REMOVE
    target: TagPattern
    conditions: tuple[Condition, ...] = ()
    line: int | None = None

    def apply(self, sentence: list[Cohort], pos: int) -> bool:
        """Apply at ``pos`` in place; returns whether the cohort changed."""
        c = sentence[pos]
        hit = [self.target.matches(r) for r in c.readings]
        if not any(hit):
            return False
        keep = [r for r, h in zip(c.readings, hit) if h != (self.action == "REMOVE")]
        if not keep or len(keep) == len(c.readings):
            return False
        if not all(cond.holds(sentence, pos) for cond in self.conditions):
            return False
        sentence[pos] = c.with_readings(keep)
        return True


@dataclass(frozen=True)
class ConstraintGrammar:
    rules: tuple[Constraint, ...] = ()

    def __len__(self) -> int:
        return len(self.rules)


_CG_TOKEN = re.compile(r'"(?:[^"\\]|\\.)*"|[();]|[^\s();]+')
_OFFSET = re.compile(r"([+-]?\d+)(C?)(\*?)$|([+-]?\d+)(\*?)(C?)$")


def parse_constraints(text: str, source: str | None = None) -> ConstraintGrammar:
    """Parse ``REMOVE|SELECT (<atoms>) [IF (<offset>[C][*] (<atoms>)) ...] ;``."""
    toks: list[tuple[str, int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw)
        toks += [(m.group(), lineno) for m in _CG_TOKEN.finditer(line)]
    rules = []
    i = 0

    def err(msg, line):
        return ConstraintSyntaxError(msg, line, source=source)

    def expect(tok):
        nonlocal i
        if i >= len(toks) or toks[i][0] != tok:
            got = toks[i][0] if i < len(toks) else "end of input"
            raise err(f"expected {tok!r}, got {got!r}", toks[min(i, len(toks) - 1)][1])
        i += 1

    def pattern():
        nonlocal i
        line = toks[i][1] if i < len(toks) else None
        expect("(")
        atoms = []
        while i < len(toks) and toks[i][0] not in "();":
            atoms.append(toks[i][0])
            i += 1
        expect(")")
        if not atoms:
            raise err("empty pattern", line)
        return TagPattern(frozenset(atoms))

    while i < len(toks):
        word, line = toks[i]
        action = word.upper()
        if action not in ("SELECT", "REMOVE"):
            raise err(f"expected SELECT or REMOVE, got {word!r}", line)
        i += 1
        target = pattern()
        conds = []
        if i < len(toks) and toks[i][0].upper() == "IF":
            i += 1
            while i < len(toks) and toks[i][0] == "(":
                i += 1
                if i >= len(toks):
                    raise err("unterminated condition", line)
                m = _OFFSET.match(toks[i][0])
                if not m:
                    raise err(f"bad offset {toks[i][0]!r}", toks[i][1])
                spec = toks[i][0]
                offset = int(re.match(r"[+-]?\d+", spec).group())
                i += 1
                conds.append(Condition(offset, "C" in spec, "*" in spec, pattern()))
                expect(")")
            if not conds:
                raise err("IF without conditions", line)
        expect(";")
        rules.append(Constraint(action, target, tuple(conds), line))
    return ConstraintGrammar(tuple(rules))


def _strip_comment(line: str) -> str:
    quoted = False
    for k, ch in enumerate(line):
        if ch == '"':
            quoted = not quoted
        elif ch == "#" and not quoted:
            return line[:k]
    return line


def apply_constraints(sentence: Sequence[Cohort], g: ConstraintGrammar,
                      max_passes: int | None = None) -> list[Cohort]:
    """Run the rules in order, repeatedly, until a pass changes nothing.

    Each pass can only shrink some cohort, so the loop terminates; the
    never-empty guard lives in :meth:`Constraint.apply`.
    """
    out = list(sentence)
    passes = 0
    changed = True
    while changed and g.rules:
        changed = False
        for rule in g.rules:
            for pos in range(len(out)):
                if rule.apply(out, pos):
                    changed = True
        passes += 1
        if max_passes is not None and passes >= max_passes:
            break
    return out


# ---------------------------------------------------------------------------
# statistical model

@dataclass
class StatModel:
    order: int
    level: int
    params: tuple[str, ...]
    tag_inventory: tuple[str, ...]
    transition_counts: dict[tuple[str, ...], Counter]
    emission_lemma_counts: Counter
    emission_form_counts: Counter
    smoothing: Fraction = Fraction(1)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.order not in (2, 3):
            raise ValueError("order must be 2 or 3")
        if not 1 <= self.level <= 4:
            raise ValueError("level must be 1..4")
        self.smoothing = Fraction(self.smoothing)
        if self.smoothing <= 0:
            raise ValueError("smoothing constant must be > 0")
        self._prepare()

    def _prepare(self) -> None:
        self.outcomes = tuple(self.tag_inventory) + (END,)
        self._row_total = {h: sum(c.values()) for h, c in self.transition_counts.items()}
        self._tag_total: Counter = Counter()
        self._forms: set[str] = set()
        self._lemmas: set[str] = set()
        for (form, tag), n in self.emission_form_counts.items():
            self._tag_total[tag] += n
            self._forms.add(form)
        for (lemma, _), n in self.emission_lemma_counts.items():
            self._lemmas.add(lemma)

    def transition(self, history: Sequence[str], tag: str) -> Fraction:
        h = tuple(history)
        c = self.transition_counts.get(h)
        n = c[tag] if c else 0
        lam = self.smoothing
        return (n + lam) / (self._row_total.get(h, 0) + lam * len(self.outcomes))

    def row(self, history: Sequence[str]) -> dict[str, Fraction]:
        return {t: self.transition(history, t) for t in self.outcomes}

    def emission(self, form: str, lemma: str, tag: str) -> Fraction:
        """P(form | tag), backing off to the lemma table, then to uniform."""
        lam = self.smoothing
        total = self._tag_total[tag]
        if form in self._forms:
            n = self.emission_form_counts.get((form, tag), 0)
            return (n + lam) / (total + lam * (len(self._forms) + 1))
        if lemma in self._lemmas:
            n = self.emission_lemma_counts.get((lemma, tag), 0)
            return (n + lam) / (total + lam * (len(self._lemmas) + 1))
        return Fraction(1, max(len(self.tag_inventory), 1))

    def tag_of(self, r: Reading, tagset: TagsetConfig | None) -> str:
        """The reading's label at this model's level (projected if needed)."""
        t = r.tag
        if t is not None and t.level == self.level and (
                self.level != 3 or tuple(t.params_used) == self.params):
            return t.label
        if tagset is None:
            raise ValueError("reading is not tagged at the model level and no tagset given")
        return project_tag(r.analysis, self.level, self.params or None, tagset).label


def _sentences(corpus) -> list[list[Cohort]]:
    sents = getattr(corpus, "sentences", corpus)
    return [list(s) for s in sents]


def train_model(corpus, order: int = 2, level: int = 2, params: Sequence[str] | None = None,
                lam: Fraction | float | int | str = 1, tagset: TagsetConfig | None = None,
                inventory: Iterable[str] | None = None) -> StatModel:
    """Estimate counts from a fully disambiguated corpus.

    The tag inventory is every tag seen in the corpus, extended by
    ``inventory`` when given.  Sentences are padded with start symbols on the
    left and one end symbol on the right.
    """
    lam = Fraction(str(lam)) if isinstance(lam, float) else Fraction(lam)
    if lam <= 0:
        raise TrainingError("smoothing constant must be > 0")
    if order not in (2, 3):
        raise TrainingError("order must be 2 or 3")
    sents = _sentences(corpus)
    if not any(sents):
        raise TrainingError("empty training corpus")
    params_t = tuple(params or ())
    probe = StatModel(order, level, params_t, (), {}, Counter(), Counter(), lam)
    trans: dict[tuple[str, ...], Counter] = defaultdict(Counter)
    em_lemma: Counter = Counter()
    em_form: Counter = Counter()
    seen: dict[str, None] = {}
    for si, sent in enumerate(sents, 1):
        hist = [START] * (order - 1)
        for ti, c in enumerate(sent, 1):
            if len(c.readings) != 1:
                raise TrainingError(f"sentence {si}, token {ti} ({c.surface!r}) has "
                                    f"{len(c.readings)} readings; training needs exactly 1")
            r = c.readings[0]
            tag = probe.tag_of(r, tagset)
            seen.setdefault(tag, None)
            trans[tuple(hist)][tag] += 1
            em_form[(c.surface, tag)] += 1
            em_lemma[(r.analysis.lemma, tag)] += 1
            hist = (hist + [tag])[1:]
        trans[tuple(hist)][END] += 1
    for t in inventory or ():
        if t in BOUNDARIES:
            continue
        seen.setdefault(t, None)
    tags = tuple(sorted(seen))
    return StatModel(order, level, params_t, tags, dict(trans), em_lemma, em_form, lam)


# ---------------------------------------------------------------------------
# decoding

def viterbi_decode(sentence: Sequence[Cohort], m: StatModel,
                   tagset: TagsetConfig | None = None) -> list[tuple[Cohort, int]]:
    """Most probable reading sequence; returns ``(cohort, chosen index)`` pairs.

    Scores are exact rationals.  Among equally probable sequences the one
    with the lowest reading index at the earliest differing position wins:
    each state keeps its best prefix under (score, smallest index tuple),
    which is sound because equal scores compare exactly.
    """
    n = len(sentence)
    if n == 0:
        return []
    for c in sentence:
        if not c.readings:
            raise ValueError(f"empty cohort for {c.surface!r}")
    k = m.order - 1
    tags = [[m.tag_of(r, tagset) for r in c.readings] for c in sentence]
    emit = [[m.emission(c.surface, r.analysis.lemma, t) for r, t in zip(c.readings, ts)]
            for c, ts in zip(sentence, tags)]

    def history(state, i):
        # state holds reading indices of positions i-k+1 .. i (None = start)
        return tuple(START if j is None else tags[i - k + 1 + p][j]
                     for p, j in enumerate(state))

    # state: last k reading indices; value: (score, path)
    best: dict[tuple, tuple[Fraction, tuple[int, ...]]] = {
        (None,) * k: (Fraction(1), ())}
    for i in range(n):
        nxt: dict[tuple, tuple[Fraction, tuple[int, ...]]] = {}
        for state, (score, path) in best.items():
            h = history(state, i - 1)
            for j, t in enumerate(tags[i]):
                s = score * m.transition(h, t) * emit[i][j]
                key = (state + (j,))[1:]
                cand = (s, path + (j,))
                cur = nxt.get(key)
                if cur is None or s > cur[0] or (s == cur[0] and cand[1] < cur[1]):
                    nxt[key] = cand
        best = nxt
    final = None
    for state, (score, path) in best.items():
        s = score * m.transition(history(state, n - 1), END)
        if final is None or s > final[0] or (s == final[0] and path < final[1]):
            final = (s, path)
    return [(c, j) for c, j in zip(sentence, final[1])]


def sequence_score(sentence: Sequence[Cohort], choice: Sequence[int], m: StatModel,
                   tagset: TagsetConfig | None = None) -> Fraction:
    """Joint probability the model assigns to one reading sequence."""
    hist = [START] * (m.order - 1)
    p = Fraction(1)
    for c, j in zip(sentence, choice):
        r = c.readings[j]
        t = m.tag_of(r, tagset)
        p *= m.transition(hist, t) * m.emission(c.surface, r.analysis.lemma, t)
        hist = (hist + [t])[1:]
    return p * m.transition(hist, END)


def disambiguate(sentence: Sequence[Cohort], g: ConstraintGrammar | None, m: StatModel,
                 tagset: TagsetConfig | None = None) -> list[Cohort]:
    """Constraints first, then the decoder; one reading per cohort."""
    if not sentence:
        return []
    survivors = apply_constraints(sentence, g) if g is not None else list(sentence)
    return [c.with_readings([c.readings[j]]) for c, j in viterbi_decode(survivors, m, tagset)]


# ---------------------------------------------------------------------------
# model files

def _q(text: str) -> str:
    return quote(text, safe="+-_.:()=~!*'/@$&[]{}<>^,;")


def dump_model(m: StatModel) -> str:
    head = f"MODEL order={m.order} level={m.level} lambda={m.smoothing}"
    if m.params:
        head += " params=" + ",".join(m.params)
    lines = [head, "INVENTORY"]
    lines += [_q(t) for t in m.tag_inventory]
    lines.append("TRANSITIONS")
    for h in sorted(m.transition_counts):
        for t, n in sorted(m.transition_counts[h].items()):
            lines.append(f"{' '.join(_q(x) for x in h)}\t{_q(t)}\t{n}")
    lines.append("EMIT-LEMMA")
    for (lemma, t), n in sorted(m.emission_lemma_counts.items()):
        lines.append(f"{_q(lemma)}\t{_q(t)}\t{n}")
    lines.append("EMIT-FORM")
    for (form, t), n in sorted(m.emission_form_counts.items()):
        lines.append(f"{_q(form)}\t{_q(t)}\t{n}")
    return "\n".join(lines) + "\n"


_HEAD = re.compile(r"MODEL\s+order=(\d+)\s+level=(\d+)\s+lambda=(\S+)(?:\s+params=(\S+))?\s*$")
_SECTIONS = ("INVENTORY", "TRANSITIONS", "EMIT-LEMMA", "EMIT-FORM")


def load_model(text: str, source: str | None = None) -> StatModel:
    lines = text.splitlines()
    if not lines:
        raise ModelFormatError("empty model file", source=source)
    m = _HEAD.match(lines[0].strip())
    if not m:
        raise ModelFormatError("bad MODEL header", 1, source=source)
    order, level = int(m.group(1)), int(m.group(2))
    try:
        lam = Fraction(m.group(3))
    except ValueError:
        raise ModelFormatError(f"bad lambda {m.group(3)!r}", 1, source=source) from None
    params = tuple(m.group(4).split(",")) if m.group(4) else ()
    section = None
    inventory: list[str] = []
    trans: dict[tuple[str, ...], Counter] = defaultdict(Counter)
    em_lemma: Counter = Counter()
    em_form: Counter = Counter()
    for lineno, line in enumerate(lines[1:], 2):
        if not line.strip():
            continue
        if line.strip() in _SECTIONS:
            section = line.strip()
            continue
        if section is None:
            raise ModelFormatError("data before first section", lineno, source=source)
        if section == "INVENTORY":
            inventory.append(unquote(line.strip()))
            continue
        parts = line.split("\t")
        if len(parts) != 3 or not parts[2].strip().isdigit():
            raise ModelFormatError("expected key<TAB>tag<TAB>count", lineno, source=source)
        key, tag, count = unquote(parts[0]), unquote(parts[1]), int(parts[2])
        if section == "TRANSITIONS":
            h = tuple(unquote(x) for x in parts[0].split(" "))
            if len(h) != order - 1:
                raise ModelFormatError(f"history length {len(h)} does not match order {order}",
                                       lineno, source=source)
            trans[h][tag] += count
        elif section == "EMIT-LEMMA":
            em_lemma[(key, tag)] += count
        else:
            em_form[(key, tag)] += count
    if not inventory:
        inventory = sorted({t for c in trans.values() for t in c} - set(BOUNDARIES))
    try:
        return StatModel(order, level, params, tuple(inventory), dict(trans), em_lemma,
                         em_form, lam)
    except ValueError as exc:
        raise ModelFormatError(str(exc), 1, source=source) from None


def tagged_readings(c: Cohort, m: StatModel, tagset: TagsetConfig) -> Cohort:
    """Attach model-level tags to every reading of ``c``."""
    return c.with_readings(
        Reading(r.analysis, Tag(m.level, m.tag_of(r, tagset), m.params if m.level == 3 else ()))
        for r in c.readings)
