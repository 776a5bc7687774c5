"""Tokenization, cohort streams, ambiguity statistics and evaluation."""

from __future__ import annotations

import io
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO
from urllib.parse import quote, unquote

from .errors import AlignmentMismatch, CorpusFormatError
from .readings import Cohort, Reading, Tag, parse_analysis, render_analysis
from .tagset import TagsetConfig, project_tag

TERMINAL = frozenset(".?!")

Sentence = list[Cohort]


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def tokenize(text: str) -> list[list[str]]:
    """Split text into sentences of tokens.

    Tokens are whitespace-delimited; every punctuation character becomes its
    own token.  A run of terminal marks (``.?!``) ends the sentence.
    """
    tokens: list[str] = []
    for chunk in text.split():
        word = ""
        for ch in chunk:
            if _is_punct(ch):
                if word:
                    tokens.append(word)
                    word = ""
                tokens.append(ch)
            else:
                word += ch
        if word:
            tokens.append(word)
    sentences: list[list[str]] = []
    current: list[str] = []
    for k, tok in enumerate(tokens):
        current.append(tok)
        if tok in TERMINAL and (k + 1 == len(tokens) or tokens[k + 1] not in TERMINAL):
            sentences.append(current)
            current = []
    if current:
        sentences.append(current)
    return sentences


# ---------------------------------------------------------------------------
# cohort streams

@dataclass
class AnnotatedCorpus:
    sentences: list[Sentence] = field(default_factory=list)
    level: int | None = None
    params: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    @property
    def cohorts(self) -> list[Cohort]:
        return [c for s in self.sentences for c in s]

    def is_disambiguated(self) -> bool:
        return all(len(c.readings) == 1 for c in self.cohorts)


_META = "#!euslem"
_LABEL_SAFE = "+-_.:()=~!*'/@$&[]{}<>^,;"


def format_reading(r: Reading) -> str:
    text = render_analysis(r.analysis)
    t = r.tag
    if t is None:
        return text
    if t.level == 4:
        return text + " TAG4"
    text += f" TAG{t.level}={quote(t.label, safe=_LABEL_SAFE)}"
    if t.params_used:
        text += " TAGP=" + ",".join(quote(p, safe="_-.") for p in t.params_used)
    return text


def parse_reading(text: str) -> Reading:
    atoms = text.split()
    rest, tag, tagp = [], None, None
    for atom in atoms:
        if atom == "TAG4":
            tag = (4, None)
        elif atom[:3] == "TAG" and atom[3:4].isdigit() and atom[4:5] == "=":
            tag = (int(atom[3]), unquote(atom[5:]))
        elif atom.startswith("TAGP="):
            tagp = tuple(unquote(p) for p in atom[5:].split(",") if p)
        else:
            rest.append(atom)
    a = parse_analysis(" ".join(rest))
    if tag is None:
        if tagp is not None:
            raise ValueError("TAGP= without a tag")
        return Reading(a)
    level, label = tag
    if not 1 <= level <= 4:
        raise ValueError(f"bad tag level {level}")
    if level == 4:
        label = render_analysis(a)
    return Reading(a, Tag(level, label, tagp or ()))


def write_cohorts(corpus: AnnotatedCorpus | Iterable[Sentence], stream: TextIO) -> None:
    level = getattr(corpus, "level", None)
    if level is not None:
        head = f"{_META} level={level}"
        if corpus.params:
            head += " params=" + ",".join(corpus.params)
        stream.write(head + "\n")
    for sent in corpus:
        if not sent:
            continue
        for c in sent:
            stream.write(f'"<{c.surface}>"\n')
            for r in c.readings:
                stream.write("\t" + format_reading(r) + "\n")
        stream.write("\n")


def dumps_cohorts(corpus) -> str:
    buf = io.StringIO()
    write_cohorts(corpus, buf)
    return buf.getvalue()


def read_cohorts(stream: TextIO | str, source: str | None = None) -> AnnotatedCorpus:
    """Parse a cohort stream (or its text)."""
    text = stream if isinstance(stream, str) else stream.read()
    corpus = AnnotatedCorpus()
    sent: list[Cohort] = []
    surface = None
    readings: list[Reading] = []

    def flush_cohort():
        nonlocal surface, readings
        if surface is not None:
            sent.append(Cohort(surface, tuple(readings)))
        surface, readings = None, []

    def err(msg, line, col=None):
        return CorpusFormatError(msg, line, col, source=source)

    for lineno, line in enumerate(text.split("\n"), 1):
        line = line.rstrip("\r")
        if lineno == 1 and line.startswith(_META):
            for kv in line[len(_META):].split():
                k, _, v = kv.partition("=")
                if k == "level" and v.isdigit():
                    corpus.level = int(v)
                elif k == "params":
                    corpus.params = tuple(p for p in v.split(",") if p)
                else:
                    raise err(f"bad metadata item {kv!r}", lineno)
            continue
        if not line.strip():
            flush_cohort()
            if sent:
                corpus.sentences.append(sent)
                sent = []
            continue
        if line.startswith("\t"):
            if surface is None:
                raise err("reading line without a preceding cohort header", lineno, 1)
            try:
                readings.append(parse_reading(line[1:]))
            except ValueError as exc:
                raise err(str(exc), lineno, 2) from None
            continue
        if line.startswith('"<') and line.endswith('>"') and len(line) >= 4:
            flush_cohort()
            surface = line[2:-2]
            continue
        raise err("expected a cohort header or a TAB-indented reading", lineno, 1)
    flush_cohort()
    if sent:
        corpus.sentences.append(sent)
    return corpus


# ---------------------------------------------------------------------------
# statistics

@dataclass(frozen=True)
class AmbiguityStats:
    tokens: int
    ambiguous_tokens: int
    total_readings: int
    # variants counting only category-distinct readings
    categorially_ambiguous_tokens: int = 0
    category_readings: int = 0

    def __post_init__(self):
        if self.tokens <= 0:
            raise ValueError("no tokens")

    @property
    def ambiguity_rate(self) -> float:
        return self.ambiguous_tokens / self.tokens

    @property
    def readings_per_token(self) -> float:
        return self.total_readings / self.tokens

    @property
    def categorial_ambiguity_rate(self) -> float:
        return self.categorially_ambiguous_tokens / self.tokens

    @property
    def categories_per_token(self) -> float:
        return self.category_readings / self.tokens

    def __add__(self, other: AmbiguityStats) -> AmbiguityStats:
        return AmbiguityStats(self.tokens + other.tokens,
                              self.ambiguous_tokens + other.ambiguous_tokens,
                              self.total_readings + other.total_readings,
                              self.categorially_ambiguous_tokens
                              + other.categorially_ambiguous_tokens,
                              self.category_readings + other.category_readings)

    def table(self) -> str:
        rows = [("tokens", str(self.tokens)),
                ("ambiguous_tokens", str(self.ambiguous_tokens)),
                ("total_readings", str(self.total_readings)),
                ("ambiguity_rate", f"{self.ambiguity_rate:.4f}"),
                ("readings_per_token", f"{self.readings_per_token:.4f}"),
                ("categorially_ambiguous_tokens", str(self.categorially_ambiguous_tokens)),
                ("categorial_ambiguity_rate", f"{self.categorial_ambiguity_rate:.4f}"),
                ("categories_per_token", f"{self.categories_per_token:.4f}")]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v}" for k, v in rows) + "\n"


def _category(r: Reading) -> str | None:
    a = r.analysis
    return a.derived_category or a.category


def ambiguity_stats(corpus: AnnotatedCorpus | Iterable[Sentence]) -> AmbiguityStats:
    tokens = amb = total = cat_amb = cat_total = 0
    for sent in corpus:
        for c in sent:
            n = len(c.readings)
            cats = len({_category(r) for r in c.readings})
            tokens += 1
            total += n
            amb += n > 1
            cat_total += cats
            cat_amb += cats > 1
    if tokens == 0:
        raise ValueError("empty corpus")
    return AmbiguityStats(tokens, amb, total, cat_amb, cat_total)


# ---------------------------------------------------------------------------
# evaluation

@dataclass(frozen=True)
class TagScore:
    precision: float
    recall: float
    support: int


@dataclass(frozen=True)
class EvalReport:
    tokens: int
    correct: int
    per_tag: dict[str, TagScore]

    @property
    def accuracy(self) -> float:
        return self.correct / self.tokens if self.tokens else 0.0

    def table(self) -> str:
        lines = [f"tokens    {self.tokens}", f"correct   {self.correct}",
                 f"accuracy  {self.accuracy:.4f}", "",
                 f"{'tag':<40} {'precision':>9} {'recall':>9} {'support':>8}"]
        for tag in sorted(self.per_tag):
            s = self.per_tag[tag]
            lines.append(f"{tag:<40} {s.precision:>9.4f} {s.recall:>9.4f} {s.support:>8}")
        return "\n".join(lines) + "\n"


def _label(c: Cohort, level: int, params: Sequence[str] | None,
           tagset: TagsetConfig | None) -> str:
    if not c.readings:
        raise ValueError(f"cohort {c.surface!r} has no reading")
    r = c.readings[0]
    if r.tag is not None and r.tag.level == level and (
            level != 3 or params is None or tuple(r.tag.params_used) == tuple(params)):
        return r.tag.label
    if level == 4:
        return render_analysis(r.analysis)
    if tagset is None:
        raise ValueError("readings are not tagged at this level and no tagset was given")
    return project_tag(r.analysis, level, params, tagset).label


def evaluate(gold: AnnotatedCorpus | Iterable[Sentence],
             system: AnnotatedCorpus | Iterable[Sentence], level: int,
             params: Sequence[str] | None = None,
             tagset: TagsetConfig | None = None) -> EvalReport:
    """Token accuracy of ``system`` against ``gold`` (first reading of each cohort)."""
    gs, ss = list(gold), list(system)
    tp: Counter = Counter()
    gold_n: Counter = Counter()
    sys_n: Counter = Counter()
    tokens = correct = 0
    for si in range(max(len(gs), len(ss))):
        if si >= len(gs) or si >= len(ss):
            raise AlignmentMismatch(f"sentence counts differ ({len(gs)} vs {len(ss)})", (si, 0))
        g_sent, s_sent = gs[si], ss[si]
        for ti in range(max(len(g_sent), len(s_sent))):
            if ti >= len(g_sent) or ti >= len(s_sent) \
                    or g_sent[ti].surface != s_sent[ti].surface:
                gw = g_sent[ti].surface if ti < len(g_sent) else "<end>"
                sw = s_sent[ti].surface if ti < len(s_sent) else "<end>"
                raise AlignmentMismatch(
                    f"token streams diverge at sentence {si + 1}, token {ti + 1}: "
                    f"{gw!r} vs {sw!r}", (si, ti))
            g = _label(g_sent[ti], level, params, tagset)
            s = _label(s_sent[ti], level, params, tagset)
            tokens += 1
            gold_n[g] += 1
            sys_n[s] += 1
            if g == s:
                correct += 1
                tp[g] += 1
    per_tag = {t: TagScore(tp[t] / sys_n[t] if sys_n[t] else 0.0,
                           tp[t] / gold_n[t] if gold_n[t] else 0.0, gold_n[t])
               for t in set(gold_n) | set(sys_n)}
    return EvalReport(tokens, correct, per_tag)
