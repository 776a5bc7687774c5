"""Loading shipped resources and running the tagging pipeline on text."""

from __future__ import annotations

import os
import pickle
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .analyzer import AnalyzerConfig, analyze, mark_compounds
from .disambiguator import ConstraintGrammar, StatModel, apply_constraints, viterbi_decode
from .errors import DataError, UnanalyzableWord
from .lexicon import MorphNetwork, attach_guesser, compile_network, parse_lexicon
from .readings import Analysis, Cohort, Reading, freeze
from .tagset import TagsetConfig, tag_cohort
from .twolevel import RuleSet, parse_rules

DATA_ENV = "EUSLEM_DATA"
NET_MAGIC = b"EUSLEMNET"
NET_VERSION = 1

DEFAULT_FILES = {
    "lexicon": "basque.lex",
    "rules": "basque.rul",
    "tagset": "default.tgs",
    "cg": "basque.cg",
    "model": "default.mod",
    "compounds": "compounds.txt",
}


def package_data_dir() -> Path:
    return Path(__file__).resolve().parent / "data"


def data_dir() -> Path:
    """``$EUSLEM_DATA`` when set, else the data shipped with the package."""
    env = os.environ.get(DATA_ENV)
    return Path(env) if env else package_data_dir()


def default_path(kind: str) -> Path:
    return data_dir() / DEFAULT_FILES[kind]


def read_text(path: str | os.PathLike) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise DataError("no such file", source=str(path)) from None
    except UnicodeDecodeError as exc:
        raise DataError(f"not valid UTF-8 ({exc.reason})", source=str(path)) from None
    except OSError as exc:
        raise DataError(exc.strerror or str(exc), source=str(path)) from None


# ---------------------------------------------------------------------------
# compiled networks

def save_network(net: MorphNetwork, path: str | os.PathLike) -> None:
    payload = pickle.dumps(net, protocol=pickle.HIGHEST_PROTOCOL)
    Path(path).write_bytes(NET_MAGIC + bytes([NET_VERSION]) + payload)


def load_network(path: str | os.PathLike) -> MorphNetwork:
    """Read a network written by :func:`save_network`.

    The payload is a pickle, so only load files you produced yourself.
    """
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise DataError(exc.strerror or str(exc), source=str(path)) from None
    head = len(NET_MAGIC)
    if not blob.startswith(NET_MAGIC) or len(blob) <= head:
        raise DataError("not a compiled network (bad magic header)", source=str(path))
    if blob[head] != NET_VERSION:
        raise DataError(f"network format version {blob[head]} is not supported "
                        f"(expected {NET_VERSION}); recompile it", source=str(path))
    try:
        net = pickle.loads(blob[head + 1:])
    except Exception as exc:
        raise DataError(f"corrupt network payload: {exc}", source=str(path)) from None
    if not isinstance(net, MorphNetwork):
        raise DataError("payload is not a network", source=str(path))
    return net


def build_network(lexicon_path, rules_path, max_ellipsis_depth: int = 2,
                  tagset: TagsetConfig | None = None) -> MorphNetwork:
    rules = parse_rules(read_text(rules_path), source=str(rules_path))
    cats = tagset.categories + tuple(tagset.derived_categories) if tagset else None
    lex = parse_lexicon(read_text(lexicon_path), categories=cats, source=str(lexicon_path))
    net = compile_network(lex, rules, max_ellipsis_depth)
    opened = tagset.open_categories if tagset else net.open_categories
    return attach_guesser(net, lex.generics, opened)


def load_compounds(path) -> list[tuple[str, ...]]:
    """One compound per line, members separated by spaces; ``#`` starts a comment."""
    out = []
    for line in read_text(path).splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(tuple(line.lower().split()))
    return out


# ---------------------------------------------------------------------------
# analysis of token streams

def residual_analysis(token: str) -> Analysis:
    """Stand-in reading for a token nothing else could analyze."""
    category = "PUNCTUATION" if token and not any(ch.isalnum() for ch in token) else "RESIDUAL"
    return Analysis(token, (), freeze({"category": category}), source="guesser")


def analyze_token(token: str, net: MorphNetwork, rules: RuleSet,
                  cfg: AnalyzerConfig) -> Cohort:
    try:
        found = analyze(token, net, rules, cfg)
    except UnanalyzableWord:
        found = []
    if not found:
        found = [residual_analysis(token)]
    return Cohort(token, tuple(Reading(a) for a in found))


def analyze_sentence(tokens: Sequence[str], net: MorphNetwork, rules: RuleSet,
                     cfg: AnalyzerConfig,
                     compounds: Iterable[Sequence[str]] = ()) -> list[Cohort]:
    cohorts = [analyze_token(t, net, rules, cfg) for t in tokens]
    return mark_compounds(cohorts, compounds) if compounds else cohorts


@dataclass
class Pipeline:
    """Everything the ``tag`` command needs, loaded up front."""

    net: MorphNetwork
    rules: RuleSet
    tagset: TagsetConfig
    cfg: AnalyzerConfig
    grammar: ConstraintGrammar | None = None
    model: StatModel | None = None
    compounds: list[tuple[str, ...]] = field(default_factory=list)
    level: int = 2
    params: tuple[str, ...] | None = None

    def analyze(self, tokens: Sequence[str]) -> list[Cohort]:
        return analyze_sentence(tokens, self.net, self.rules, self.cfg, self.compounds)

    def tag(self, tokens: Sequence[str]) -> list[Cohort]:
        """One reading per token: analyze, mark compounds, tag, constrain, decode."""
        if not tokens:
            return []
        sent = [tag_cohort(c, self.level, self.params, self.tagset) for c in self.analyze(tokens)]
        if self.grammar is not None:
            sent = apply_constraints(sent, self.grammar)
        if self.model is None:
            return [c.with_readings(c.readings[:1]) for c in sent]
        return [c.with_readings([c.readings[j]])
                for c, j in viterbi_decode(sent, self.model, self.tagset)]

    def run(self, sentences: Sequence[Sequence[str]], *, tag: bool = True,
            jobs: int = 1) -> list[list[Cohort]]:
        """Process sentences, possibly in parallel; output keeps input order."""
        fn = self.tag if tag else self.analyze
        if jobs <= 1 or len(sentences) < 2:
            return [fn(s) for s in sentences]
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, sentences))

