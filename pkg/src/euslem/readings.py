"""Value types shared across the pipeline, plus the canonical reading syntax.

An :class:`Analysis` is one morphological reading of a word-form; a
:class:`Cohort` is a word-form with all its candidate readings.  The
canonical rendering of an analysis (``render_analysis``) is a single line of
whitespace-separated atoms that losslessly encodes every field, so it also
serves as the level-4 tag and as the cohort-file reading syntax.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, NamedTuple
from urllib.parse import quote, unquote

SOURCES = ("lexicon", "variant", "guesser")
ROLES = ("stem", "inflection", "derivation", "boundary")

Features = tuple[tuple[str, str], ...]


def freeze(feats: Mapping[str, str] | Iterable[tuple[str, str]]) -> Features:
    if isinstance(feats, dict):
        return tuple(sorted(feats.items()))
    if isinstance(feats, (tuple, list)):
        return tuple(sorted(feats))
    return tuple(sorted(feats.items() if isinstance(feats, Mapping) else feats))


class MorphemeSegment(NamedTuple):
    lexical_form: str
    surface_span: tuple[int, int]
    gloss: str = ""
    features: Features = ()
    role: str = "inflection"


class EllipsisSlot(NamedTuple):
    elided_category: str = "NOUN"
    inflection: Features = ()

    @property
    def feats(self) -> dict[str, str]:
        return dict(self.inflection)


class Analysis(NamedTuple):
    """One reading of a word-form (immutable; use ``_replace`` to derive)."""

    lemma: str
    segments: tuple[MorphemeSegment, ...] = ()
    features: Features = ()
    ellipsis_chain: tuple[EllipsisSlot, ...] = ()
    compound_index: tuple[int, int] | None = None
    derived_category: str | None = None
    source: str = "lexicon"
    standard: bool = True

    @property
    def feats(self) -> dict[str, str]:
        return dict(self.features)

    @property
    def category(self) -> str | None:
        return self.feats.get("category")

    @property
    def subcategory(self) -> str | None:
        return self.feats.get("subcategory")

    @property
    def lexical(self) -> str:
        return "".join(s.lexical_form for s in self.segments)

    def outer_feats(self) -> dict[str, str]:
        """Features of the word's final inflection (outermost ellipsis slot wins)."""
        out = self.feats
        if self.ellipsis_chain:
            out.update(self.ellipsis_chain[-1].feats)
        return out


@dataclass(frozen=True)
class Tag:
    level: int
    label: str
    params_used: tuple[str, ...] = ()


class Reading(NamedTuple):
    analysis: Analysis
    tag: Tag | None = None


@dataclass(frozen=True)
class Cohort:
    surface: str
    readings: tuple[Reading, ...] = ()

    def __post_init__(self):
        # accept bare analyses for convenience
        rs = tuple(r if isinstance(r, Reading) else Reading(r) for r in self.readings)
        object.__setattr__(self, "readings", rs)

    def __len__(self) -> int:
        return len(self.readings)

    @property
    def analyses(self) -> list[Analysis]:
        return [r.analysis for r in self.readings]

    def with_readings(self, readings: Iterable[Reading]) -> Cohort:
        return replace(self, readings=tuple(readings))


# ---------------------------------------------------------------------------
# canonical rendering

_SAFE = "+-_.~!?*()'/@$&[]{}<>^;"


def _q(text: str) -> str:
    return quote(text, safe=_SAFE)


def _render_feats(feats: Features, prefix: str = "") -> list[str]:
    return [f"{prefix}{_q(k)}={_q(v)}" for k, v in feats]


def render_analysis(a: Analysis) -> str:
    atoms = [f'"{_q(a.lemma)}"']
    atoms += _render_feats(a.features)
    for n, slot in enumerate(a.ellipsis_chain, 1):
        atoms.append(f"E{n}={_q(slot.elided_category)}")
        atoms += _render_feats(slot.inflection, f"E{n}.")
    if a.derived_category:
        atoms.append(f"DERIV={_q(a.derived_category)}")
    if a.compound_index:
        atoms.append(f"CMP={a.compound_index[0]}/{a.compound_index[1]}")
    atoms.append(f"SRC={a.source}")
    if not a.standard:
        atoms.append("NONSTD")
    for s in a.segments:
        feats = ",".join(f"{_q(k)}:{_q(v)}" for k, v in s.features)
        atoms.append("SEG=" + "|".join([
            _q(s.lexical_form), f"{s.surface_span[0]}-{s.surface_span[1]}", s.role,
            _q(s.gloss), feats]))
    return " ".join(atoms)


_SLOT = re.compile(r"E(\d+)$")
_SLOT_FEAT = re.compile(r"E(\d+)\.(.+)$")


def parse_analysis(text: str) -> Analysis:
    """Inverse of :func:`render_analysis`; raises ``ValueError`` on bad input."""
    atoms = text.split()
    if not atoms or not (atoms[0].startswith('"') and atoms[0].endswith('"')
                         and len(atoms[0]) >= 2):
        raise ValueError("reading must start with a quoted lemma")
    lemma = unquote(atoms[0][1:-1])
    feats: list[tuple[str, str]] = []
    slots: dict[int, list] = {}
    segments = []
    derived = None
    cmp_index = None
    source = None
    standard = True
    for atom in atoms[1:]:
        if atom == "NONSTD":
            standard = False
            continue
        if "=" not in atom:
            raise ValueError(f"bad atom {atom!r}")
        key, val = atom.split("=", 1)
        if key == "SRC":
            if val not in SOURCES:
                raise ValueError(f"unknown source {val!r}")
            source = val
        elif key == "DERIV":
            derived = unquote(val)
        elif key == "CMP":
            i, n = val.split("/")
            cmp_index = (int(i), int(n))
        elif key == "SEG":
            parts = val.split("|")
            if len(parts) != 5:
                raise ValueError(f"bad segment {val!r}")
            lex, span, role, gloss, fs = parts
            a, b = span.split("-")
            if role not in ROLES:
                raise ValueError(f"unknown role {role!r}")
            sf = []
            if fs:
                for kv in fs.split(","):
                    k, v = kv.split(":", 1)
                    sf.append((unquote(k), unquote(v)))
            segments.append(MorphemeSegment(unquote(lex), (int(a), int(b)), unquote(gloss),
                                            tuple(sf), role))
        elif m := _SLOT.match(key):
            slots.setdefault(int(m.group(1)), [None, []])[0] = unquote(val)
        elif m := _SLOT_FEAT.match(key):
            slots.setdefault(int(m.group(1)), [None, []])[1].append(
                (unquote(m.group(2)), unquote(val)))
        else:
            feats.append((unquote(key), unquote(val)))
    if source is None:
        raise ValueError("reading lacks SRC=")
    chain = []
    for n in sorted(slots):
        ecat, infl = slots[n]
        if ecat is None:
            raise ValueError(f"ellipsis slot {n} lacks a category")
        chain.append(EllipsisSlot(ecat, tuple(infl)))
    if sorted(slots) != list(range(1, len(slots) + 1)):
        raise ValueError("ellipsis slots must be numbered from 1")
    return Analysis(lemma, tuple(segments), tuple(feats), tuple(chain), cmp_index, derived,
                    source, standard)
