"""Four-level tagset: configuration and projection of analyses to tags.

Labels are built as ``CORE[:SUB][+v1+v2...][(i)]`` where ``CORE`` is the
(derived) category with any ellipsis composition and ``(i)`` the compound
member index.  Category ids never contain ``:``, ``+`` or ``(``, so each
level's label determines the label of every coarser level.
"""

from __future__ import annotations

import re
import shlex
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import TagsetError
from .readings import Analysis, Cohort, Reading, Tag, render_analysis

EXPECTED_CATEGORIES = 17
DEFAULT_ELLIPSIS_PATTERN = "{base}_WITH_{ecat}_ELLIPSIS"
ABSENT = "∅"

_ID = re.compile(r"[A-Za-z][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class TagsetConfig:
    categories: tuple[str, ...]
    subcategories: dict[str, tuple[str, ...]] = field(default_factory=dict)
    level3_default_params: tuple[str, ...] = ()
    derivation_map: dict[tuple[str, str], str] = field(default_factory=dict)
    ellipsis_tag_pattern: str = DEFAULT_ELLIPSIS_PATTERN
    open_categories: tuple[str, ...] = ("NOUN", "VERB", "ADJECTIVE")

    @property
    def derived_categories(self) -> frozenset[str]:
        return frozenset(self.derivation_map.values())

    def known(self, category: str) -> bool:
        return category in self.categories or category in self.derived_categories

    def conformance(self) -> list[str]:
        """Problems a strict check reports (empty when conformant)."""
        issues = []
        if len(self.categories) != EXPECTED_CATEGORIES:
            issues.append(f"expected {EXPECTED_CATEGORIES} categories, found "
                          f"{len(self.categories)}")
        return issues


def load_tagset(text: str, strict: bool = False, source: str | None = None) -> TagsetConfig:
    """Parse a ``.tgs`` file.

    Directives (each ends with ``;``)::

        CATEGORY <id> ;
        SUBCAT <cat> <id> ... ;
        L3DEFAULT <key> ... ;
        DERIV <cat> + <suffix> -> <id> ;
        OPEN <cat> ... ;              # categories the guesser may propose
        ELLIPSIS "<pattern>" ;        # uses {base} and {ecat}
    """
    categories: list[str] = []
    subcats: dict[str, tuple[str, ...]] = {}
    l3: tuple[str, ...] = ()
    deriv: dict[tuple[str, str], str] = {}
    deriv_lines: dict[str, int] = {}
    pattern = DEFAULT_ELLIPSIS_PATTERN
    opened: tuple[str, ...] | None = None
    pending_subcats: list[tuple[str, int]] = []

    def err(msg, line):
        return TagsetError(msg, line, source=source)

    for lineno, stmt in _statements(text):
        try:
            toks = shlex.split(stmt, comments=False)
        except ValueError as exc:
            raise err(str(exc), lineno) from None
        head, args = toks[0].upper(), toks[1:]
        if head == "CATEGORY":
            if len(args) != 1 or not _ID.match(args[0]):
                raise err("CATEGORY takes one identifier", lineno)
            if args[0] in categories:
                raise err(f"duplicate category {args[0]!r}", lineno)
            categories.append(args[0])
        elif head == "SUBCAT":
            if len(args) < 2:
                raise err("SUBCAT needs a category and at least one subcategory", lineno)
            cat, subs = args[0], tuple(args[1:])
            if len(set(subs)) != len(subs):
                raise err(f"duplicate subcategory for {cat!r}", lineno)
            subcats[cat] = subcats.get(cat, ()) + subs
            pending_subcats.append((cat, lineno))
        elif head == "L3DEFAULT":
            l3 = tuple(args)
        elif head == "DERIV":
            if len(args) != 5 or args[1] != "+" or args[3] != "->":
                raise err("expected DERIV <cat> + <suffix> -> <id>", lineno)
            if not _ID.match(args[4]):
                raise err(f"bad derived category id {args[4]!r}", lineno)
            deriv[(args[0], args[2])] = args[4]
            deriv_lines[args[4]] = lineno
        elif head == "OPEN":
            opened = tuple(args)
        elif head == "ELLIPSIS":
            if len(args) != 1 or "{base}" not in args[0]:
                raise err("ELLIPSIS takes one quoted pattern containing {base}", lineno)
            pattern = args[0]
        else:
            raise err(f"unknown directive {toks[0]!r}", lineno)

    for cat, lineno in pending_subcats:
        if cat not in categories:
            raise err(f"SUBCAT for unknown category {cat!r}", lineno)
    for (cat, _), target in deriv.items():
        if target in categories:
            raise err(f"derivation target {target!r} collides with a category",
                      deriv_lines[target])
        if cat not in categories:
            raise err(f"derivation from unknown category {cat!r}", deriv_lines[target])
    for cat in opened or ():
        if cat not in categories:
            raise err(f"OPEN names unknown category {cat!r}", None)
    cfg = TagsetConfig(tuple(categories), subcats, l3, deriv, pattern,
                       opened if opened is not None else TagsetConfig.open_categories)
    if strict:
        issues = cfg.conformance()
        if issues:
            raise TagsetError("; ".join(issues), source=source)
    return cfg


def _statements(text: str) -> Iterable[tuple[int, str]]:
    buf: list[str] = []
    start = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw).strip()
        while line:
            if start is None:
                start = lineno
            head, sep, rest = line.partition(";")
            buf.append(head)
            if sep:
                stmt = " ".join(buf).strip()
                if stmt:
                    yield start, stmt
                buf, start = [], None
            line = rest.strip()
    if "".join(buf).strip():
        raise TagsetError("missing ';' at end of statement", start)


def _strip_comment(line: str) -> str:
    quoted = False
    for i, ch in enumerate(line):
        if ch == '"':
            quoted = not quoted
        elif ch == "#" and not quoted:
            return line[:i]
    return line


# ---------------------------------------------------------------------------
# projection

def compose_ellipsis_tag(base: str, chain: Sequence, cfg: TagsetConfig) -> str:
    if not chain:
        return base
    ecat = chain[-1].elided_category
    label = cfg.ellipsis_tag_pattern.format(base=base, ecat=ecat)
    return label if len(chain) == 1 else f"{label}_{len(chain)}"


def apply_derivation_tag(stem_category: str, suffix_gloss: str,
                         cfg: TagsetConfig) -> str | None:
    return cfg.derivation_map.get((stem_category, suffix_gloss))


def _core(a: Analysis, cfg: TagsetConfig) -> str:
    cat = a.derived_category or a.category
    if cat is None:
        raise TagsetError(f"analysis of {a.lemma!r} has no category")
    if not cfg.known(cat):
        raise TagsetError(f"unknown category {cat!r}")
    return compose_ellipsis_tag(cat, a.ellipsis_chain, cfg)


def project_tag(a: Analysis, level: int, params: Sequence[str] | None,
                cfg: TagsetConfig) -> Tag:
    """Tag of ``a`` at ``level`` (1 coarsest, 4 the full analysis)."""
    if level == 4:
        return Tag(4, render_analysis(a))
    if level not in (1, 2, 3):
        raise ValueError(f"tag level must be 1..4, got {level}")
    label = _core(a, cfg)
    used: tuple[str, ...] = ()
    if level >= 2 and a.subcategory and not a.derived_category:
        label += ":" + a.subcategory
    if level == 3:
        used = tuple(cfg.level3_default_params if params is None else params)
        feats = a.outer_feats()
        for key in used:
            label += "+" + (feats[key] if key in feats else f"{key}={ABSENT}")
    if a.compound_index:
        label += f"({a.compound_index[0]})"
    return Tag(level, label, used)


def tag_cohort(c: Cohort, level: int, params: Sequence[str] | None,
               cfg: TagsetConfig) -> Cohort:
    if not c.readings:
        raise TagsetError(f"empty cohort for {c.surface!r}")
    return c.with_readings(Reading(r.analysis, project_tag(r.analysis, level, params, cfg))
                           for r in c.readings)


def level1_of(label: str) -> str:
    """Coarsest label implied by any level-1..3 label."""
    idx = ""
    if label.endswith(")") and "(" in label:
        label, idx = label[:label.rindex("(")], label[label.rindex("("):]
    return re.split(r"[:+]", label, maxsplit=1)[0] + idx
