"""Core domain types and the target#level label algebra.

A comment is judged against five fixed targets, each with a hatred level.
Level ``NORMAL`` means the target is not mentioned at all and is therefore
never part of a serialized ``target#level`` term: the term list of a
comment carries only the mentioned targets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Iterable, Iterator, Optional, Sequence

from .errors import ConflictingTerm, InvalidLevel, ParseError, UnknownTarget

__all__ = [
    "Target",
    "HatredLevel",
    "LabelVector",
    "TargetLevelTerm",
    "Comment",
    "LabeledComment",
    "TARGETS",
    "parse_label_list",
    "format_label_list",
    "terms_to_label_vector",
    "label_vector_to_terms",
]


class Target(Enum):
    """The five communities a comment may aim at, in fixed order."""

    INDIVIDUALS = "individuals"
    GROUPS = "groups"
    RELIGION_CREED = "religion/creed"
    RACE_ETHNICITY = "race/ethnicity"
    POLITICS = "politics"

    @property
    def slug(self) -> str:
        return self.value

    @property
    def index(self) -> int:
        return _TARGET_INDEX[self]

    @classmethod
    def from_slug(cls, slug: str) -> "Target":
        """Resolve a canonical slug or any known alias (case-insensitive)."""
        try:
            return _ALIASES[slug.strip().lower()]
        except KeyError:
            raise UnknownTarget(slug) from None


TARGETS: tuple[Target, ...] = tuple(Target)
_TARGET_INDEX = {t: i for i, t in enumerate(TARGETS)}

# Canonical slugs plus the variant spellings seen in the wild for each
# target. The table is a function into targets: no alias is shared.
_ALIASES: dict[str, Target] = {}
for _target, _names in {
    Target.INDIVIDUALS: ("individuals", "individual"),
    Target.GROUPS: ("groups", "group"),
    Target.RELIGION_CREED: (
        "religion/creed", "religion-creed", "religion_creed", "religion", "creed",
    ),
    Target.RACE_ETHNICITY: (
        "race/ethnicity", "race-ethnicity", "race_ethnicity", "race/ethnic",
        "race", "ethnicity",
    ),
    Target.POLITICS: ("politics", "politic"),
}.items():
    for _name in _names:
        assert _name not in _ALIASES, f"alias {_name!r} mapped twice"
        _ALIASES[_name] = _target


class HatredLevel(IntEnum):
    """Per-target hatred level with its fixed numeric annotation code."""

    NORMAL = 0
    CLEAN = 1
    OFFENSIVE = 2
    HATE = 3

    @property
    def slug(self) -> str:
        return self.name.lower()

    @classmethod
    def from_code(cls, code: int) -> "HatredLevel":
        try:
            return cls(code)
        except ValueError:
            raise InvalidLevel(f"level code must be in 0..3, got {code!r}") from None

    @classmethod
    def from_slug(cls, slug: str) -> "HatredLevel":
        try:
            return cls[slug.strip().upper()]
        except KeyError:
            raise InvalidLevel(f"unknown level name: {slug!r}") from None


@dataclass(frozen=True)
class TargetLevelTerm:
    """A mentioned target together with its non-NORMAL hatred level."""

    target: Target
    level: HatredLevel

    def __post_init__(self):
        if self.level is HatredLevel.NORMAL:
            raise InvalidLevel(
                f"term for {self.target.slug} may not carry level 'normal'"
            )

    def __str__(self) -> str:
        return f"{self.target.slug}#{self.level.slug}"

    @classmethod
    def parse(cls, text: str) -> "TargetLevelTerm":
        """Parse a single ``slug#level`` term; aliases are resolved."""
        head, sep, tail = text.partition("#")
        if not sep or not head or not tail:
            raise ParseError(f"malformed term: {text!r}")
        return cls(Target.from_slug(head), HatredLevel.from_slug(tail))


@dataclass(frozen=True)
class LabelVector:
    """One hatred level per target; unmentioned targets are NORMAL."""

    levels: tuple[HatredLevel, HatredLevel, HatredLevel, HatredLevel, HatredLevel]

    def __post_init__(self):
        if len(self.levels) != len(TARGETS):
            raise InvalidLevel(
                f"label vector needs {len(TARGETS)} levels, got {len(self.levels)}"
            )
        object.__setattr__(
            self, "levels", tuple(HatredLevel(lv) for lv in self.levels)
        )

    @classmethod
    def normal(cls) -> "LabelVector":
        return cls.from_codes([0] * len(TARGETS))

    @classmethod
    def from_codes(cls, codes: Sequence[int]) -> "LabelVector":
        if len(codes) != len(TARGETS):
            raise InvalidLevel(
                f"label vector needs {len(TARGETS)} codes, got {len(codes)}"
            )
        return cls(tuple(HatredLevel.from_code(c) for c in codes))  # type: ignore[arg-type]

    def to_codes(self) -> tuple[int, ...]:
        return tuple(int(lv) for lv in self.levels)

    def level_for(self, target: Target) -> HatredLevel:
        return self.levels[target.index]

    def __iter__(self) -> Iterator[HatredLevel]:
        return iter(self.levels)


@dataclass(frozen=True)
class Comment:
    """A single comment drawn from a dataset or a live stream."""

    id: str
    text: str
    timestamp: Optional[int] = None  # epoch milliseconds
    source: str = ""

    def __post_init__(self):
        if not self.id:
            raise ValueError("comment id must be non-empty")
        if not self.text.strip():
            raise ValueError(f"comment {self.id!r} has empty text")


@dataclass(frozen=True)
class LabeledComment:
    comment: Comment
    labels: LabelVector


def parse_label_list(text: str) -> list[TargetLevelTerm]:
    """Parse a bracketed term list like ``[individuals#hate, group#hate]``.

    Terms may be separated by commas and/or whitespace. Alias slugs are
    resolved to canonical targets, duplicates with equal levels are
    dropped, and the result follows the fixed target order.
    """
    stripped = text.strip()
    if not (stripped.startswith("[") and stripped.endswith("]")):
        raise ParseError(f"label list must be bracketed: {text!r}")
    body = stripped[1:-1].strip()
    by_target: dict[Target, TargetLevelTerm] = {}
    if body:
        for piece in body.replace(",", " ").split():
            term = TargetLevelTerm.parse(piece)
            prior = by_target.get(term.target)
            if prior is not None and prior.level is not term.level:
                raise ConflictingTerm(
                    f"target {term.target.slug} listed with levels "
                    f"{prior.level.slug} and {term.level.slug}"
                )
            by_target[term.target] = term
    return [by_target[t] for t in TARGETS if t in by_target]


def format_label_list(terms: Iterable[TargetLevelTerm]) -> str:
    """Serialize terms canonically: ``[slug#level, slug#level]``."""
    ordered = _dedupe_ordered(terms)
    return "[" + ", ".join(str(t) for t in ordered) + "]"


def terms_to_label_vector(terms: Iterable[TargetLevelTerm]) -> LabelVector:
    """Place each term's level at its target; everything else is NORMAL."""
    levels = [HatredLevel.NORMAL] * len(TARGETS)
    for term in _dedupe_ordered(terms):
        levels[term.target.index] = term.level
    return LabelVector(tuple(levels))  # type: ignore[arg-type]


def label_vector_to_terms(vector: LabelVector) -> list[TargetLevelTerm]:
    """Drop NORMAL entries and emit terms in canonical target order."""
    return [
        TargetLevelTerm(target, level)
        for target, level in zip(TARGETS, vector.levels)
        if level is not HatredLevel.NORMAL
    ]


def _dedupe_ordered(terms: Iterable[TargetLevelTerm]) -> list[TargetLevelTerm]:
    by_target: dict[Target, TargetLevelTerm] = {}
    for term in terms:
        prior = by_target.get(term.target)
        if prior is not None and prior.level is not term.level:
            raise ConflictingTerm(
                f"target {term.target.slug} listed with levels "
                f"{prior.level.slug} and {term.level.slug}"
            )
        by_target[term.target] = term
    return [by_target[t] for t in TARGETS if t in by_target]
