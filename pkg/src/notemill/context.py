"""Rendering context and the rules deciding which candidate applies to it."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

LANGUAGE = re.compile(r"[a-z]{2,8}\Z")
LEVELS = range(1, 5)

# Most significant first. Engines may pass a different order.
DIMENSIONS = ("collection", "level", "language", "format")


class Format(str, enum.Enum):
    MATHML = "mathml"
    LATEX = "latex"
    TEXT = "text"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class RenderContext:
    language: str
    format: Format
    level: int
    collection: str = ""

    def __post_init__(self):
        if not isinstance(self.language, str) or not LANGUAGE.match(self.language):
            raise ValueError(f"invalid language tag {self.language!r}")
        object.__setattr__(self, "format", Format(self.format))
        if self.level not in LEVELS:
            raise ValueError(f"level must be within 1..4, got {self.level!r}")
        if self.collection is None:
            object.__setattr__(self, "collection", "")


@dataclass(frozen=True)
class ContextConstraint:
    """Empty sets and ``levels=None`` mean the dimension is unconstrained."""

    languages: frozenset[str] = frozenset()
    formats: frozenset[Format] = frozenset()
    levels: tuple[int, int] | None = None
    collections: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "languages", frozenset(self.languages))
        object.__setattr__(self, "formats", frozenset(Format(f) for f in self.formats))
        object.__setattr__(self, "collections", frozenset(self.collections))
        if self.levels is not None:
            lo, hi = self.levels
            if not (1 <= lo <= hi <= 4):
                raise ValueError(f"invalid level range {lo}-{hi}")
            object.__setattr__(self, "levels", (lo, hi))

    def static_ok(self, language: str, format: Format) -> bool:
        return (not self.languages or language in self.languages) and (
            not self.formats or format in self.formats
        )

    def dynamic_ok(self, level: int, collection: str) -> bool:
        if self.levels is not None and not (self.levels[0] <= level <= self.levels[1]):
            return False
        return not self.collections or (bool(collection) and collection in self.collections)

    @property
    def dynamic_total(self) -> bool:
        """True when no (level, collection) pair can make this constraint fail."""
        return not self.collections and self.levels in (None, (1, 4))


def eligible(c: ContextConstraint, ctx: RenderContext) -> bool:
    return c.static_ok(ctx.language, ctx.format) and c.dynamic_ok(ctx.level, ctx.collection)


def constraint_bits(c: ContextConstraint, priority=DIMENSIONS) -> tuple[int, ...]:
    """Which dimensions ``c`` specifies, ordered by ``priority``.

    For an eligible constraint this is its specificity, because every
    specified dimension is then also satisfied.
    """
    specified = {
        "collection": bool(c.collections),
        "level": c.levels is not None,
        "language": bool(c.languages),
        "format": bool(c.formats),
    }
    return tuple(int(specified[d]) for d in priority)


def specificity(c: ContextConstraint, ctx: RenderContext, priority=DIMENSIONS) -> tuple[int, ...]:
    """Lexicographically comparable 0/1 vector; higher is more specific."""
    if not eligible(c, ctx):
        raise ValueError("specificity is only defined for eligible constraints")
    return constraint_bits(c, priority)


def parse_levels(text: str) -> tuple[int, int]:
    m = re.fullmatch(r"\s*([1-4])\s*(?:-\s*([1-4])\s*)?", text)
    if not m:
        raise ValueError(f"invalid level range {text!r}")
    lo = int(m.group(1))
    hi = int(m.group(2) or lo)
    if lo > hi:
        raise ValueError(f"invalid level range {text!r}")
    return lo, hi


def check_priority(priority) -> tuple[str, ...]:
    priority = tuple(priority)
    if sorted(priority) != sorted(DIMENSIONS):
        raise ValueError(f"priority must order exactly {DIMENSIONS}")
    return priority
