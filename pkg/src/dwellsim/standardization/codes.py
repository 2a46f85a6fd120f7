"""Hierarchical HS / KSIC codes and the embedded classification tables."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources


class CodeKind(str, Enum):
    HS = "HS"
    KSIC = "KSIC"


class TextKind(str, Enum):
    """Which raw field a text came from: cargo (CI) or owner (OI) information."""

    CI = "CI"
    OI = "OI"

    @property
    def code_kind(self) -> CodeKind:
        return CodeKind.HS if self is TextKind.CI else CodeKind.KSIC


# KSIC sections are letters, divisions are numbers; containment is by range.
KSIC_SECTION_RANGES: dict[str, tuple[int, int]] = {
    "A": (1, 3), "B": (5, 8), "C": (10, 34), "D": (35, 35), "E": (36, 39),
    "F": (41, 42), "G": (45, 47), "H": (49, 52), "I": (55, 56), "J": (58, 63),
    "K": (64, 66), "L": (68, 68), "M": (70, 73), "N": (74, 76), "O": (84, 84),
    "P": (85, 85), "Q": (86, 87), "R": (90, 91), "S": (94, 96), "T": (97, 98),
    "U": (99, 99),
}

LEVEL_WIDTH = {CodeKind.HS: (2, 4, 6), CodeKind.KSIC: (1, 2, 3)}


@dataclass(frozen=True)
class StandardCode:
    """Three-level code; every level may be None independently.

    Construction does not enforce the hierarchy. A backend can return a
    broken code and ``validate_hierarchy`` has to be able to report it.
    """

    kind: CodeKind
    lv1: str | None = None
    lv2: str | None = None
    lv3: str | None = None

    def level(self, n: int) -> str | None:
        if n not in (1, 2, 3):
            raise ValueError(f"level must be 1, 2 or 3, got {n}")
        return (self.lv1, self.lv2, self.lv3)[n - 1]

    @property
    def is_null(self) -> bool:
        return self.lv1 is None and self.lv2 is None and self.lv3 is None

    def as_tuple(self) -> tuple[str | None, str | None, str | None]:
        return (self.lv1, self.lv2, self.lv3)


@dataclass(frozen=True)
class CodeEntry:
    kind: CodeKind
    level: int
    code: str
    parent_code: str | None
    description: str


class CodeTable:
    """Curated code list for one classification system."""

    def __init__(self, kind: CodeKind, entries: list[CodeEntry]):
        self.kind = kind
        self._by_level: dict[int, dict[str, CodeEntry]] = {1: {}, 2: {}, 3: {}}
        for e in entries:
            if e.kind is not kind:
                raise ValueError(f"entry {e.code} has kind {e.kind}, table is {kind}")
            self._by_level[e.level][e.code] = e

    def contains(self, level: int, code: str) -> bool:
        return code in self._by_level[level]

    def get(self, level: int, code: str) -> CodeEntry | None:
        return self._by_level[level].get(code)

    def codes(self, level: int) -> list[str]:
        return sorted(self._by_level[level])

    def children(self, level: int, parent: str) -> list[str]:
        """Codes at ``level`` whose table parent is ``parent``."""
        return sorted(c for c, e in self._by_level[level].items() if e.parent_code == parent)

    def siblings(self, level: int, code: str) -> list[str]:
        e = self.get(level, code)
        if e is None:
            return []
        return [c for c in self.children(level, e.parent_code or "") if c != code]

    def description(self, level: int, code: str) -> str:
        e = self.get(level, code)
        return e.description if e is not None else ""


def _read_table(filename: str, kind: CodeKind) -> CodeTable:
    text = resources.files("dwellsim.standardization").joinpath("data", filename).read_text("utf-8")
    entries = []
    for row in csv.DictReader(text.splitlines()):
        entries.append(CodeEntry(
            kind=CodeKind(row["kind"]),
            level=int(row["level"]),
            code=row["code"],
            parent_code=row["parent_code"] or None,
            description=row["description"],
        ))
    return CodeTable(kind, entries)


@lru_cache(maxsize=None)
def load_table(kind: CodeKind) -> CodeTable:
    kind = CodeKind(kind)
    fname = "hs_codes.csv" if kind is CodeKind.HS else "ksic_codes.csv"
    return _read_table(fname, kind)


def ksic_section_of(division: str) -> str | None:
    if not (len(division) == 2 and division.isdigit()):
        return None
    d = int(division)
    for sec, (lo, hi) in KSIC_SECTION_RANGES.items():
        if lo <= d <= hi:
            return sec
    return None


def _well_formed(kind: CodeKind, level: int, code: str) -> bool:
    width = LEVEL_WIDTH[kind][level - 1]
    if len(code) != width:
        return False
    if kind is CodeKind.KSIC and level == 1:
        return code.isascii() and code.isupper() and code.isalpha()
    return code.isascii() and code.isdigit()


def _links_to_parent(kind: CodeKind, level: int, code: str, parent: str | None) -> bool:
    if level == 1:
        return True
    if parent is None:
        return False
    if kind is CodeKind.KSIC and level == 2:
        return ksic_section_of(code) == parent
    return code.startswith(parent)


@dataclass(frozen=True)
class HierarchyReport:
    """Per-level matched flags, index 0 is level 1."""

    matched: tuple[bool, bool, bool]

    def at(self, level: int) -> bool:
        return self.matched[level - 1]

    @property
    def all_matched(self) -> bool:
        return all(self.matched)

    def matched_non_null(self, code: StandardCode) -> bool:
        return all(m for m, c in zip(self.matched, code.as_tuple()) if c is not None)


def validate_code(code: StandardCode, table: CodeTable | None = None) -> HierarchyReport:
    """A level matches when it is present in the table and links to the level above."""
    table = table or load_table(code.kind)
    levels = code.as_tuple()
    flags = []
    for i, c in enumerate(levels, start=1):
        ok = (
            c is not None
            and _well_formed(code.kind, i, c)
            and table.contains(i, c)
            and _links_to_parent(code.kind, i, c, levels[i - 2] if i > 1 else None)
        )
        flags.append(ok)
    return HierarchyReport(tuple(flags))  # type: ignore[arg-type]


def validate_hierarchy(result) -> HierarchyReport:
    """Accepts a StandardizationResult or a bare StandardCode."""
    code = result if isinstance(result, StandardCode) else result.code
    return validate_code(code)
