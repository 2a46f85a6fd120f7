"""Yard geometry: yards x rows x bays x tiers, split into size and reefer areas."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from dwellsim.edi.records import CType, Size
from dwellsim.errors import ConfigError


@dataclass(frozen=True, order=True)
class Position:
    """1-based slot coordinates."""

    y: int
    r: int
    b: int
    t: int


@dataclass(frozen=True)
class YardLayout:
    """``bays_20ft`` leading bays of every yard hold 20ft boxes, the rest 40ft.

    ``reefer_yards`` defaults to yard 1 when there are at least two yards;
    with a single yard reefers share the dry areas.
    """

    n_yards: int = 5
    rows: int = 12
    bays: int = 20
    tiers: int = 7
    bays_20ft: int = 10
    reefer_yards: tuple[int, ...] | None = None
    _cols: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("n_yards", "rows", "bays", "tiers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if not 0 < self.bays_20ft < self.bays:
            raise ConfigError("bays_20ft must leave at least one bay for each size")
        ry = self.reefer_yards
        if ry is None:
            ry = (1,) if self.n_yards >= 2 else ()
        ry = tuple(sorted(set(ry)))
        if any(not 1 <= y <= self.n_yards for y in ry):
            raise ConfigError(f"reefer yard index out of range: {ry}")
        if len(ry) == self.n_yards:
            raise ConfigError("at least one yard must take dry cargo")
        object.__setattr__(self, "reefer_yards", ry)
        object.__setattr__(self, "_cols", {})

    @property
    def n_columns(self) -> int:
        return self.n_yards * self.rows * self.bays

    @property
    def capacity(self) -> int:
        return self.n_columns * self.tiers

    def column_index(self, y: int, r: int, b: int) -> int:
        return ((y - 1) * self.rows + (r - 1)) * self.bays + (b - 1)

    def column_coords(self, c: int) -> tuple[int, int, int]:
        yr, b = divmod(int(c), self.bays)
        y, r = divmod(yr, self.rows)
        return y + 1, r + 1, b + 1

    def yards_for(self, reefer: bool) -> tuple[int, ...]:
        if reefer and self.reefer_yards:
            return self.reefer_yards
        return tuple(y for y in range(1, self.n_yards + 1) if y not in self.reefer_yards)

    def bays_for(self, size: Size) -> range:
        if Size(size) is Size.FT20:
            return range(1, self.bays_20ft + 1)
        return range(self.bays_20ft + 1, self.bays + 1)

    def area_key(self, size: Size, ctype: CType) -> tuple[bool, str]:
        reefer = CType(ctype) is CType.REEFER and bool(self.reefer_yards)
        return reefer, Size(size).value

    def area_columns(self, size: Size, ctype: CType, yard: int | None = None) -> np.ndarray:
        """Sorted column indices of a container's area, optionally within one yard.

        Ascending column index is lexicographic (y, r, b) order.
        """
        reefer, sz = self.area_key(size, ctype)
        key = (reefer, sz, yard)
        hit = self._cols.get(key)
        if hit is None:
            yards = self.yards_for(reefer) if yard is None else (yard,)
            bays = self.bays_for(Size(sz))
            hit = np.array(sorted(self.column_index(y, r, b) for y in yards
                                  for r in range(1, self.rows + 1) for b in bays), dtype=np.int64)
            hit.setflags(write=False)
            self._cols[key] = hit
        return hit

    def partition_check(self) -> None:
        """Every column belongs to exactly one area."""
        seen = np.zeros(self.n_columns, dtype=np.int64)
        for reefer in {False, bool(self.reefer_yards)}:
            for size in Size:
                ctype = CType.REEFER if reefer else CType.DRY
                seen[self.area_columns(size, ctype)] += 1
        if not np.all(seen == 1):
            raise ConfigError("areas do not partition the yard")
