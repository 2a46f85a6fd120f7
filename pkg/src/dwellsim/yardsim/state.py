"""Slot grid, top pointers and the p-ICDT registry, with the stacking rules."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from dwellsim.errors import InvariantBreachError, UnknownContainerError, YardFullError
from dwellsim.yardsim.layout import Position, YardLayout

EMPTY = -1


def current_p_icdt(stored: float, stamp: float, now: float) -> float:
    """Stored forecast decayed by the hours since it was made, floored at zero."""
    return max(stored - (now - stamp), 0.0)


class YardState:
    """Containers are referred to by dense integer index; ``ids`` maps them to names.

    ``grid[c, k]`` holds the container on tier ``k + 1`` of column ``c``.
    """

    def __init__(self, layout: YardLayout, ids: Sequence[str]):
        self.layout = layout
        self.ids = list(ids)
        self.index = {cid: i for i, cid in enumerate(self.ids)}
        n = len(self.ids)
        self.grid = np.full((layout.n_columns, layout.tiers), EMPTY, dtype=np.int64)
        self.top = np.zeros(layout.n_columns, dtype=np.int64)
        self.col = np.full(n, EMPTY, dtype=np.int64)
        self.tier = np.zeros(n, dtype=np.int64)
        self.value = np.full(n, np.nan)
        self.stamp = np.full(n, np.nan)
        self.stacked = 0

    # registry ----------------------------------------------------------

    def _idx(self, container: str | int) -> int:
        if isinstance(container, (int, np.integer)):
            if not 0 <= container < len(self.ids):
                raise UnknownContainerError(container)
            return int(container)
        try:
            return self.index[container]
        except KeyError:
            raise UnknownContainerError(container) from None

    def in_yard(self, container: str | int) -> bool:
        return self.col[self._idx(container)] != EMPTY

    def position(self, container: str | int) -> Position:
        k = self._idx(container)
        if self.col[k] == EMPTY:
            raise UnknownContainerError(self.ids[k])
        return Position(*self.layout.column_coords(self.col[k]), int(self.tier[k]))

    def set_forecast(self, container: str | int, hours: float, now: float) -> None:
        k = self._idx(container)
        self.value[k] = hours
        self.stamp[k] = now

    def current_p_icdt(self, container: str | int, now: float) -> float:
        k = self._idx(container)
        if self.col[k] == EMPTY:
            raise UnknownContainerError(self.ids[k])
        return current_p_icdt(float(self.value[k]), float(self.stamp[k]), now)

    def top_p_icdt(self, cols: np.ndarray, now: float) -> np.ndarray:
        """Decayed forecast of the topmost container of each (non-empty) column."""
        tops = self.grid[cols, self.top[cols] - 1]
        return np.maximum(self.value[tops] - (now - self.stamp[tops]), 0.0)

    # grid mutation -----------------------------------------------------

    def place(self, container: str | int, c: int) -> Position:
        k = self._idx(container)
        t = int(self.top[c])
        if t >= self.layout.tiers:
            raise InvariantBreachError(f"column {c} is full")
        self.grid[c, t] = k
        self.top[c] = t + 1
        self.col[k] = c
        self.tier[k] = t + 1
        self.stacked += 1
        return Position(*self.layout.column_coords(c), t + 1)

    def lift_top(self, c: int) -> int:
        """Remove and return the topmost container of column ``c``."""
        t = int(self.top[c])
        if t == 0:
            raise InvariantBreachError(f"column {c} is empty")
        k = int(self.grid[c, t - 1])
        self.grid[c, t - 1] = EMPTY
        self.top[c] = t - 1
        self.col[k] = EMPTY
        self.tier[k] = 0
        self.stacked -= 1
        return k

    def extract(self, container: str | int) -> None:
        """Pull a container out of its column and let the boxes above drop down."""
        k = self._idx(container)
        c, t = int(self.col[k]), int(self.tier[k])
        if c == EMPTY:
            raise UnknownContainerError(self.ids[k])
        h = int(self.top[c])
        above = self.grid[c, t:h].copy()
        self.grid[c, t - 1:h - 1] = above
        self.grid[c, h - 1] = EMPTY
        self.tier[above] -= 1
        self.top[c] = h - 1
        self.col[k] = EMPTY
        self.tier[k] = 0
        self.stacked -= 1

    # queries -----------------------------------------------------------

    def occupancy(self) -> float:
        return self.stacked / self.layout.capacity

    def count_inversions(self, departures: np.ndarray) -> int:
        """Pairs (lower, upper) in one column where the lower box leaves first."""
        g = self.grid
        occupied = g != EMPTY
        if not occupied.any():
            return 0
        t_out = np.full(g.shape, np.nan)
        t_out[occupied] = departures[g[occupied]]
        total = 0
        T = self.layout.tiers
        for lo in range(T - 1):
            lower = t_out[:, lo]
            for hi in range(lo + 1, T):
                total += int(np.count_nonzero(lower < t_out[:, hi]))
        return total

    def check_invariants(self, expected_stacked: int | None = None) -> None:
        g = self.grid
        occupied = g != EMPTY
        tiers = np.arange(self.layout.tiers)
        if not np.array_equal(occupied, tiers[None, :] < self.top[:, None]):
            raise InvariantBreachError("floating container or stale top pointer")
        ks = g[occupied]
        if len(np.unique(ks)) != len(ks):
            raise InvariantBreachError("container stacked twice")
        cs, ts = np.nonzero(occupied)
        if not (np.array_equal(self.col[ks], cs) and np.array_equal(self.tier[ks], ts + 1)):
            raise InvariantBreachError("registry and grid disagree")
        if np.count_nonzero(self.col != EMPTY) != len(ks) or self.stacked != len(ks):
            raise InvariantBreachError("registry holds containers absent from the grid")
        if expected_stacked is not None and expected_stacked != len(ks):
            raise InvariantBreachError(f"conservation broken: {len(ks)} stacked, expected {expected_stacked}")


# stacking rules --------------------------------------------------------

def find_best_position(state: YardState, cols: np.ndarray, now: float, rng: np.random.Generator,
                       tier_fill: bool = True) -> Position:
    """p-ICDT placement over the candidate columns ``cols`` (sorted, one area).

    With tier-fill on only columns at the area's lowest fill level qualify.
    An empty target tier is chosen at random; otherwise the column whose top
    box is forecast to stay longest wins, lowest (y, r, b) on ties.
    """
    c = _pick_picdt(state, cols, now, rng, tier_fill)
    return Position(*state.layout.column_coords(c), int(state.top[c]) + 1)


def baseline_position(state: YardState, cols: np.ndarray, rng: np.random.Generator) -> Position:
    """Lowest available tier, uniform among the columns offering it."""
    c = _pick_baseline(state, cols, rng)
    return Position(*state.layout.column_coords(c), int(state.top[c]) + 1)


def _admissible(state: YardState, cols: np.ndarray, tier_fill: bool) -> np.ndarray:
    tops = state.top[cols]
    free = tops < state.layout.tiers
    if not free.any():
        raise YardFullError("no free slot in area")
    if tier_fill:
        return cols[tops == tops[free].min()]
    return cols[free]


def _pick_picdt(state: YardState, cols: np.ndarray, now: float, rng: np.random.Generator,
                tier_fill: bool) -> int:
    cand = _admissible(state, cols, tier_fill)
    empty = state.top[cand] == 0
    if tier_fill:
        if empty[0]:
            return int(cand[rng.integers(len(cand))])
        return int(cand[np.argmax(state.top_p_icdt(cand, now))])
    # without the fill rule, stacking on an existing box is preferred
    stacked = cand[~empty]
    if len(stacked):
        return int(stacked[np.argmax(state.top_p_icdt(stacked, now))])
    return int(cand[rng.integers(len(cand))])


def _pick_baseline(state: YardState, cols: np.ndarray, rng: np.random.Generator) -> int:
    cand = _admissible(state, cols, tier_fill=True)
    return int(cand[rng.integers(len(cand))])
