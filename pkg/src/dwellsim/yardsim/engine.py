"""Event-driven replay of a container stream against the yard grid."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta
from typing import Callable, Sequence

import numpy as np

from dwellsim.edi.features import actual_icdt
from dwellsim.edi.records import (
    PREDICTION_STATES, ContainerRecord, EDIState, SimEvent, atomic_write_text, event_stream,
)
from dwellsim.errors import ConfigError, UnknownContainerError, YardFullError
from dwellsim.yardsim.layout import Position, YardLayout
from dwellsim.yardsim.state import EMPTY, YardState, _pick_baseline, _pick_picdt


class Strategy(str, enum.Enum):
    BASELINE = "baseline"
    PICDT = "picdt"
    AICDT = "aicdt"


@dataclass(frozen=True)
class Move:
    """One crane move: ``src``/``dst`` are column indices, -1 outside the yard."""

    container: str
    src: int
    dst: int
    kind: str  # "in", "restack", "out", "overflow"


@dataclass
class EventEffects:
    event: SimEvent
    rl: int = 0
    placed: Position | None = None
    overflow: bool = False
    ignored: bool = False
    moves: list[Move] = field(default_factory=list)


@dataclass
class SimulationResult:
    rl_total: int = 0
    rl_per_departure: list[int] = field(default_factory=list)
    overflow_count: int = 0
    occupancy_daily: list[tuple[str, float]] = field(default_factory=list)
    inversions: list[tuple[str, int]] = field(default_factory=list)
    rl_daily: list[tuple[str, int]] = field(default_factory=list)
    n_containers: int = 0
    arrival_days: int = 0
    moves: list[Move] | None = None

    def _window(self) -> list[float]:
        """Daily ratios from the first to the last gate-in day (the drain is excluded)."""
        return [r for _, r in self.occupancy_daily[: self.arrival_days]]

    @property
    def occ_avg(self) -> float:
        w = self._window()
        return float(np.mean(w)) if w else 0.0

    @property
    def occ_max(self) -> float:
        w = self._window()
        return float(max(w)) if w else 0.0

    def to_dict(self, include_per_departure: bool = False) -> dict:
        d = {
            "rl_total": self.rl_total,
            "overflow_count": self.overflow_count,
            "occupancy_daily": [{"date": day, "ratio": ratio} for day, ratio in self.occupancy_daily],
            "inversions": [{"time": t, "count": c} for t, c in self.inversions],
            "rl_daily": [{"date": day, "count": c} for day, c in self.rl_daily],
            "arrival_days": self.arrival_days,
        }
        if include_per_departure:
            d["rl_per_departure"] = list(self.rl_per_departure)
        return d

    def to_json(self, include_per_departure: bool = False) -> str:
        return json.dumps(self.to_dict(include_per_departure), indent=2, sort_keys=True)

    def save(self, path, include_per_departure: bool = False) -> None:
        atomic_write_text(path, self.to_json(include_per_departure) + "\n")


class Simulator:
    """Holds one run's state; ``handle_event`` applies one stream event.

    Forecasts are computed for the whole stream up front (they depend only
    on the record and the state), which keeps the replay itself cheap.
    """

    def __init__(self, records: Sequence[ContainerRecord], layout: YardLayout, strategy: Strategy | str,
                 forecaster=None, seed: int = 0, repredict: bool = True, tier_fill: bool = True,
                 trace: bool = False):
        self.strategy = Strategy(strategy)
        if self.strategy is Strategy.PICDT and forecaster is None:
            raise ConfigError("p-ICDT needs a forecaster")
        self.records = list(records)
        self.layout = layout
        self.repredict = repredict
        self.tier_fill = tier_fill
        self.trace = trace
        self.rng = np.random.default_rng(seed)
        self.state = YardState(layout, [r.id for r in self.records])
        self.ref = min((r.t_in for r in self.records), default=datetime(1970, 1, 1))
        self.t_out_h = np.array([self._hours(r.t_out) for r in self.records], dtype=np.float64)
        self.area = [layout.area_columns(r.size, r.ctype) for r in self.records]
        self.forecast = self._forecasts(forecaster)
        n = len(self.records)
        self.temporary = np.zeros(n, dtype=bool)
        self.departed = np.zeros(n, dtype=bool)
        self.arrived = 0
        self.rl_today = 0
        self.result = SimulationResult(n_containers=n, moves=[] if trace else None)

    def _hours(self, t: datetime) -> float:
        return (t - self.ref).total_seconds() / 3600.0

    def _forecasts(self, forecaster) -> dict[EDIState, np.ndarray]:
        states = PREDICTION_STATES if self.repredict else (EDIState.IN,)
        if self.strategy is Strategy.BASELINE:
            return {}
        if self.strategy is Strategy.AICDT:
            return {s: np.array([actual_icdt(r, s) for r in self.records], dtype=np.float64) for s in states}
        return {s: np.asarray(forecaster.predict_batch(self.records, s), dtype=np.float64) for s in states}

    # event handling ----------------------------------------------------

    def handle_event(self, event: SimEvent) -> EventEffects:
        k = self.state.index.get(event.container_id)
        if k is None:
            raise UnknownContainerError(event.container_id)
        now = self._hours(event.time)
        fx = EventEffects(event)
        if event.state is EDIState.IN:
            self.arrived += 1
            self._arrive(k, now, fx)
        elif self.temporary[k]:
            fx.ignored = True
            if event.state is EDIState.OUT:
                self.departed[k] = True
        elif event.state is EDIState.OUT:
            self._depart(k, now, fx)
        elif event.state in self.forecast:
            self.state.set_forecast(k, self.forecast[event.state][k], now)
        if self.trace:
            self.result.moves.extend(fx.moves)
        return fx

    def _arrive(self, k: int, now: float, fx: EventEffects) -> None:
        cid = self.state.ids[k]
        try:
            if self.strategy is Strategy.BASELINE:
                c = _pick_baseline(self.state, self.area[k], self.rng)
            else:
                self.state.set_forecast(k, self.forecast[EDIState.IN][k], now)
                c = _pick_picdt(self.state, self.area[k], now, self.rng, self.tier_fill)
        except YardFullError:
            self.temporary[k] = True
            self.result.overflow_count += 1
            fx.overflow = True
            fx.moves.append(Move(cid, EMPTY, EMPTY, "overflow"))
            return
        fx.placed = self.state.place(k, c)
        fx.moves.append(Move(cid, EMPTY, c, "in"))

    def _depart(self, k: int, now: float, fx: EventEffects) -> None:
        st = self.state
        c, t = int(st.col[k]), int(st.tier[k])
        if c == EMPTY:
            raise UnknownContainerError(st.ids[k])
        rl = int(st.top[c]) - t
        fx.rl = rl
        yard = self.layout.column_coords(c)[0]
        same_yard = self.layout.area_columns(self.records[k].size, self.records[k].ctype, yard)
        same_yard = same_yard[same_yard != c]
        for _ in range(rl):
            dst = self._restack_column(same_yard, now)
            if dst is None:
                break  # the rest wait on the origin column and drop down
            u = st.lift_top(c)
            st.place(u, dst)
            fx.moves.append(Move(st.ids[u], c, dst, "restack"))
        st.extract(k)
        self.departed[k] = True
        fx.moves.append(Move(st.ids[k], c, EMPTY, "out"))
        self.result.rl_total += rl
        self.result.rl_per_departure.append(rl)
        self.rl_today += rl

    def _restack_column(self, cols: np.ndarray, now: float) -> int | None:
        """Existing stacks first (fill rule waived), then an empty column."""
        st = self.state
        tops = st.top[cols]
        stacks = cols[(tops > 0) & (tops < self.layout.tiers)]
        if len(stacks):
            if self.strategy is Strategy.BASELINE:
                return _pick_baseline(st, stacks, self.rng)
            return _pick_picdt(st, stacks, now, self.rng, tier_fill=False)
        empties = cols[tops == 0]
        if len(empties):
            return int(empties[self.rng.integers(len(empties))])
        return None

    # bookkeeping -------------------------------------------------------

    def stacked_expected(self) -> int:
        """Arrived boxes minus those that left the yard or never entered it."""
        return self.arrived - int(np.count_nonzero(self.departed & ~self.temporary)) - \
            int(np.count_nonzero(self.temporary))

    def sample_day(self, day: date) -> None:
        self.result.occupancy_daily.append((day.isoformat(), self.state.occupancy()))
        self.result.inversions.append((day.isoformat(), self.state.count_inversions(self.t_out_h)))
        self.result.rl_daily.append((day.isoformat(), self.rl_today))
        self.rl_today = 0


Observer = Callable[[Simulator, EventEffects], None]


def run_simulation(records: Sequence[ContainerRecord], layout: YardLayout, strategy: Strategy | str,
                   models=None, seed: int = 0, *, repredict: bool = True, tier_fill: bool = True,
                   trace: bool = False, check_invariants: bool = False,
                   observer: Observer | None = None) -> SimulationResult:
    """Replay every record from gate-in to gate-out.

    ``models`` is anything with ``predict_batch(records, state)`` (a
    ``Forecaster``); it is ignored by the baseline and a-ICDT strategies.
    Occupancy and inversion counts are sampled after the last event of
    each calendar day.
    """
    sim = Simulator(records, layout, strategy, models, seed, repredict, tier_fill, trace)
    events = event_stream(records)
    day: date | None = None
    for ev in events:
        d = ev.time.date()
        if day is not None and d != day:
            while day < d:
                sim.sample_day(day)
                day += timedelta(days=1)
        day = d
        fx = sim.handle_event(ev)
        if check_invariants:
            sim.state.check_invariants(sim.stacked_expected())
        if observer is not None:
            observer(sim, fx)
    if day is not None:
        sim.sample_day(day)
    if sim.records:
        first = min(r.t_in for r in sim.records).date()
        last = max(r.t_in for r in sim.records).date()
        sim.result.arrival_days = (last - first).days + 1
    return sim.result


def simulation_from_dict(d: dict) -> SimulationResult:
    return SimulationResult(
        rl_total=int(d["rl_total"]),
        rl_per_departure=list(d.get("rl_per_departure", [])),
        overflow_count=int(d["overflow_count"]),
        occupancy_daily=[(x["date"], float(x["ratio"])) for x in d["occupancy_daily"]],
        inversions=[(x["time"], int(x["count"])) for x in d["inversions"]],
        rl_daily=[(x["date"], int(x["count"])) for x in d.get("rl_daily", [])],
        arrival_days=int(d.get("arrival_days", len(d["occupancy_daily"]))),
    )


__all__ = [
    "EventEffects", "Move", "Observer", "SimulationResult", "Simulator", "Strategy", "run_simulation",
    "simulation_from_dict",
]
