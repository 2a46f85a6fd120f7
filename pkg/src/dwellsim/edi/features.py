"""Time arithmetic on EDI timestamps and predictor feature construction."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, datetime
from typing import Mapping, Sequence

import numpy as np
import pandas as pd

from dwellsim.errors import ConfigError, InvalidStateError, OrderViolationError
from dwellsim.edi.records import ContainerRecord, EDIState
from dwellsim.standardization.schema import StandardizationResult

UNKNOWN = "UNKNOWN"
BASE_CATEGORICAL = ("c_size", "c_type", "c_bl", "c_country", "c_carrier", "c_day", "c_holiday")
BASE_NUMERIC = ("c_weight",)
EDI_NUMERIC = ("elapsed_time", "due_date_remaining")
DAY_NAMES = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")


def hours_between(a: datetime, b: datetime) -> float:
    """b - a in fractional hours."""
    return (b - a).total_seconds() / 3600.0


def elapsed_time(t_in: datetime, t_e: datetime) -> float:
    if t_e < t_in:
        raise OrderViolationError(f"event time {t_e} precedes unload time {t_in}")
    return hours_between(t_in, t_e)


def due_date_remaining(t_do: datetime, t_e: datetime) -> float:
    """Signed hours until the delivery-order due date; negative once it has passed."""
    return hours_between(t_e, t_do)


def actual_icdt(record: ContainerRecord, state: EDIState) -> float:
    """Remaining dwell from the state's timestamp to departure."""
    state = EDIState(state)
    if state is EDIState.OUT:
        raise InvalidStateError("no dwell remains at OUT")
    return hours_between(record.time_of(state), record.t_out)


@dataclass(frozen=True)
class Calendar:
    """Holiday calendar; weekends count as holidays unless disabled."""

    holidays: frozenset[date] = frozenset()
    weekends: bool = True

    def is_holiday(self, t: datetime) -> bool:
        return (self.weekends and t.weekday() >= 5) or t.date() in self.holidays


@dataclass(frozen=True)
class FeatureOptions:
    """std_level 0 disables the standardized-code block; 1-3 picks the hierarchy level."""

    std_level: int = 3
    use_edi: bool = True

    def __post_init__(self):
        if self.std_level not in (0, 1, 2, 3):
            raise ConfigError(f"std_level must be 0..3, got {self.std_level}")

    @property
    def use_std(self) -> bool:
        return self.std_level > 0

    def categorical(self, state: EDIState) -> tuple[str, ...]:
        cols = BASE_CATEGORICAL
        if self.use_std:
            cols = cols + (f"hs_lv{self.std_level}", f"ksic_lv{self.std_level}", "owner_size")
        return cols

    def numeric(self, state: EDIState) -> tuple[str, ...]:
        cols = BASE_NUMERIC
        if self.use_edi and EDIState(state) in (EDIState.CR, EDIState.CP):
            cols = cols + EDI_NUMERIC
        return cols

    def columns(self, state: EDIState) -> tuple[str, ...]:
        return self.categorical(state) + self.numeric(state)

    def label(self) -> str:
        return f"std{self.std_level}{'_edi' if self.use_edi else ''}"


@dataclass(frozen=True)
class FeatureVector:
    categorical: dict[str, str] = field(default_factory=dict)
    numeric: dict[str, float] = field(default_factory=dict)

    def as_dict(self) -> dict[str, object]:
        return {**self.categorical, **self.numeric}


def _code_at(result: StandardizationResult | None, level: int) -> str:
    if result is None:
        return UNKNOWN
    c = result.code.level(level)
    return c if c is not None else UNKNOWN


def _size_of(result: StandardizationResult | None) -> str:
    if result is None or result.owner_size is None:
        return "Unknown"
    return result.owner_size.value


def build_features(record: ContainerRecord, state: EDIState, std_result_ci: StandardizationResult | None,
                   std_result_oi: StandardizationResult | None, level_config: FeatureOptions,
                   calendar: Calendar | None = None) -> FeatureVector:
    state = EDIState(state)
    if state is EDIState.OUT:
        raise InvalidStateError("features are defined for IN, CR and CP only")
    calendar = calendar or Calendar()
    t = record.time_of(state)
    cat = {
        "c_size": record.size.value,
        "c_type": record.ctype.value,
        "c_bl": str(record.bl),
        "c_country": record.country,
        "c_carrier": record.carrier,
        "c_day": DAY_NAMES[t.weekday()],
        "c_holiday": "1" if calendar.is_holiday(t) else "0",
    }
    if level_config.use_std:
        lv = level_config.std_level
        cat[f"hs_lv{lv}"] = _code_at(std_result_ci, lv)
        cat[f"ksic_lv{lv}"] = _code_at(std_result_oi, lv)
        cat["owner_size"] = _size_of(std_result_oi)
    num = {"c_weight": float(record.weight_kg)}
    if "elapsed_time" in level_config.numeric(state):
        num["elapsed_time"] = elapsed_time(record.t_in, t)
        num["due_date_remaining"] = due_date_remaining(record.t_do, t)
    return FeatureVector(cat, num)


StdMap = Mapping[str, StandardizationResult]


def feature_frame(records: Sequence[ContainerRecord], state: EDIState, ci_map: StdMap | None,
                  oi_map: StdMap | None, options: FeatureOptions,
                  calendar: Calendar | None = None) -> pd.DataFrame:
    """Column-wise equivalent of calling ``build_features`` on every record."""
    state = EDIState(state)
    if state is EDIState.OUT:
        raise InvalidStateError("features are defined for IN, CR and CP only")
    calendar = calendar or Calendar()
    ci_map = ci_map or {}
    oi_map = oi_map or {}
    idx = int(state)
    times = pd.to_datetime([(r.t_in, r.t_cr, r.t_cp)[idx] for r in records])
    wd = np.asarray(times.weekday) if len(records) else np.zeros(0, dtype=int)
    hol = (wd >= 5) if calendar.weekends else np.zeros(len(records), dtype=bool)
    if calendar.holidays:
        dates = [t.date() for t in times]
        hol = hol | np.array([d in calendar.holidays for d in dates], dtype=bool)
    data: dict[str, object] = {
        "c_size": [r.size.value for r in records],
        "c_type": [r.ctype.value for r in records],
        "c_bl": [str(r.bl) for r in records],
        "c_country": [r.country for r in records],
        "c_carrier": [r.carrier for r in records],
        "c_day": [DAY_NAMES[d] for d in wd],
        "c_holiday": np.where(hol, "1", "0").tolist(),
    }
    if options.use_std:
        lv = options.std_level
        data[f"hs_lv{lv}"] = [_code_at(ci_map.get(r.ci_raw), lv) for r in records]
        data[f"ksic_lv{lv}"] = [_code_at(oi_map.get(r.oi_raw), lv) for r in records]
        data["owner_size"] = [_size_of(oi_map.get(r.oi_raw)) for r in records]
    data["c_weight"] = np.array([float(r.weight_kg) for r in records], dtype=np.float64)
    if "elapsed_time" in options.numeric(state):
        t_in = pd.to_datetime([r.t_in for r in records])
        t_do = pd.to_datetime([r.t_do for r in records])
        el = np.asarray((times - t_in).total_seconds(), dtype=np.float64) / 3600.0
        if len(el) and el.min() < 0:
            raise OrderViolationError("event time precedes unload time")
        data["elapsed_time"] = el
        data["due_date_remaining"] = np.asarray((t_do - times).total_seconds(), dtype=np.float64) / 3600.0
    return pd.DataFrame(data, columns=list(options.columns(state)))


def icdt_targets(records: Sequence[ContainerRecord], state: EDIState) -> np.ndarray:
    return np.array([actual_icdt(r, state) for r in records], dtype=np.float64)
