"""Per-EDI-state dwell predictors: mean baseline, boosted trees and the oracle."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from typing import Mapping, Protocol, Sequence

import numpy as np
import pandas as pd

from dwellsim.edi.features import (
    Calendar, FeatureOptions, FeatureVector, actual_icdt, feature_frame, icdt_targets,
)
from dwellsim.edi.records import PREDICTION_STATES, ContainerRecord, EDIState, atomic_write_text
from dwellsim.errors import (
    EmptyInputError, EmptyTrainingSetError, LengthMismatchError, UnknownContainerError,
)
from dwellsim.predictor.gbrt import FORMAT_VERSION, GBRTConfig, GBRTRegressor
from dwellsim.standardization.schema import StandardizationResult

MAX_DWELL_FILTER_H = 240.0


class Predictor(Protocol):
    def predict(self, frame: pd.DataFrame) -> np.ndarray: ...


@dataclass
class MeanPredictor:
    mean: float

    def predict(self, frame: pd.DataFrame) -> np.ndarray:
        return np.full(len(frame), self.mean, dtype=np.float64)

    def to_dict(self) -> dict:
        return {"format_version": FORMAT_VERSION, "type": "mean", "mean": self.mean}


@dataclass
class TrainingSet:
    """Feature rows and positive targets for one state, long dwells already removed."""

    state: EDIState
    frame: pd.DataFrame
    target: np.ndarray

    def __len__(self) -> int:
        return len(self.target)


def fit_mean(training_set: TrainingSet | Sequence[float]) -> MeanPredictor:
    y = training_set.target if isinstance(training_set, TrainingSet) else np.asarray(training_set, float)
    if len(y) == 0:
        raise EmptyTrainingSetError("cannot fit a mean to zero rows")
    return MeanPredictor(float(np.mean(y)))


def fit_gbrt(training_set: TrainingSet, config: GBRTConfig | None = None) -> GBRTRegressor:
    if len(training_set) == 0:
        raise EmptyTrainingSetError("no training rows")
    return GBRTRegressor(config).fit(training_set.frame, training_set.target)


class OraclePredictor:
    """Returns the true remaining dwell; the perfect-information bound."""

    def __init__(self, records: Sequence[ContainerRecord]):
        self._by_id = {r.id: r for r in records}

    def predict_one(self, container_id: str, state: EDIState) -> float:
        r = self._by_id.get(container_id)
        if r is None:
            raise UnknownContainerError(container_id)
        return actual_icdt(r, state)

    def predict_batch(self, records: Sequence[ContainerRecord], state: EDIState) -> np.ndarray:
        return np.array([self.predict_one(r.id, state) for r in records], dtype=np.float64)


def fit_oracle(records: Sequence[ContainerRecord]) -> OraclePredictor:
    return OraclePredictor(records)


def mae(predictions: Sequence[float], actuals: Sequence[float]) -> float:
    p = np.asarray(predictions, dtype=np.float64)
    a = np.asarray(actuals, dtype=np.float64)
    if p.shape != a.shape:
        raise LengthMismatchError(f"{p.shape} vs {a.shape}")
    if p.size == 0:
        raise EmptyInputError("no values")
    return float(np.mean(np.abs(p - a)))


def predict_icdt(model, feature_vector: FeatureVector | pd.DataFrame) -> float:
    """Clamped prediction for one feature vector."""
    frame = feature_vector if isinstance(feature_vector, pd.DataFrame) else pd.DataFrame([feature_vector.as_dict()])
    return max(float(model.predict(frame)[0]), 0.0)


def split_records(records: Sequence[ContainerRecord], train_fraction: float = 0.8,
                  mode: str = "chronological", seed: int = 0) -> tuple[list[ContainerRecord], list[ContainerRecord]]:
    """Chronological (by unload time) or seeded random train/test split."""
    recs = list(records)
    n_train = int(round(len(recs) * train_fraction))
    if mode == "chronological":
        recs.sort(key=lambda r: (r.t_in, r.id))
    elif mode == "random":
        perm = np.random.default_rng(seed).permutation(len(recs))
        recs = [recs[i] for i in perm]
    else:
        raise ValueError(f"unknown split mode {mode!r}")
    return recs[:n_train], recs[n_train:]


StdMap = Mapping[str, StandardizationResult]


def training_set(records: Sequence[ContainerRecord], state: EDIState, ci_map: StdMap | None,
                 oi_map: StdMap | None, options: FeatureOptions, calendar: Calendar | None = None,
                 max_dwell: float | None = MAX_DWELL_FILTER_H) -> TrainingSet:
    y = icdt_targets(records, state)
    keep = np.ones(len(y), dtype=bool) if max_dwell is None else y <= max_dwell
    kept = [r for r, k in zip(records, keep) if k]
    frame = feature_frame(kept, state, ci_map, oi_map, options, calendar)
    return TrainingSet(EDIState(state), frame, y[keep])


@dataclass
class StateModels:
    """One predictor per prediction state, plus what is needed to featurize new records."""

    options: FeatureOptions
    phi_in: object
    phi_cr: object
    phi_cp: object
    calendar: Calendar = field(default_factory=Calendar)

    def model(self, state: EDIState):
        return {EDIState.IN: self.phi_in, EDIState.CR: self.phi_cr, EDIState.CP: self.phi_cp}[EDIState(state)]

    def frame(self, records, state, ci_map=None, oi_map=None) -> pd.DataFrame:
        return feature_frame(records, state, ci_map, oi_map, self.options, self.calendar)

    def predict_raw(self, records, state, ci_map=None, oi_map=None) -> np.ndarray:
        return self.model(state).predict(self.frame(records, state, ci_map, oi_map))

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "options": asdict(self.options),
            "calendar": {"holidays": sorted(d.isoformat() for d in self.calendar.holidays),
                         "weekends": self.calendar.weekends},
            "models": {s.name: self.model(s).to_dict() for s in PREDICTION_STATES},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StateModels":
        from datetime import date

        if d.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported model file version {d.get('format_version')!r}")
        cal = Calendar(frozenset(date.fromisoformat(x) for x in d["calendar"]["holidays"]),
                       d["calendar"]["weekends"])
        ms = {k: _model_from_dict(v) for k, v in d["models"].items()}
        return cls(FeatureOptions(**d["options"]), ms["IN"], ms["CR"], ms["CP"], cal)

    def save(self, path: str | os.PathLike) -> None:
        atomic_write_text(path, json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path: str | os.PathLike) -> "StateModels":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _model_from_dict(d: dict):
    if d["type"] == "mean":
        return MeanPredictor(float(d["mean"]))
    if d["type"] == "gbrt":
        return GBRTRegressor.from_dict(d)
    raise ValueError(f"unknown model type {d['type']!r}")


def train_state_models(dataset: Sequence[ContainerRecord], config: GBRTConfig | None,
                       feature_options: FeatureOptions, ci_map: StdMap | None = None,
                       oi_map: StdMap | None = None, model: str = "gbrt",
                       calendar: Calendar | None = None,
                       max_dwell: float | None = MAX_DWELL_FILTER_H) -> StateModels:
    """Fit one model per state on that state's rows only."""
    calendar = calendar or Calendar()
    fitted = []
    for s in PREDICTION_STATES:
        ts = training_set(dataset, s, ci_map, oi_map, feature_options, calendar, max_dwell)
        if model == "mean":
            fitted.append(fit_mean(ts))
        elif model == "gbrt":
            fitted.append(fit_gbrt(ts, config))
        else:
            raise ValueError(f"unknown model kind {model!r}")
    return StateModels(feature_options, *fitted, calendar=calendar)


class Forecaster:
    """Batch dwell forecasts for the simulator (clamped at zero)."""

    def __init__(self, models: StateModels | OraclePredictor, ci_map: StdMap | None = None,
                 oi_map: StdMap | None = None):
        self.models = models
        self.ci_map = ci_map or {}
        self.oi_map = oi_map or {}

    @property
    def is_oracle(self) -> bool:
        return isinstance(self.models, OraclePredictor)

    def predict_batch(self, records: Sequence[ContainerRecord], state: EDIState) -> np.ndarray:
        if not records:
            return np.zeros(0, dtype=np.float64)
        if isinstance(self.models, OraclePredictor):
            raw = self.models.predict_batch(records, state)
        else:
            raw = self.models.predict_raw(records, state, self.ci_map, self.oi_map)
        return np.maximum(raw, 0.0)

    def precompute(self, records: Sequence[ContainerRecord],
                   states: Sequence[EDIState] = PREDICTION_STATES) -> "FixedForecasts":
        return FixedForecasts([r.id for r in records],
                              {EDIState(s): self.predict_batch(records, s) for s in states})


class FixedForecasts:
    """Forecasts computed once for a fixed record list, replayed for many runs."""

    def __init__(self, ids: Sequence[str], by_state: Mapping[EDIState, np.ndarray]):
        self.ids = list(ids)
        self.by_state = dict(by_state)

    def predict_batch(self, records: Sequence[ContainerRecord], state: EDIState) -> np.ndarray:
        if [r.id for r in records] != self.ids:
            raise UnknownContainerError("records differ from the precomputed list")
        try:
            return self.by_state[EDIState(state)].copy()
        except KeyError:
            raise ValueError(f"no forecasts stored for state {EDIState(state).name}") from None


def permutation_importance(model, frame: pd.DataFrame, target: Sequence[float], seed: int = 0,
                           k: int = 5) -> dict[str, float]:
    """Mean MAE increase over ``k`` seeded shuffles of each column."""
    y = np.asarray(target, dtype=np.float64)
    if len(frame) == 0:
        raise EmptyInputError("no validation rows")
    base = mae(np.maximum(model.predict(frame), 0.0), y)
    rng = np.random.default_rng(seed)
    out: dict[str, float] = {}
    for col in frame.columns:
        incs = []
        for _ in range(k):
            shuffled = frame.copy()
            shuffled[col] = frame[col].to_numpy()[rng.permutation(len(frame))]
            incs.append(mae(np.maximum(model.predict(shuffled), 0.0), y) - base)
        out[col] = float(np.mean(incs))
    return out
