"""Per-EDI-state dwell-time predictors."""

from dwellsim.predictor.gbrt import GBRTConfig, GBRTRegressor
from dwellsim.predictor.models import (
    FixedForecasts, Forecaster, MeanPredictor, OraclePredictor, StateModels, TrainingSet, fit_gbrt, fit_mean, fit_oracle,
    mae, permutation_importance, predict_icdt, split_records, train_state_models, training_set,
)

__all__ = [
    "FixedForecasts", "Forecaster", "GBRTConfig", "GBRTRegressor", "MeanPredictor", "OraclePredictor", "StateModels",
    "TrainingSet", "fit_gbrt", "fit_mean", "fit_oracle", "mae", "permutation_importance", "predict_icdt",
    "split_records", "train_state_models", "training_set",
]
