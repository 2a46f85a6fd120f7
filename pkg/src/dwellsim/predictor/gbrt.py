"""Squared-error gradient boosting over exact-greedy regression trees.

Categorical columns are replaced by smoothed target means before splitting:
out-of-fold means on the training rows (so a row never sees its own
target), full-data means at prediction time.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
import pandas as pd

from dwellsim.errors import ConfigError, EmptyTrainingSetError
from dwellsim.predictor import tree

FORMAT_VERSION = 1


@dataclass(frozen=True)
class GBRTConfig:
    n_trees: int = 300
    max_depth: int = 6
    learning_rate: float = 0.1
    min_samples_leaf: int = 20
    target_encoding_prior: float = 10.0
    n_folds: int = 5
    seed: int = 0

    def validate(self) -> None:
        if self.n_trees < 1:
            raise ConfigError("n_trees must be >= 1")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ConfigError("learning_rate must lie in (0, 1]")
        if self.max_depth < 1:
            raise ConfigError("max_depth must be >= 1")
        if self.n_folds < 2:
            raise ConfigError("n_folds must be >= 2")
        if self.min_samples_leaf < 1:
            raise ConfigError("min_samples_leaf must be >= 1")
        if self.target_encoding_prior < 0:
            raise ConfigError("target_encoding_prior must be >= 0")


def _smoothed(sums: np.ndarray, counts: np.ndarray, prior: float, gm: float) -> np.ndarray:
    with np.errstate(invalid="ignore", divide="ignore"):
        enc = (sums + prior * gm) / (counts + prior)
    return np.where(counts + prior > 0, enc, gm)


class GBRTRegressor:
    def __init__(self, config: GBRTConfig | None = None):
        self.config = config or GBRTConfig()
        self.features_: list[str] = []
        self.categorical_: list[str] = []
        self.encodings_: dict[str, dict[str, float]] = {}
        self.global_mean_: float = 0.0
        self.init_: float = 0.0
        self.offsets_ = np.zeros(1, dtype=np.int64)
        self.feat_ = np.zeros(0, dtype=np.int64)
        self.thr_ = np.zeros(0, dtype=np.float64)
        self.left_ = np.zeros(0, dtype=np.int64)
        self.right_ = np.zeros(0, dtype=np.int64)
        self.value_ = np.zeros(0, dtype=np.float64)
        self.train_loss_: list[float] = []

    # encoding ----------------------------------------------------------

    def _encode_train(self, frame: pd.DataFrame, y: np.ndarray) -> np.ndarray:
        cfg = self.config
        n = len(frame)
        rng = np.random.default_rng(cfg.seed)
        fold = rng.permutation(n) % cfg.n_folds
        X = np.empty((n, len(self.features_)), dtype=np.float64)
        self.global_mean_ = float(y.mean())
        for j, col in enumerate(self.features_):
            if col not in self.categorical_:
                X[:, j] = frame[col].to_numpy(dtype=np.float64)
                continue
            codes, uniques = pd.factorize(frame[col].astype(str), sort=True)
            m = len(uniques)
            sums = np.bincount(codes, weights=y, minlength=m)
            counts = np.bincount(codes, minlength=m).astype(np.float64)
            full = _smoothed(sums, counts, cfg.target_encoding_prior, self.global_mean_)
            self.encodings_[col] = {str(u): float(v) for u, v in zip(uniques, full)}
            for k in range(cfg.n_folds):
                held = fold == k
                if not held.any():
                    continue
                fit_rows = ~held
                s_k = np.bincount(codes[fit_rows], weights=y[fit_rows], minlength=m)
                c_k = np.bincount(codes[fit_rows], minlength=m).astype(np.float64)
                gm_k = float(y[fit_rows].mean()) if fit_rows.any() else self.global_mean_
                enc_k = _smoothed(s_k, c_k, cfg.target_encoding_prior, gm_k)
                X[held, j] = enc_k[codes[held]]
        return X

    def _encode(self, frame: pd.DataFrame) -> np.ndarray:
        X = np.empty((len(frame), len(self.features_)), dtype=np.float64)
        for j, col in enumerate(self.features_):
            if col in self.categorical_:
                enc = pd.Series(self.encodings_[col], dtype=np.float64)
                X[:, j] = frame[col].astype(str).map(enc).fillna(self.global_mean_).to_numpy(dtype=np.float64)
            else:
                X[:, j] = frame[col].to_numpy(dtype=np.float64)
        return X

    # fit / predict -----------------------------------------------------

    def fit(self, frame: pd.DataFrame, y, categorical: list[str] | None = None) -> "GBRTRegressor":
        cfg = self.config
        cfg.validate()
        y = np.asarray(y, dtype=np.float64)
        if len(frame) == 0:
            raise EmptyTrainingSetError("no training rows")
        if len(frame) != len(y):
            raise ValueError("frame and target lengths differ")
        if len(frame) < 2 * cfg.n_folds:
            raise EmptyTrainingSetError(f"need at least {2 * cfg.n_folds} rows, got {len(frame)}")
        self.features_ = list(frame.columns)
        if categorical is None:
            categorical = [c for c in frame.columns if not pd.api.types.is_numeric_dtype(frame[c])]
        self.categorical_ = list(categorical)
        self.encodings_ = {}
        X = self._encode_train(frame, y)
        order, xs = tree.presort(X)

        self.init_ = float(y.mean())
        F = np.full(len(y), self.init_)
        offsets = [0]
        parts: list[tuple] = []
        self.train_loss_ = [float(np.mean((y - F) ** 2))]
        for _ in range(cfg.n_trees):
            resid = y - F
            feat, thr, left, right, value, leaf = tree.grow_tree(X, order, xs, resid, cfg.max_depth,
                                                                 cfg.min_samples_leaf)
            F = F + cfg.learning_rate * value[leaf]
            parts.append((feat, thr, left, right, value))
            offsets.append(offsets[-1] + len(feat))
            self.train_loss_.append(float(np.mean((y - F) ** 2)))
        self.offsets_ = np.asarray(offsets, dtype=np.int64)
        self.feat_ = np.concatenate([p[0] for p in parts])
        self.thr_ = np.concatenate([p[1] for p in parts])
        self.left_ = np.concatenate([p[2] for p in parts])
        self.right_ = np.concatenate([p[3] for p in parts])
        self.value_ = np.concatenate([p[4] for p in parts])
        return self

    def predict(self, frame: pd.DataFrame) -> np.ndarray:
        """Raw (unclamped) predictions; columns beyond the training features are ignored."""
        if len(frame) == 0:
            return np.zeros(0, dtype=np.float64)
        X = self._encode(frame)
        return tree.predict_forest(X, self.offsets_, self.feat_, self.thr_, self.left_, self.right_,
                                   self.value_, self.init_, self.config.learning_rate)

    @property
    def n_trees(self) -> int:
        return len(self.offsets_) - 1

    # serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "type": "gbrt",
            "config": asdict(self.config),
            "features": self.features_,
            "categorical": self.categorical_,
            "encodings": self.encodings_,
            "global_mean": self.global_mean_,
            "init": self.init_,
            "offsets": self.offsets_.tolist(),
            "feature": self.feat_.tolist(),
            "threshold": self.thr_.tolist(),
            "left": self.left_.tolist(),
            "right": self.right_.tolist(),
            "value": self.value_.tolist(),
            "train_loss": self.train_loss_,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GBRTRegressor":
        if d.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported model format {d.get('format_version')!r}")
        m = cls(GBRTConfig(**d["config"]))
        m.features_ = list(d["features"])
        m.categorical_ = list(d["categorical"])
        m.encodings_ = {k: dict(v) for k, v in d["encodings"].items()}
        m.global_mean_ = float(d["global_mean"])
        m.init_ = float(d["init"])
        m.offsets_ = np.asarray(d["offsets"], dtype=np.int64)
        m.feat_ = np.asarray(d["feature"], dtype=np.int64)
        m.thr_ = np.asarray(d["threshold"], dtype=np.float64)
        m.left_ = np.asarray(d["left"], dtype=np.int64)
        m.right_ = np.asarray(d["right"], dtype=np.int64)
        m.value_ = np.asarray(d["value"], dtype=np.float64)
        m.train_loss_ = list(d.get("train_loss", []))
        return m
