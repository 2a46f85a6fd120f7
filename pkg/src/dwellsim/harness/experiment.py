"""Component-matrix experiments: one container stream, several yard sizes and strategies."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from dwellsim.edi.features import FeatureOptions
from dwellsim.edi.records import ContainerRecord
from dwellsim.errors import BackendError, ConfigError, DivisionDomainError, SchemaError
from dwellsim.harness.config import build_dataclass, read_kv, render_kv, split_prefixed
from dwellsim.harness.generator import GeneratorConfig, generate_dataset
from dwellsim.predictor import (
    Forecaster, GBRTConfig, OraclePredictor, split_records, train_state_models,
)
from dwellsim.standardization import STDBank, StandardizationResult, TextKind, make_backend, standardize
from dwellsim.standardization.bank import derive_metrics
from dwellsim.yardsim import Strategy, YardLayout, run_simulation


def reduction_rate(rl_a: float, rl_b: float) -> float:
    """Percent fewer relocations in ``rl_b`` than in the reference ``rl_a``."""
    if not rl_a > 0:
        raise DivisionDomainError(f"reference relocation count must be positive, got {rl_a}")
    return (rl_a - rl_b) / rl_a * 100.0


@dataclass(frozen=True)
class ConfigSpec:
    key: str
    label: str
    strategy: Strategy
    std: bool = False
    edi: bool = False


MATRIX: dict[str, ConfigSpec] = {
    "a": ConfigSpec("a", "baseline", Strategy.BASELINE),
    "b": ConfigSpec("b", "p-ICDT", Strategy.PICDT),
    "c": ConfigSpec("c", "p-ICDT + EDI", Strategy.PICDT, edi=True),
    "d": ConfigSpec("d", "p-ICDT + STD", Strategy.PICDT, std=True),
    "e": ConfigSpec("e", "p-ICDT + STD + EDI", Strategy.PICDT, std=True, edi=True),
    "f": ConfigSpec("f", "a-ICDT", Strategy.AICDT, edi=True),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines an experiment's output.

    Simulation seeds are ``seed, seed + 1, ...``; every configuration of a
    scenario sees the same seeds. ``predictor = oracle`` swaps trained
    models for the true remaining dwell in the p-ICDT configurations.
    """

    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    gbrt: GBRTConfig = field(default_factory=GBRTConfig)
    yards: tuple[int, ...] = (5,)
    configs: tuple[str, ...] = ("a", "b", "c", "d", "e", "f")
    repeats: int = 10
    seed: int = 0
    train_fraction: float = 0.8
    split: str = "chronological"
    split_seed: int = 0
    std_level: int = 3
    model: str = "gbrt"
    predictor: str = "trained"
    max_dwell_filter: float = 240.0
    backend: str = "mock"
    flip_prob: float = 0.0
    backend_seed: int = 0
    unit_cost: float = 0.002
    tier_fill: bool = True
    rows: int = 12
    bays: int = 20
    tiers: int = 7

    def validate(self) -> None:
        self.generator.validate()
        self.gbrt.validate()
        unknown = [c for c in self.configs if c not in MATRIX]
        if unknown or not self.configs:
            raise ConfigError(f"configs must be drawn from {sorted(MATRIX)}, got {self.configs}")
        if len(set(self.configs)) != len(self.configs):
            raise ConfigError("duplicate configuration keys")
        if not self.yards or any(y < 1 for y in self.yards):
            raise ConfigError("yards must list positive yard counts")
        if self.repeats < 1:
            raise ConfigError("repeats must be >= 1")
        if not 0 < self.train_fraction < 1:
            raise ConfigError("train_fraction must lie in (0, 1)")
        if self.split not in ("chronological", "random"):
            raise ConfigError("split must be chronological or random")
        if self.std_level not in (1, 2, 3):
            raise ConfigError("std_level must be 1, 2 or 3")
        if self.model not in ("gbrt", "mean"):
            raise ConfigError("model must be gbrt or mean")
        if self.predictor not in ("trained", "oracle"):
            raise ConfigError("predictor must be trained or oracle")
        if self.unit_cost < 0:
            raise ConfigError("unit_cost must be >= 0")

    @property
    def seeds(self) -> list[int]:
        return list(range(self.seed, self.seed + self.repeats))

    def to_kv(self) -> str:
        lines = render_kv(self)
        lines += render_kv(self.generator, "gen.")
        lines += render_kv(self.gbrt, "gbrt.")
        return "\n".join(lines) + "\n"


def experiment_config_from_kv(values: dict[str, str]) -> ExperimentConfig:
    """Top-level keys plus ``gen.*`` generator and ``gbrt.*`` model keys."""
    groups = split_prefixed(values, ("gen", "gbrt"))
    top = dict(groups[""])
    if "configs" in top:
        top["configs"] = top["configs"].replace(" ", "")
    bad = sorted({"generator", "gbrt"} & set(top))
    if bad:
        raise ConfigError(f"use prefixed keys instead of {', '.join(bad)}")
    cfg = replace(build_dataclass(ExperimentConfig, top),
                  generator=build_dataclass(GeneratorConfig, groups["gen"], context="gen."),
                  gbrt=build_dataclass(GBRTConfig, groups["gbrt"], context="gbrt."))
    cfg.validate()
    return cfg


def load_experiment_config(path) -> ExperimentConfig:
    return experiment_config_from_kv(read_kv(path))


# results -----------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentReportRow:
    scenario: str
    config: str
    label: str
    n_yards: int
    rl_runs: tuple[int, ...]
    occ_avg: float
    occ_max: float
    overflow: float
    reduction_vs_baseline_pct: float | None

    @property
    def rl_mean(self) -> float:
        return float(np.mean(self.rl_runs))

    @property
    def rl_std(self) -> float | None:
        """Sample standard deviation; undefined for a single run."""
        if len(self.rl_runs) < 2:
            return None
        return float(np.std(self.rl_runs, ddof=1))


@dataclass(frozen=True)
class DailyPoint:
    scenario: str
    config: str
    seed: int
    date: str
    relocations: int
    occupancy: float


@dataclass(frozen=True)
class BankPoint:
    date: str
    containers_processed: int
    lookups: int
    backend_calls: int
    request_ratio: float
    cost_per_1000: float


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list[ExperimentReportRow]
    daily: list[DailyPoint]
    bank_cost: list[BankPoint]
    metadata: dict


# pipeline ----------------------------------------------------------------

def standardize_stream(records: Sequence[ContainerRecord], backend: Callable[[str], str], bank: STDBank,
                       unit_cost: float) -> tuple[dict, dict, list[BankPoint]]:
    """Run every record's texts through the bank in gate-in order.

    Texts the backend cannot classify are left out of the maps and become
    UNKNOWN features. Returns the maps and a cumulative end-of-day cost series.
    """
    ci_map: dict[str, StandardizationResult] = {}
    oi_map: dict[str, StandardizationResult] = {}
    series: list[BankPoint] = []
    ordered = sorted(records, key=lambda r: (r.t_in, r.id))

    def snapshot(day) -> None:
        c = bank.counters()
        n = bank.containers_processed
        ratio, cost = derive_metrics(c["lookups"], c["backend_calls"], unit_cost, n)
        series.append(BankPoint(day.isoformat(), n, c["lookups"], c["backend_calls"], ratio, cost))

    day = None
    for r in ordered:
        d = r.t_in.date()
        if day is not None and d != day:
            snapshot(day)
        day = d
        for raw, kind, target in ((r.ci_raw, TextKind.CI, ci_map), (r.oi_raw, TextKind.OI, oi_map)):
            if raw in target:
                standardize(raw, kind, backend, bank)  # counted as a bank hit
                continue
            try:
                target[raw] = standardize(raw, kind, backend, bank)
            except (BackendError, SchemaError):
                pass
        bank.note_containers(1)
    if day is not None:
        snapshot(day)
    return ci_map, oi_map, series


def _forecasters(cfg: ExperimentConfig, train, test, ci_map, oi_map, progress) -> dict:
    out = {}
    for key in cfg.configs:
        spec = MATRIX[key]
        if spec.strategy is not Strategy.PICDT:
            continue
        if cfg.predictor == "oracle":
            fc = Forecaster(OraclePredictor(test), ci_map, oi_map)
        else:
            options = FeatureOptions(cfg.std_level if spec.std else 0, spec.edi)
            progress(f"training ({key}) {options.label()}")
            models = train_state_models(train, cfg.gbrt, options, ci_map, oi_map, model=cfg.model,
                                        max_dwell=cfg.max_dwell_filter)
            fc = Forecaster(models, ci_map, oi_map)
        out[key] = fc.precompute(test)
    return out


def run_experiment_matrix(cfg: ExperimentConfig, progress: Callable[[str], None] | None = None,
                          records: Sequence[ContainerRecord] | None = None) -> ExperimentResult:
    """Train once per configuration, then simulate every scenario x configuration x seed.

    All scenarios replay the same held-out stream; only the yard count changes.
    """
    cfg.validate()
    progress = progress or (lambda msg: None)
    if cfg.repeats == 1:
        warnings.warn("repeats = 1: relocation standard deviations are omitted", stacklevel=2)
    if records is None:
        progress(f"generating {cfg.generator.n_containers} containers")
        records, _ = generate_dataset(cfg.generator)
    records = list(records)
    train, test = split_records(records, cfg.train_fraction, cfg.split, cfg.split_seed)
    if not test:
        raise ConfigError("the held-out stream is empty")

    progress("standardizing")
    bank = STDBank()
    backend = make_backend(cfg.backend, cfg.flip_prob, cfg.backend_seed)
    ci_map, oi_map, bank_series = standardize_stream(records, backend, bank, cfg.unit_cost)
    forecasts = _forecasters(cfg, train, test, ci_map, oi_map, progress)

    rows: list[ExperimentReportRow] = []
    daily: list[DailyPoint] = []
    for n_yards in cfg.yards:
        layout = YardLayout(n_yards, rows=cfg.rows, bays=cfg.bays, tiers=cfg.tiers)
        scenario = f"Y{n_yards}"
        runs: dict[str, list] = {}
        for key in cfg.configs:
            spec = MATRIX[key]
            progress(f"{scenario} ({key}) {spec.label}")
            results = []
            for seed in cfg.seeds:
                res = run_simulation(test, layout, spec.strategy, forecasts.get(key), seed,
                                     repredict=spec.edi, tier_fill=cfg.tier_fill)
                results.append(res)
                daily.extend(DailyPoint(scenario, key, seed, d, n, occ)
                             for (d, n), (_, occ) in zip(res.rl_daily, res.occupancy_daily))
            runs[key] = results
        base = float(np.mean([r.rl_total for r in runs["a"]])) if "a" in runs else None
        for key in cfg.configs:
            results = runs[key]
            rl = tuple(r.rl_total for r in results)
            red = None  # undefined without a baseline or when the baseline never relocates
            if base is not None and key != "a" and base > 0:
                red = reduction_rate(base, float(np.mean(rl)))
            rows.append(ExperimentReportRow(
                scenario, key, MATRIX[key].label, n_yards, rl,
                float(np.mean([r.occ_avg for r in results])),
                float(np.max([r.occ_max for r in results])),
                float(np.mean([r.overflow_count for r in results])),
                red,
            ))

    stats = bank.counters()
    metadata = {
        "containers_total": len(records),
        "containers_train": len(train),
        "containers_simulated": len(test),
        "scenario_stream": "every scenario replays the same held-out stream; only the yard count varies",
        "seeds": cfg.seeds,
        "bank_lookups": stats["lookups"],
        "bank_backend_calls": stats["backend_calls"],
        "config": cfg.to_kv(),
    }
    return ExperimentResult(cfg, rows, daily, bank_series, metadata)
