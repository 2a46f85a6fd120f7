"""Synthetic data, experiment orchestration and report emission."""

from dwellsim.harness.experiment import (
    MATRIX, ExperimentConfig, ExperimentReportRow, ExperimentResult, experiment_config_from_kv,
    load_experiment_config, reduction_rate, run_experiment_matrix,
)
from dwellsim.harness.generator import GeneratorConfig, GroundTruth, generate_dataset
from dwellsim.harness.report import emit_report

__all__ = [
    "MATRIX", "ExperimentConfig", "ExperimentReportRow", "ExperimentResult", "GeneratorConfig", "GroundTruth",
    "emit_report", "experiment_config_from_kv", "generate_dataset", "load_experiment_config",
    "reduction_rate", "run_experiment_matrix",
]
