"""Cached standardization of cargo (HS) and owner (KSIC) text."""

from dwellsim.standardization.backends import (
    HttpBackend, NoisyMockBackend, make_backend, mock_backend, mock_backend_noisy, mock_result,
)
from dwellsim.standardization.bank import STDBank, STDBankEntry, BankStats, bank_stats, standardize
from dwellsim.standardization.codes import (
    CodeKind, HierarchyReport, StandardCode, TextKind, load_table, validate_code, validate_hierarchy,
)
from dwellsim.standardization.metrics import consistency_rate, mean_consistency_rate, non_matched_ratio
from dwellsim.standardization.prompts import build_prompt
from dwellsim.standardization.schema import OwnerSize, StandardizationResult, Validation, parse_result

__all__ = [
    "BankStats", "CodeKind", "HierarchyReport", "HttpBackend", "NoisyMockBackend", "OwnerSize",
    "STDBank", "STDBankEntry", "StandardCode", "StandardizationResult", "TextKind", "Validation",
    "bank_stats", "build_prompt", "consistency_rate", "load_table", "make_backend",
    "mean_consistency_rate", "mock_backend", "mock_backend_noisy", "mock_result", "non_matched_ratio",
    "parse_result", "standardize", "validate_code", "validate_hierarchy",
]
