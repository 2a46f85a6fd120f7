"""Consistency rate across repeated standardizations and the non-matched ratio."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

from dwellsim.errors import DivisionDomainError, DomainError
from dwellsim.standardization.codes import validate_hierarchy
from dwellsim.standardization.schema import StandardizationResult, Validation


def consistency_rate(repeats: Sequence[Hashable]) -> float:
    """Percent agreement of repeated codes: 100 when all trials agree, 0 when all differ."""
    n_total = len(repeats)
    if n_total < 2:
        raise DomainError("consistency rate needs at least two trials")
    n_unique = len(set(repeats))
    return (1.0 - (n_unique - 1) / (n_total - 1)) * 100.0


def mean_consistency_rate(entries: Iterable[Sequence[Hashable]]) -> float:
    """Average of per-entry rates (each entry is its own list of trials)."""
    rates = [consistency_rate(r) for r in entries]
    if not rates:
        raise DomainError("no entries to aggregate")
    return sum(rates) / len(rates)


@dataclass(frozen=True)
class NonMatchedRatio:
    count_a: int
    count_b: int
    ratio: float

    @property
    def percent(self) -> float:
        return self.ratio * 100.0


def ratio_from_counts(count_a: int, count_b: int) -> NonMatchedRatio:
    if count_a <= 0:
        raise DivisionDomainError("no results in the validation stratum")
    return NonMatchedRatio(count_a, count_b, count_b / count_a)


def non_matched_ratio(results: Iterable[StandardizationResult], validation_filter: Validation | str,
                      level: int) -> NonMatchedRatio:
    """Share of results of one validation type whose code fails the hierarchy check at ``level``.

    Results are deduplicated on (kind, raw_key), keeping the first.
    """
    vf = Validation(validation_filter)
    seen: set = set()
    a = b = 0
    for r in results:
        key = (r.kind, r.raw_key)
        if key in seen:
            continue
        seen.add(key)
        if r.validation is not vf:
            continue
        a += 1
        if not validate_hierarchy(r).at(level):
            b += 1
    return ratio_from_counts(a, b)
