"""Report files for experiment results: CSV, JSON, a plain-text table and plot series.

Every writer is deterministic (no timestamps, fixed ordering, ``repr``
floats) so identical experiments produce byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import os
from pathlib import Path
from typing import Iterable, Sequence

from dwellsim.edi.records import atomic_write_text
from dwellsim.errors import EmptyInputError
from dwellsim.harness.experiment import (
    MATRIX, BankPoint, DailyPoint, ExperimentReportRow, ExperimentResult,
)

REPORT_COLUMNS = ("scenario", "config", "rl_mean", "rl_std", "occ_avg", "occ_max", "overflow",
                  "reduction_vs_baseline_pct")
DAILY_COLUMNS = ("scenario", "config", "seed", "date", "relocations", "occupancy")
BANK_COLUMNS = ("date", "containers_processed", "lookups", "backend_calls", "request_ratio", "cost_per_1000")

FILES = {
    "csv": "report.csv",
    "json": "report.json",
    "table": "table.txt",
    "daily": "daily_series.csv",
    "bank": "bank_cost.csv",
}


def _num(x) -> str:
    if x is None:
        return ""
    return repr(float(x)) if isinstance(x, float) else str(x)


def _csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_num(v) for v in r])
    return buf.getvalue()


def row_cells(row: ExperimentReportRow) -> tuple:
    return (row.scenario, row.config, row.rl_mean, row.rl_std, row.occ_avg, row.occ_max, row.overflow,
            row.reduction_vs_baseline_pct)


def report_csv(rows: Sequence[ExperimentReportRow]) -> str:
    if not rows:
        raise EmptyInputError("no report rows")
    return _csv(REPORT_COLUMNS, (row_cells(r) for r in rows))


def report_json(result: ExperimentResult) -> str:
    if not result.rows:
        raise EmptyInputError("no report rows")
    doc = {
        "metadata": result.metadata,
        "rows": [
            {**dict(zip(REPORT_COLUMNS, row_cells(r))), "label": r.label, "n_yards": r.n_yards,
             "rl_runs": list(r.rl_runs)}
            for r in result.rows
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def format_cell(mean: float, std: float | None) -> str:
    """Thousands-separated ``mean±std``; the std part is dropped for single runs."""
    if std is None:
        return f"{mean:,.0f}"
    return f"{mean:,.0f}±{std:,.0f}"


def report_table(rows: Sequence[ExperimentReportRow]) -> str:
    """One line per scenario: occupancy, each configuration's RL and reductions versus (a)."""
    if not rows:
        raise EmptyInputError("no report rows")
    scenarios: dict[str, list[ExperimentReportRow]] = {}
    for r in rows:
        scenarios.setdefault(r.scenario, []).append(r)
    keys = [k for k in MATRIX if any(r.config == k for r in rows)]
    reds = [k for k in keys if k != "a"] if "a" in keys else []
    header = ["Scenario", "Occ Avg", "Occ Max"] + [f"({k}) {MATRIX[k].label}" for k in keys] + \
        [f"(a)->({k})" for k in reds]
    lines = [header]
    for name, group in scenarios.items():
        by_key = {r.config: r for r in group}
        occ_avg = max(r.occ_avg for r in group)
        occ_max = max(r.occ_max for r in group)
        cells = [name, f"{occ_avg * 100:.2f}%", f"{occ_max * 100:.2f}%"]
        cells += [format_cell(by_key[k].rl_mean, by_key[k].rl_std) if k in by_key else "-" for k in keys]
        for k in reds:
            red = by_key[k].reduction_vs_baseline_pct if k in by_key else None
            cells.append("-" if red is None else f"{red:.2f}%")
        lines.append(cells)
    widths = [max(len(line[i]) for line in lines) for i in range(len(header))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(line, widths)).rstrip() for line in lines) + "\n"


def daily_csv(points: Sequence[DailyPoint]) -> str:
    return _csv(DAILY_COLUMNS, ((p.scenario, p.config, p.seed, p.date, p.relocations, p.occupancy)
                                for p in points))


def bank_csv(points: Sequence[BankPoint]) -> str:
    return _csv(BANK_COLUMNS, ((p.date, p.containers_processed, p.lookups, p.backend_calls, p.request_ratio,
                                p.cost_per_1000) for p in points))


def emit_report(result: ExperimentResult, out_dir: str | os.PathLike,
                formats: Sequence[str] = tuple(FILES)) -> dict[str, Path]:
    """Write the requested files atomically and return their paths."""
    if not result.rows:
        raise EmptyInputError("no report rows")
    unknown = [f for f in formats if f not in FILES]
    if unknown:
        raise ValueError(f"unknown report formats: {unknown}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    render = {
        "csv": lambda: report_csv(result.rows),
        "json": lambda: report_json(result),
        "table": lambda: report_table(result.rows),
        "daily": lambda: daily_csv(result.daily),
        "bank": lambda: bank_csv(result.bank_cost),
    }
    paths = {}
    for f in formats:
        path = out / FILES[f]
        atomic_write_text(path, render[f]())
        paths[f] = path
    return paths


def rows_from_json(text: str) -> list[ExperimentReportRow]:
    """Rebuild report rows from ``report.json`` (used by the ``report`` command)."""
    doc = json.loads(text)
    rows = []
    for r in doc["rows"]:
        rows.append(ExperimentReportRow(
            r["scenario"], r["config"], r["label"], int(r["n_yards"]), tuple(int(x) for x in r["rl_runs"]),
            float(r["occ_avg"]), float(r["occ_max"]), float(r["overflow"]),
            None if r["reduction_vs_baseline_pct"] in ("", None) else float(r["reduction_vs_baseline_pct"]),
        ))
    return rows
