from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from datetime import datetime, timedelta

from dwellsim.edi.records import CType, ContainerRecord, Size

T0 = datetime(2024, 1, 1)


def make_record(cid="c1", t_in=0.0, t_cr=10.0, t_cp=20.0, t_out=30.0, t_do=40.0, size=Size.FT20,
                ctype=CType.DRY, bl=0, weight=12000.0, country="CN", carrier="K1",
                ci_raw="FROZEN BEEF", oi_raw="HANBIT FOODS") -> ContainerRecord:
    """Record with timestamps given in hours after 2024-01-01 00:00."""
    h = lambda x: T0 + timedelta(hours=x)  # noqa: E731
    return ContainerRecord(cid, h(t_in), h(t_cr), h(t_cp), h(t_out), h(t_do), size, ctype, bl, weight,
                           country, carrier, ci_raw, oi_raw)


# acceptance summary: one pass/fail line per criterion, printed after the run

def pytest_configure(config):
    config._acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
