"""Container records, EDI states and the time-ordered event stream."""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from datetime import datetime
from enum import Enum, IntEnum
from pathlib import Path
from typing import Iterable

from dwellsim.errors import OrderViolationError


class EDIState(IntEnum):
    """Customs/pickup stage; the integer order is the only legal transition order."""

    IN = 0
    CR = 1
    CP = 2
    OUT = 3


PREDICTION_STATES = (EDIState.IN, EDIState.CR, EDIState.CP)


class Size(str, Enum):
    FT20 = "20ft"
    FT40 = "40ft"


class CType(str, Enum):
    DRY = "Dry"
    REEFER = "Reefer"
    DANGER = "Danger"
    OTHER = "Other"


RECORD_FIELDS = ("id", "t_in", "t_cr", "t_cp", "t_out", "t_do", "size", "ctype", "bl",
                 "weight_kg", "country", "carrier", "ci_raw", "oi_raw")


@dataclass(frozen=True)
class ContainerRecord:
    id: str
    t_in: datetime
    t_cr: datetime
    t_cp: datetime
    t_out: datetime
    t_do: datetime
    size: Size
    ctype: CType
    bl: int | None
    weight_kg: float
    country: str
    carrier: str
    ci_raw: str
    oi_raw: str

    def time_of(self, state: EDIState) -> datetime:
        return (self.t_in, self.t_cr, self.t_cp, self.t_out)[int(state)]

    def violations(self) -> list[str]:
        out = []
        if not (self.t_in < self.t_cr < self.t_cp < self.t_out):
            out.append("t_in < t_cr < t_cp < t_out")
        if not (self.t_cp < self.t_do):
            out.append("t_cp < t_do")
        if not self.weight_kg > 0:
            out.append("weight > 0")
        if self.bl not in (0, 1, 2, None):
            out.append("bl in {0,1,2,None}")
        return out

    def to_json(self) -> str:
        return json.dumps({
            "id": self.id,
            "t_in": self.t_in.isoformat(), "t_cr": self.t_cr.isoformat(), "t_cp": self.t_cp.isoformat(),
            "t_out": self.t_out.isoformat(), "t_do": self.t_do.isoformat(),
            "size": self.size.value, "ctype": self.ctype.value, "bl": self.bl,
            "weight_kg": self.weight_kg, "country": self.country, "carrier": self.carrier,
            "ci_raw": self.ci_raw, "oi_raw": self.oi_raw,
        }, ensure_ascii=False)

    @classmethod
    def from_dict(cls, d: dict) -> "ContainerRecord":
        missing = [k for k in RECORD_FIELDS if k not in d]
        if missing:
            raise ValueError(f"record {d.get('id')!r} lacks fields {missing}")
        ts = {k: datetime.fromisoformat(d[k]) for k in ("t_in", "t_cr", "t_cp", "t_out", "t_do")}
        return cls(id=str(d["id"]), size=Size(d["size"]), ctype=CType(d["ctype"]), bl=d["bl"],
                   weight_kg=float(d["weight_kg"]), country=d["country"], carrier=d["carrier"],
                   ci_raw=d["ci_raw"], oi_raw=d["oi_raw"], **ts)


def check_records(records: Iterable[ContainerRecord]) -> None:
    """Reject the batch if any record breaks ordering or uniqueness, naming every offender."""
    bad: list[str] = []
    seen: set[str] = set()
    for r in records:
        if r.violations() or r.id in seen:
            bad.append(r.id)
        seen.add(r.id)
    if bad:
        head = ", ".join(bad[:10]) + (" ..." if len(bad) > 10 else "")
        raise OrderViolationError(f"{len(bad)} invalid record(s): {head}", bad)


def read_records(path: str | os.PathLike, validate: bool = True) -> list[ContainerRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(ContainerRecord.from_dict(json.loads(line)))
    if validate:
        check_records(out)
    return out


def atomic_write_text(path: str | os.PathLike, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_records(path: str | os.PathLike, records: Iterable[ContainerRecord]) -> Path:
    return atomic_write_text(path, "".join(r.to_json() + "\n" for r in records))


@dataclass(frozen=True, order=True)
class SimEvent:
    time: datetime
    state: EDIState
    container_id: str


def event_stream(records: Iterable[ContainerRecord]) -> list[SimEvent]:
    """Four events per container sorted by (time, state, id)."""
    records = list(records)
    bad = [r.id for r in records if not (r.t_in < r.t_cr < r.t_cp < r.t_out)]
    if bad:
        raise OrderViolationError(f"records out of order: {', '.join(bad[:10])}", bad)
    events = [SimEvent(r.time_of(s), s, r.id) for r in records for s in EDIState]
    events.sort()
    return events
