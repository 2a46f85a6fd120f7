"""STD Bank: a cache of standardization results keyed on the verbatim raw text.

A miss calls the backend once, validates the payload and stores the result;
every later lookup of the same (kind, raw) pair reuses it. Concurrent first
callers of one key share a single in-flight backend call.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
import time
from concurrent.futures import Future
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

from dwellsim.errors import BackendError, BackendTransportError, DivisionDomainError, SchemaError
from dwellsim.standardization.codes import TextKind
from dwellsim.standardization.prompts import build_prompt
from dwellsim.standardization.schema import StandardizationResult, parse_result


@dataclass
class STDBankEntry:
    kind: TextKind
    raw_key: str
    result: StandardizationResult
    created_at: str
    hit_count: int = 0

    def to_json(self) -> str:
        return json.dumps({
            "kind": self.kind.value, "raw_key": self.raw_key, "result": self.result.to_dict(),
            "created_at": self.created_at, "hit_count": self.hit_count,
        }, ensure_ascii=False)

    @classmethod
    def from_json(cls, line: str) -> "STDBankEntry":
        d = json.loads(line)
        return cls(TextKind(d["kind"]), d["raw_key"], StandardizationResult.from_dict(d["result"]),
                   d["created_at"], int(d.get("hit_count", 0)))


@dataclass
class _Counters:
    lookups: int = 0
    hits: int = 0
    backend_calls: int = 0
    failed_calls: int = 0


@dataclass(frozen=True)
class BankStats:
    lookups: int
    hits: int
    backend_calls: int
    failed_calls: int
    unit_cost: float
    containers_processed: int
    request_ratio: float
    cost_per_1000: float


def derive_metrics(lookups: int, backend_calls: int, unit_cost: float, containers_processed: int) -> tuple[float, float]:
    """Return (request_ratio, cost_per_1000)."""
    if lookups <= 0:
        raise DivisionDomainError("request ratio undefined with zero lookups")
    if containers_processed <= 0:
        raise DivisionDomainError("cost per 1000 containers undefined with zero containers")
    return backend_calls / lookups, backend_calls * unit_cost * 1000 / containers_processed


@dataclass(frozen=True)
class QuarantineItem:
    kind: TextKind
    raw_key: str
    error: str


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class STDBank:
    def __init__(self, path: str | os.PathLike | None = None, clock: Callable[[], str] = _utc_now):
        self.path = Path(path) if path is not None else None
        self._clock = clock
        self._entries: dict[tuple[TextKind, str], STDBankEntry] = {}
        self._inflight: dict[tuple[TextKind, str], Future] = {}
        self._lock = threading.Lock()
        self._counters = {k: _Counters() for k in TextKind}
        self.containers_processed = 0
        self.quarantine: list[QuarantineItem] = []
        if self.path is not None and self.path.exists():
            self._load(self.path)

    # persistence -----------------------------------------------------

    def _load(self, path: Path) -> None:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    e = STDBankEntry.from_json(line)
                    self._entries[(e.kind, e.raw_key)] = e

    def _append(self, entry: STDBankEntry) -> None:
        if self.path is None:
            return
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(entry.to_json() + "\n")

    def save(self, path: str | os.PathLike | None = None) -> Path:
        """Write a compacted copy (one line per key), atomically."""
        target = Path(path) if path is not None else self.path
        if target is None:
            raise ValueError("no path to save to")
        with self._lock:
            lines = [e.to_json() for e in self._entries.values()]
        fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=".bank-")
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.writelines(line + "\n" for line in lines)
        os.replace(tmp, target)
        return target

    # queries ---------------------------------------------------------

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: tuple[TextKind | str, str]) -> bool:
        return (TextKind(key[0]), key[1]) in self._entries

    def get(self, kind: TextKind | str, raw: str) -> STDBankEntry | None:
        return self._entries.get((TextKind(kind), raw))

    def entries(self, kind: TextKind | str | None = None) -> list[STDBankEntry]:
        with self._lock:
            es = list(self._entries.values())
        if kind is not None:
            es = [e for e in es if e.kind is TextKind(kind)]
        return es

    def results(self, kind: TextKind | str) -> dict[str, StandardizationResult]:
        """Raw text to stored result for one text kind."""
        return {e.raw_key: e.result for e in self.entries(kind)}

    def counters(self, kind: TextKind | str | None = None) -> dict[str, int]:
        with self._lock:
            cs = [self._counters[TextKind(kind)]] if kind is not None else list(self._counters.values())
            return {
                "lookups": sum(c.lookups for c in cs),
                "hits": sum(c.hits for c in cs),
                "backend_calls": sum(c.backend_calls for c in cs),
                "failed_calls": sum(c.failed_calls for c in cs),
            }

    def note_containers(self, n: int = 1) -> None:
        with self._lock:
            self.containers_processed += n

    # internal bookkeeping used by standardize ------------------------

    def _record(self, kind: TextKind, outcome: str) -> None:
        c = self._counters[kind]
        c.lookups += 1
        setattr(c, outcome, getattr(c, outcome) + 1)


def _call_backend(prompt: str, backend: Callable[[str], str], retries: int, backoff: float,
                  sleep: Callable[[float], None]) -> str:
    attempt = 0
    while True:
        try:
            return backend(prompt)
        except BackendTransportError:
            if attempt >= retries:
                raise
            sleep(backoff * (2 ** attempt))
            attempt += 1


def standardize(raw: str, kind: TextKind | str, backend: Callable[[str], str], bank: STDBank, *,
                retries: int = 2, backoff: float = 0.05,
                sleep: Callable[[float], None] = time.sleep) -> StandardizationResult:
    kind = TextKind(kind)
    key = (kind, raw)
    prompt = build_prompt(raw, kind)

    with bank._lock:
        entry = bank._entries.get(key)
        if entry is not None:
            entry.hit_count += 1
            bank._record(kind, "hits")
            return entry.result
        fut = bank._inflight.get(key)
        owner = fut is None
        if owner:
            fut = Future()
            bank._inflight[key] = fut

    if not owner:
        try:
            result = fut.result()
        except Exception:
            with bank._lock:
                bank._record(kind, "failed_calls")
            raise
        with bank._lock:
            bank._entries[key].hit_count += 1
            bank._record(kind, "hits")
        return result

    try:
        payload = _call_backend(prompt, backend, retries, backoff, sleep)
        result = parse_result(payload, kind, raw)
    except SchemaError as exc:
        with bank._lock:
            bank.quarantine.append(QuarantineItem(kind, raw, str(exc)))
            bank._record(kind, "failed_calls")
            del bank._inflight[key]
        fut.set_exception(exc)
        raise
    except BackendError as exc:
        with bank._lock:
            bank._record(kind, "failed_calls")
            del bank._inflight[key]
        fut.set_exception(exc)
        raise
    except BaseException as exc:
        with bank._lock:
            bank._record(kind, "failed_calls")
            del bank._inflight[key]
        fut.set_exception(BackendError(f"backend raised {type(exc).__name__}: {exc}"))
        raise

    with bank._lock:
        entry = STDBankEntry(kind, raw, result, bank._clock())
        bank._entries[key] = entry
        bank._append(entry)
        bank._record(kind, "backend_calls")
        del bank._inflight[key]
    fut.set_result(result)
    return result


def bank_stats(bank: STDBank, unit_cost: float, kind: TextKind | str | None = None,
               containers_processed: int | None = None) -> BankStats:
    c = bank.counters(kind)
    n = bank.containers_processed if containers_processed is None else containers_processed
    ratio, cost = derive_metrics(c["lookups"], c["backend_calls"], unit_cost, n)
    return BankStats(c["lookups"], c["hits"], c["backend_calls"], c["failed_calls"], unit_cost, n, ratio, cost)
