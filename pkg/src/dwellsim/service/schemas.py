"""Request and response bodies for the HTTP service."""

from __future__ import annotations

from datetime import datetime
from typing import Literal, Optional

from pydantic import BaseModel, Field

from dwellsim.edi.records import ContainerRecord


class RecordModel(BaseModel):
    id: str
    t_in: datetime
    t_cr: datetime
    t_cp: datetime
    t_out: datetime
    t_do: datetime
    size: Literal["20ft", "40ft"]
    ctype: Literal["Dry", "Reefer", "Danger", "Other"]
    bl: Optional[int] = None
    weight_kg: float
    country: str
    carrier: str
    ci_raw: str
    oi_raw: str

    def to_record(self) -> ContainerRecord:
        return ContainerRecord.from_dict(self.model_dump(mode="json"))


class StandardizeRequest(BaseModel):
    text: str
    kind: Literal["CI", "OI"]


class StandardizeResponse(BaseModel):
    raw_key: str
    kind: str
    code: list[Optional[str]]
    validation: str
    reason: str
    evidence_tokens: list[str]
    owner_size: Optional[str] = None


class BankStatsResponse(BaseModel):
    entries: int
    lookups: int
    hits: int
    backend_calls: int
    failed_calls: int
    containers_processed: int
    request_ratio: Optional[float] = None
    cost_per_1000: Optional[float] = None


class ConsistencyRequest(BaseModel):
    repeats: list[list[str]] = Field(min_length=1, description="repeated outputs per entry")


class ConsistencyResponse(BaseModel):
    rate: float
    per_entry: list[float]


class PredictRequest(BaseModel):
    records: list[RecordModel] = Field(min_length=1)
    state: Literal["IN", "CR", "CP"] = "IN"


class PredictResponse(BaseModel):
    state: str
    predictions: list[float]


class SimulateRequest(BaseModel):
    records: list[RecordModel] = Field(min_length=1)
    strategy: Literal["baseline", "picdt", "aicdt"] = "baseline"
    yards: int = Field(5, ge=1)
    seed: int = 0
    repredict: bool = True
    tier_fill: bool = True
    oracle: bool = Field(False, description="use the true dwell as the p-ICDT forecast")


class SimulateResponse(BaseModel):
    strategy: str
    yards: int
    seed: int
    n_containers: int
    rl_total: int
    overflow_count: int
    occ_avg: float
    occ_max: float
