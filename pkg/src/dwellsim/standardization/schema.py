"""Standardization result type and the backend payload schema."""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Any

from dwellsim.errors import EchoMismatchError, SchemaError
from dwellsim.standardization.codes import CodeKind, StandardCode, TextKind


class Validation(str, Enum):
    TYPE1 = "Type1"
    TYPE2 = "Type2"
    TYPE3 = "Type3"

    @property
    def wire(self) -> str:
        return self.value.lower()


class OwnerSize(str, Enum):
    SME = "SME"
    MID = "Mid"
    LARGE = "Large"
    UNKNOWN = "Unknown"


_WIRE_VALIDATION = {
    "type1": Validation.TYPE1,
    "type2": Validation.TYPE2,
    "type3": Validation.TYPE3,
    # the KSIC schema text spells the invalid case this way
    "ksic-type3": Validation.TYPE3,
}

HS_KEYS = ("cargo", "hscod2", "hscod4", "hscod6", "evidence_tokens", "validation_check", "reason")
KSIC_KEYS = ("owner", "size", "section1", "division2", "group3", "validation_check", "reason")
SCHEMA_KEYS = {TextKind.CI: HS_KEYS, TextKind.OI: KSIC_KEYS}


@dataclass(frozen=True)
class StandardizationResult:
    raw_key: str
    kind: TextKind
    code: StandardCode
    validation: Validation
    reason: str
    evidence_tokens: tuple[str, ...] = ()
    owner_size: OwnerSize | None = None

    def to_payload(self) -> dict[str, Any]:
        """Render in the backend wire schema for this kind."""
        lv1, lv2, lv3 = self.code.as_tuple()
        if self.kind is TextKind.CI:
            return {
                "cargo": self.raw_key, "hscod2": lv1, "hscod4": lv2, "hscod6": lv3,
                "evidence_tokens": list(self.evidence_tokens),
                "validation_check": self.validation.wire, "reason": self.reason,
            }
        return {
            "owner": self.raw_key, "size": (self.owner_size or OwnerSize.UNKNOWN).value,
            "section1": lv1, "division2": lv2, "group3": lv3,
            "validation_check": self.validation.wire, "reason": self.reason,
        }

    def to_dict(self) -> dict[str, Any]:
        return {
            "raw_key": self.raw_key,
            "kind": self.kind.value,
            "code": list(self.code.as_tuple()),
            "validation": self.validation.value,
            "reason": self.reason,
            "evidence_tokens": list(self.evidence_tokens),
            "owner_size": self.owner_size.value if self.owner_size else None,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "StandardizationResult":
        kind = TextKind(d["kind"])
        lv1, lv2, lv3 = d["code"]
        return cls(
            raw_key=d["raw_key"],
            kind=kind,
            code=StandardCode(kind.code_kind, lv1, lv2, lv3),
            validation=Validation(d["validation"]),
            reason=d["reason"],
            evidence_tokens=tuple(d.get("evidence_tokens") or ()),
            owner_size=OwnerSize(d["owner_size"]) if d.get("owner_size") else None,
        )


def _code_field(obj: dict, key: str) -> str | None:
    v = obj[key]
    if v is not None and not isinstance(v, str):
        raise SchemaError(f"{key} must be a string or null, got {type(v).__name__}")
    return v


def parse_result(payload: str | bytes | dict, kind: TextKind | str, raw: str | None = None) -> StandardizationResult:
    """Validate a backend payload against the schema for ``kind``.

    When ``raw`` is given the echoed input (cargo / owner) must equal it
    exactly, otherwise the echoed text becomes the raw key.
    """
    kind = TextKind(kind)
    if isinstance(payload, (str, bytes)):
        try:
            obj = json.loads(payload)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"payload is not valid JSON: {exc}") from None
    else:
        obj = payload
    if not isinstance(obj, dict):
        raise SchemaError("payload must be a single JSON object")

    expected = set(SCHEMA_KEYS[kind])
    missing = expected - obj.keys()
    extra = obj.keys() - expected
    if missing or extra:
        raise SchemaError(f"schema mismatch: missing={sorted(missing)} extra={sorted(extra)}")

    echo_key = "cargo" if kind is TextKind.CI else "owner"
    echo = obj[echo_key]
    if not isinstance(echo, str):
        raise SchemaError(f"{echo_key} must be a string")
    if raw is not None and echo != raw:
        raise EchoMismatchError(f"echoed {echo_key} {echo!r} differs from request {raw!r}")

    vc = obj["validation_check"]
    if not isinstance(vc, str) or vc.strip().lower() not in _WIRE_VALIDATION:
        raise SchemaError(f"validation_check has unexpected value {vc!r}")
    validation = _WIRE_VALIDATION[vc.strip().lower()]

    reason = obj["reason"]
    if not isinstance(reason, str):
        raise SchemaError("reason must be a string")

    if kind is TextKind.CI:
        code = StandardCode(CodeKind.HS, _code_field(obj, "hscod2"), _code_field(obj, "hscod4"),
                            _code_field(obj, "hscod6"))
        tokens = obj["evidence_tokens"]
        if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
            raise SchemaError("evidence_tokens must be a list of strings")
        return StandardizationResult(echo, kind, code, validation, reason, tuple(tokens), None)

    code = StandardCode(CodeKind.KSIC, _code_field(obj, "section1"), _code_field(obj, "division2"),
                        _code_field(obj, "group3"))
    size = obj["size"]
    try:
        owner_size = OwnerSize(size)
    except ValueError:
        raise SchemaError(f"size has unexpected value {size!r}") from None
    return StandardizationResult(echo, kind, code, validation, reason, (), owner_size)
