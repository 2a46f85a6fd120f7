"""Flat ``key = value`` configuration files mapped onto dataclasses."""

from __future__ import annotations

import dataclasses
import os
import typing
from typing import Any, Mapping

from dwellsim.errors import ConfigError

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def parse_kv(text: str) -> dict[str, str]:
    """One ``key = value`` per line; ``#`` starts a comment; later keys win."""
    out: dict[str, str] = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key = value, got {line!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {n}: empty key")
        out[key] = value
    return out


def read_kv(path: str | os.PathLike) -> dict[str, str]:
    with open(path, encoding="utf-8") as fh:
        return parse_kv(fh.read())


def _convert(raw: str, tp: Any, key: str) -> Any:
    origin = typing.get_origin(tp)
    args = typing.get_args(tp)
    if origin is typing.Union:
        non_none = [a for a in args if a is not type(None)]
        if raw.lower() in ("", "none", "null") and len(non_none) < len(args):
            return None
        return _convert(raw, non_none[0], key)
    if origin is tuple or tp is tuple:
        if args and args[-1] is Ellipsis:
            elem = args[0]
            nested = typing.get_origin(elem) is tuple
            parts = [p.strip() for p in raw.split(";" if nested else ",") if p.strip()]
            return tuple(_convert(p.replace(":", ",") if nested else p, elem, key) for p in parts)
        parts = [p.strip() for p in raw.split(",") if p.strip()]
        if not args:
            return tuple(_scalar(p) for p in parts)
        if len(parts) != len(args):
            raise ConfigError(f"{key}: expected {len(args)} comma-separated values, got {raw!r}")
        return tuple(_convert(p, a, key) for p, a in zip(parts, args))
    try:
        if tp is bool:
            low = raw.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(raw)
        if tp is int:
            return int(raw)
        if tp is float:
            return float(raw)
        if tp is str:
            return raw
    except ValueError:
        raise ConfigError(f"{key}: cannot read {raw!r} as {getattr(tp, '__name__', tp)}") from None
    raise ConfigError(f"{key}: unsupported field type {tp!r}")


def _scalar(raw: str) -> Any:
    for conv in (int, float):
        try:
            return conv(raw)
        except ValueError:
            pass
    return raw


def build_dataclass(cls, values: Mapping[str, str], *, context: str = ""):
    """Instantiate ``cls`` from string values; unknown keys are errors."""
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls) if f.init}
    unknown = sorted(set(values) - names)
    if unknown:
        raise ConfigError(f"unknown {context or cls.__name__} keys: {', '.join(unknown)}")
    kwargs = {k: _convert(v, hints[k], f"{context}{k}") for k, v in values.items()}
    return cls(**kwargs)


def split_prefixed(values: Mapping[str, str], prefixes: tuple[str, ...]) -> dict[str, dict[str, str]]:
    """Group ``prefix.key`` entries; un-prefixed keys land under ``""``."""
    groups: dict[str, dict[str, str]] = {p: {} for p in ("",) + prefixes}
    for key, value in values.items():
        head, dot, rest = key.partition(".")
        if dot and head in prefixes:
            groups[head][rest] = value
        elif dot:
            raise ConfigError(f"unknown config section {head!r}")
        else:
            groups[""][key] = value
    return groups


def render_kv(obj, prefix: str = "") -> list[str]:
    """Inverse of ``build_dataclass`` for the scalar and tuple fields of ``obj``."""
    lines = []
    for f in dataclasses.fields(obj):
        if not f.init:
            continue
        v = getattr(obj, f.name)
        if dataclasses.is_dataclass(v):
            continue
        if isinstance(v, tuple):
            if v and isinstance(v[0], tuple):
                text = "; ".join(":".join(str(x) for x in item) for item in v)
            else:
                text = ",".join(str(x) for x in v)
        elif isinstance(v, bool):
            text = "true" if v else "false"
        elif v is None:
            text = "none"
        else:
            text = str(v)
        lines.append(f"{prefix}{f.name} = {text}")
    return lines
