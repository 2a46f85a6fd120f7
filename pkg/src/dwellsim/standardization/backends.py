"""Standardization backends: prompt text in, payload text out."""

from __future__ import annotations

import json
import os
import random
import threading
from typing import Callable

from dwellsim.errors import BackendError, BackendTransportError
from dwellsim.standardization.codes import CodeKind, StandardCode, TextKind, load_table
from dwellsim.standardization.lexicon import (
    CI_GENERIC, CI_KEYWORDS, OI_GENERIC, OI_NAMES, normalize_owner, tokenize,
)
from dwellsim.standardization.prompts import extract_raw
from dwellsim.standardization.schema import OwnerSize, StandardizationResult, Validation

Backend = Callable[[str], str]


def _mock_ci(raw: str) -> StandardizationResult:
    toks = tokenize(raw)
    hs = load_table(CodeKind.HS)
    for tok in toks:
        hs6 = CI_KEYWORDS.get(tok.upper())
        if hs6 is None:
            continue
        evidence: list[str] = []
        for t in toks:
            if CI_KEYWORDS.get(t.upper()) == hs6 and t not in evidence:
                evidence.append(t)
        code = StandardCode(CodeKind.HS, hs6[:2], hs6[:4], hs6)
        reason = (f'Keyword "{tok}" identifies heading {hs6[:4]} '
                  f'({hs.description(2, hs6[:4])}); assigned subheading {hs6}.')
        return StandardizationResult(raw, TextKind.CI, code, Validation.TYPE1, reason, tuple(evidence))
    for tok in toks:
        hit = CI_GENERIC.get(tok.upper())
        if hit is None:
            continue
        code = StandardCode(CodeKind.HS, hit[0], hit[1], None)
        reason = (f'"{tok}" is a broad term; chapter {hit[0]} and heading {hit[1]} are plausible '
                  "but nothing in the text settles the 6-digit subheading.")
        return StandardizationResult(raw, TextKind.CI, code, Validation.TYPE2, reason, (tok,))
    reason = "No recognisable commodity term in the cargo text; it cannot be classified."
    return StandardizationResult(raw, TextKind.CI, StandardCode(CodeKind.HS), Validation.TYPE3, reason, ())


def _mock_oi(raw: str) -> StandardizationResult:
    name = normalize_owner(raw)
    hit = OI_NAMES.get(name)
    if hit is not None:
        sec, div, grp, size = hit
        ksic = load_table(CodeKind.KSIC)
        code = StandardCode(CodeKind.KSIC, sec, div, grp)
        reason = f"Owner {name} is a known firm in group {grp} ({ksic.description(3, grp)})."
        return StandardizationResult(raw, TextKind.OI, code, Validation.TYPE1, reason, (), OwnerSize(size))
    for tok in name.split():
        g = OI_GENERIC.get(tok)
        if g is None:
            continue
        code = StandardCode(CodeKind.KSIC, g[0], g[1], None)
        reason = f'Only the industry word "{tok}" is informative; the group level is left open.'
        return StandardizationResult(raw, TextKind.OI, code, Validation.TYPE2, reason, (), OwnerSize.UNKNOWN)
    reason = "Owner text does not name an identifiable company."
    return StandardizationResult(raw, TextKind.OI, StandardCode(CodeKind.KSIC), Validation.TYPE3, reason, (),
                                 OwnerSize.UNKNOWN)


def mock_result(raw: str, kind: TextKind | str) -> StandardizationResult:
    """Pure reference classification of one raw text."""
    kind = TextKind(kind)
    return _mock_ci(raw) if kind is TextKind.CI else _mock_oi(raw)


def mock_backend(prompt: str) -> str:
    kind, raw = extract_raw(prompt)
    return json.dumps(mock_result(raw, kind).to_payload(), ensure_ascii=False)


class NoisyMockBackend:
    """Mock backend that swaps the lv3 code for a sibling with probability ``flip_prob``."""

    def __init__(self, flip_prob: float, seed: int = 0):
        if not 0.0 <= flip_prob <= 1.0:
            raise ValueError("flip_prob must lie in [0, 1]")
        self.flip_prob = flip_prob
        self._rng = random.Random(seed)
        self._lock = threading.Lock()

    def __call__(self, prompt: str) -> str:
        kind, raw = extract_raw(prompt)
        res = mock_result(raw, kind)
        payload = res.to_payload()
        lv3 = res.code.lv3
        if lv3 is None:
            return json.dumps(payload, ensure_ascii=False)
        sibs = load_table(res.code.kind).siblings(3, lv3)
        with self._lock:
            flip = self._rng.random() < self.flip_prob
            choice = self._rng.choice(sibs) if flip and sibs else None
        if choice is not None:
            payload["hscod6" if kind is TextKind.CI else "group3"] = choice
        return json.dumps(payload, ensure_ascii=False)


def mock_backend_noisy(flip_prob: float, seed: int = 0) -> NoisyMockBackend:
    return NoisyMockBackend(flip_prob, seed)


class HttpBackend:
    """POSTs the prompt as the request body and returns the response body.

    Not exercised against a real service.
    """

    def __init__(self, url: str | None = None, token: str | None = None, timeout: float = 30.0):
        self.url = url or os.environ.get("DWELLSIM_BACKEND_URL")
        if not self.url:
            raise BackendError("no backend URL: set DWELLSIM_BACKEND_URL")
        self.token = token if token is not None else os.environ.get("DWELLSIM_BACKEND_TOKEN")
        self.timeout = timeout

    def __call__(self, prompt: str) -> str:
        import httpx

        headers = {"Content-Type": "text/plain; charset=utf-8"}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        try:
            resp = httpx.post(self.url, content=prompt.encode("utf-8"), headers=headers, timeout=self.timeout)
        except httpx.TransportError as exc:
            raise BackendTransportError(str(exc)) from exc
        if resp.status_code >= 500:
            raise BackendTransportError(f"backend returned HTTP {resp.status_code}")
        if resp.status_code >= 400:
            raise BackendError(f"backend returned HTTP {resp.status_code}")
        return resp.text


def make_backend(name: str, flip_prob: float = 0.1, seed: int = 0) -> Backend:
    if name == "mock":
        return mock_backend
    if name == "noisy":
        return NoisyMockBackend(flip_prob, seed)
    if name == "http":
        return HttpBackend()
    raise ValueError(f"unknown backend {name!r}")
