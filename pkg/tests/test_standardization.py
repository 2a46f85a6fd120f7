from __future__ import annotations

import json
import threading
import time

import pytest
from hypothesis import given, settings, strategies as st

from dwellsim.errors import (
    BackendError, BackendTransportError, DivisionDomainError, DomainError, EchoMismatchError,
    EmptyInputError, SchemaError,
)
from dwellsim.standardization import (
    CodeKind, NoisyMockBackend, STDBank, StandardCode, TextKind, Validation, bank_stats, build_prompt,
    consistency_rate, load_table, mock_backend, mock_result, non_matched_ratio, parse_result,
    standardize, validate_code, validate_hierarchy,
)
from dwellsim.standardization.bank import derive_metrics
from dwellsim.standardization.codes import KSIC_SECTION_RANGES, ksic_section_of
from dwellsim.standardization.lexicon import CI_KEYWORDS, OI_NAMES
from dwellsim.standardization.metrics import mean_consistency_rate, ratio_from_counts
from dwellsim.standardization.prompts import KSIC_INSTRUCTION, KSIC_TASK, extract_raw

from oracles import expected_consistency, expected_consistency_product

HS_OK = {"cargo": "X", "hscod2": "20", "hscod4": "2009", "hscod6": "200990",
         "evidence_tokens": ["JUICE"], "validation_check": "type1", "reason": "r"}


# prompts -------------------------------------------------------------

def test_prompt_ends_with_raw_verbatim():
    raw = "MIX VEGETABLE CONCENTRATE ORDER"
    p = build_prompt(raw, "CI")
    assert p.endswith("Container Information: " + raw)
    assert "[Request]" in p and "hscod6" in p


def test_owner_prompt_has_ksic_blocks():
    p = build_prompt("Company-4", TextKind.OI)
    assert KSIC_INSTRUCTION in p and KSIC_TASK in p
    assert p.endswith("Owner Information: Company-4")


@pytest.mark.parametrize("raw", ["", "   ", "\t\n"])
def test_prompt_rejects_empty(raw):
    with pytest.raises(EmptyInputError):
        build_prompt(raw, "CI")


@given(st.text(min_size=1).filter(lambda s: s.strip()), st.sampled_from(["CI", "OI"]))
def test_prompt_roundtrip_is_byte_faithful(raw, kind):
    p = build_prompt(raw, kind)
    assert p == build_prompt(raw, kind)
    assert extract_raw(p) == (TextKind(kind), raw)


# schema --------------------------------------------------------------

def test_parse_full_hs_code():
    r = parse_result(json.dumps(HS_OK), "CI")
    assert r.code.as_tuple() == ("20", "2009", "200990")
    assert r.validation is Validation.TYPE1


def test_parse_null_code_type3():
    p = dict(HS_OK, hscod2=None, hscod4=None, hscod6=None, evidence_tokens=[], validation_check="type3")
    r = parse_result(p, "CI")
    assert r.code.is_null and r.validation is Validation.TYPE3


def test_parse_missing_reason():
    p = dict(HS_OK)
    del p["reason"]
    with pytest.raises(SchemaError):
        parse_result(p, "CI")


@pytest.mark.parametrize("mutate", [
    lambda p: p.update(extra=1),
    lambda p: p.update(hscod6=200990),
    lambda p: p.update(validation_check="type4"),
    lambda p: p.update(evidence_tokens="JUICE"),
    lambda p: p.pop("hscod4"),
])
def test_parse_schema_violations(mutate):
    p = dict(HS_OK)
    mutate(p)
    with pytest.raises(SchemaError):
        parse_result(p, "CI")


def test_parse_echo_mismatch():
    with pytest.raises(EchoMismatchError):
        parse_result(HS_OK, "CI", raw="x")
    assert parse_result(HS_OK, "CI", raw="X").raw_key == "X"


def test_parse_ksic_and_alt_type3_spelling():
    p = {"owner": "o", "size": "Mid", "section1": None, "division2": None, "group3": None,
         "validation_check": "ksic-type3", "reason": "r"}
    r = parse_result(p, "OI")
    assert r.validation is Validation.TYPE3 and r.owner_size.value == "Mid"
    with pytest.raises(SchemaError):
        parse_result(dict(p, size="Huge"), "OI")
    with pytest.raises(SchemaError):
        parse_result("not json", "OI")


# hierarchy -----------------------------------------------------------

def test_validate_examples():
    assert validate_code(StandardCode(CodeKind.HS, "20", "2009", "200990")).all_matched
    assert validate_code(StandardCode(CodeKind.KSIC, "I", "56", "561")).all_matched
    rep = validate_code(StandardCode(CodeKind.HS, "20", "1101", "110100"))
    assert rep.matched == (True, False, True)


def test_validate_null_levels_unmatched():
    rep = validate_code(StandardCode(CodeKind.HS, "73", "7306", None))
    assert rep.matched == (True, True, False)
    assert validate_code(StandardCode(CodeKind.KSIC)).matched == (False, False, False)


def test_ksic_letter_division_mismatch():
    assert validate_code(StandardCode(CodeKind.KSIC, "C", "56", "561")).matched == (True, False, True)
    assert ksic_section_of("56") == "I" and ksic_section_of("04") is None


def test_tables_are_consistent():
    hs, ks = load_table(CodeKind.HS), load_table(CodeKind.KSIC)
    assert len(hs.codes(2)) >= 200 and len(ks.codes(1)) == 21 and len(ks.codes(3)) >= 100
    for lvl in (2, 3):
        for c in hs.codes(lvl):
            assert validate_code(StandardCode(CodeKind.HS, c[:2], c[:4], c if lvl == 3 else None)).at(lvl)
    for d in ks.codes(2):
        assert ks.get(2, d).parent_code == ksic_section_of(d)
    assert set(KSIC_SECTION_RANGES) == set(ks.codes(1))


def test_validate_hierarchy_accepts_result():
    assert validate_hierarchy(mock_result("APPLE JUICE", "CI")).all_matched


# mock backend --------------------------------------------------------

def test_mock_examples():
    r = mock_result("ORANGE JUICE 200 DRUMS", "CI")
    assert r.validation is Validation.TYPE1 and r.code.lv2 == "2009" and r.code.lv3.startswith("2009")
    assert r.evidence_tokens == ("JUICE",)
    t = mock_result("TUBE", "CI")
    assert t.validation is Validation.TYPE2 and t.code.lv3 is None and t.reason
    z = mock_result("ZZZZZ", "CI")
    assert z.validation is Validation.TYPE3 and z.code.is_null


def test_mock_owner_variants_and_junk():
    for raw in ("SAMIL STEEL CO., LTD.", "Samil Steel Corp", "samil steel"):
        r = mock_result(raw, "OI")
        assert r.code.as_tuple() == ("C", "24", "241") and r.owner_size.value == "Large"
    assert mock_result("GLOBAL TRADING", "OI").validation is Validation.TYPE2
    j = mock_result("TO ORDER", "OI")
    assert j.validation is Validation.TYPE3 and j.owner_size.value == "Unknown"


def test_mock_backend_payload_parses_and_is_pure():
    raw = "SPARKLING APPLE JUICE"
    payload = mock_backend(build_prompt(raw, "CI"))
    assert payload == mock_backend(build_prompt(raw, "CI"))
    r = parse_result(payload, "CI", raw)
    assert r.code.lv3 == "200979"


def test_lexicon_sizes():
    assert len(CI_KEYWORDS) >= 50 and len(OI_NAMES) >= 30


@given(st.lists(st.sampled_from(sorted(CI_KEYWORDS) + ["ASSORTED", "CTNS", "TUBE", "Z9"]), min_size=1, max_size=6),
       st.sampled_from([" ", ", ", "/", " - "]))
def test_type1_mock_results_pass_hierarchy(words, sep):
    r = mock_result(sep.join(words), "CI")
    rep = validate_hierarchy(r)
    if r.validation is Validation.TYPE1:
        assert rep.all_matched
    assert rep.matched_non_null(r.code)


def test_noisy_wrapper_stays_in_heading():
    nb = NoisyMockBackend(1.0, seed=3)
    hs = load_table(CodeKind.HS)
    raw = "ORANGE JUICE"
    for _ in range(20):
        r = parse_result(nb(build_prompt(raw, "CI")), "CI", raw)
        assert r.code.lv2 == "2009" and r.code.lv3 != "200990" and hs.contains(3, r.code.lv3)
    nb0 = NoisyMockBackend(0.0, seed=3)
    assert nb0(build_prompt(raw, "CI")) == mock_backend(build_prompt(raw, "CI"))


# bank ----------------------------------------------------------------

def test_standardize_caches_and_counts():
    bank = STDBank()
    raw = "MIX VEGETABLE CONCENTRATE ORDER"
    r1 = standardize(raw, "CI", mock_backend, bank)
    assert bank.counters()["backend_calls"] == 1
    r2 = standardize(raw, "CI", mock_backend, bank)
    c = bank.counters()
    assert r1 == r2 and c["hits"] == 1 and c["backend_calls"] == 1 and c["lookups"] == 2
    assert bank.get("CI", raw).hit_count == 1


def test_keys_are_byte_exact_and_per_kind():
    bank = STDBank()
    for raw in ("apple juice", "APPLE JUICE", "APPLE JUICE "):
        standardize(raw, "CI", mock_backend, bank)
    standardize("APPLE JUICE", "OI", mock_backend, bank)
    assert bank.counters()["backend_calls"] == 4 and len(bank) == 4


def test_schema_failure_quarantines():
    bank = STDBank()
    bad = lambda prompt: json.dumps({"cargo": "x"})  # noqa: E731
    with pytest.raises(SchemaError):
        standardize("BEEF", "CI", bad, bank)
    assert len(bank) == 0 and bank.quarantine[0].raw_key == "BEEF"
    c = bank.counters()
    assert c == {"lookups": 1, "hits": 0, "backend_calls": 0, "failed_calls": 1}


def test_transport_retries_then_success():
    calls = []

    def flaky(prompt):
        calls.append(1)
        if len(calls) < 3:
            raise BackendTransportError("down")
        return mock_backend(prompt)

    sleeps = []
    bank = STDBank()
    standardize("BEEF", "CI", flaky, bank, sleep=sleeps.append, backoff=0.1)
    assert len(calls) == 3 and sleeps == [0.1, 0.2]
    assert bank.counters()["backend_calls"] == 1


def test_transport_gives_up_after_two_retries_and_schema_not_retried():
    n = []

    def down(prompt):
        n.append(1)
        raise BackendTransportError("down")

    bank = STDBank()
    with pytest.raises(BackendError):
        standardize("BEEF", "CI", down, bank, sleep=lambda s: None)
    assert len(n) == 3 and len(bank) == 0 and not bank.quarantine

    m = []

    def malformed(prompt):
        m.append(1)
        return "{}"

    with pytest.raises(SchemaError):
        standardize("PORK", "CI", malformed, bank, sleep=lambda s: None)
    assert len(m) == 1


def test_concurrent_first_callers_share_one_call():
    calls = []
    lock = threading.Lock()

    def slow(prompt):
        with lock:
            calls.append(1)
        time.sleep(0.05)
        return mock_backend(prompt)

    bank = STDBank()
    barrier = threading.Barrier(16)
    out = []

    def worker():
        barrier.wait()
        out.append(standardize("FROZEN SALMON", "CI", slow, bank))

    ts = [threading.Thread(target=worker) for _ in range(16)]
    for t in ts:
        t.start()
    for t in ts:
        t.join()
    assert len(calls) == 1 and len(set(out)) == 1
    c = bank.counters()
    assert c["lookups"] == 16 and c["hits"] == 15


def test_persistence_roundtrip_later_lines_win(tmp_path):
    path = tmp_path / "bank.jsonl"
    bank = STDBank(path)
    for raw in ("BEEF", "PORK", "TUBE"):
        standardize(raw, "CI", mock_backend, bank)
    standardize("SAMIL STEEL", "OI", mock_backend, bank)
    assert len(path.read_text().splitlines()) == 4
    # a later line for an existing key overrides it
    e = bank.get("CI", "BEEF")
    d = json.loads(e.to_json())
    d["result"]["reason"] = "edited"
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(d) + "\n")
    again = STDBank(path)
    assert len(again) == 4 and again.get("CI", "BEEF").result.reason == "edited"
    out = again.save(tmp_path / "compact.jsonl")
    assert len(out.read_text().splitlines()) == 4
    # reloaded bank serves hits without backend
    n = []
    standardize("PORK", "CI", lambda p: n.append(1) or mock_backend(p), again)
    assert not n


@settings(max_examples=50, deadline=None)
@given(st.lists(st.sampled_from(["BEEF", "PORK", "TUBE", "ZZZ", "RICE BAGS", "rice bags"]), max_size=40))
def test_cache_idempotence_property(stream):
    bank = STDBank()
    seen = {}
    for raw in stream:
        r = standardize(raw, "CI", mock_backend, bank)
        assert seen.setdefault(raw, r) == r
        c = bank.counters()
        assert c["lookups"] == c["hits"] + c["backend_calls"] + c["failed_calls"]
    assert bank.counters()["backend_calls"] == len(set(stream))
    before = bank.counters()["backend_calls"]
    for raw in stream:
        standardize(raw, "CI", mock_backend, bank)
    assert bank.counters()["backend_calls"] == before


def test_bank_stats_arithmetic():
    ratio, cost = derive_metrics(1000, 400, 0.002, 1000)
    assert ratio == 0.4 and cost == pytest.approx(400 * 0.002)
    assert derive_metrics(1000, 0, 0.002, 1000) == (0.0, 0.0)
    with pytest.raises(DivisionDomainError):
        derive_metrics(0, 0, 1.0, 10)
    with pytest.raises(DivisionDomainError):
        bank_stats(STDBank(), 1.0)


def test_bank_stats_per_kind():
    bank = STDBank()
    for raw in ("BEEF", "BEEF", "PORK"):
        standardize(raw, "CI", mock_backend, bank)
    standardize("SAMIL STEEL", "OI", mock_backend, bank)
    bank.note_containers(3)
    s = bank_stats(bank, 0.5, kind="CI")
    assert (s.lookups, s.hits, s.backend_calls) == (3, 1, 2)
    assert s.cost_per_1000 == 2 * 0.5 * 1000 / 3


# consistency and non-matched ratio -----------------------------------

def test_consistency_examples():
    assert consistency_rate(["a"] * 10) == 100.0
    assert consistency_rate([str(i) for i in range(10)]) == 0.0
    assert consistency_rate(["a"] * 9 + ["b"]) == pytest.approx(800 / 9)
    with pytest.raises(DomainError):
        consistency_rate(["a"])


@given(st.lists(st.integers(0, 4), min_size=2, max_size=30))
def test_consistency_bounds(xs):
    r = consistency_rate(xs)
    assert 0.0 <= r <= 100.0
    assert (r == 100.0) == (len(set(xs)) == 1)


def test_expectation_oracle_frozen_values():
    # frozen from two independent enumerations (partition-based and full product)
    assert expected_consistency(0.1, 1) == pytest.approx(92.76309378, abs=1e-6)
    assert expected_consistency(0.1, 2) == pytest.approx(91.08304309530, abs=1e-6)
    assert expected_consistency_product(0.1, 2) == pytest.approx(91.08304309530, abs=1e-6)


def test_noisy_consistency_matches_oracle_small():
    hs = load_table(CodeKind.HS)
    raws = sorted(CI_KEYWORDS)
    nb = NoisyMockBackend(0.2, seed=11)
    trials, expected = [], []
    for i in range(400):
        raw = raws[i % len(raws)]
        codes = [parse_result(nb(build_prompt(raw, "CI")), "CI").code.lv3 for _ in range(10)]
        trials.append(codes)
        expected.append(expected_consistency(0.2, len(hs.siblings(3, CI_KEYWORDS[raw]))))
    assert abs(mean_consistency_rate(trials) - sum(expected) / len(expected)) < 2.0


def test_non_matched_ratio_counts_and_dedup():
    good = mock_result("BEEF", "CI")
    t2 = mock_result("TUBE", "CI")
    broken = parse_result(dict(HS_OK, cargo="Q", hscod4="1101"), "CI")
    res = [good, good, t2, broken]
    r = non_matched_ratio(res, "Type1", 2)
    assert (r.count_a, r.count_b) == (2, 1)
    assert non_matched_ratio(res, "Type2", 3).ratio == 1.0
    with pytest.raises(DivisionDomainError):
        non_matched_ratio(res, "Type3", 1)


def test_ratio_from_paper_counts():
    assert ratio_from_counts(22271, 921).percent == pytest.approx(4.14, abs=0.01)
    assert ratio_from_counts(106775, 0).percent == 0.0
