"""Synthetic import-container streams whose dwell depends on cargo and owner codes.

Cargo and owner texts come from the mock backend's own keyword tables, so
standardizing a generated record reproduces its ground-truth code unless
the text was deliberately made ambiguous or junk.
"""

from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta

import numpy as np

from dwellsim.edi.records import CType, ContainerRecord, Size
from dwellsim.errors import ConfigError
from dwellsim.standardization.lexicon import CI_GENERIC, CI_KEYWORDS, OI_GENERIC, OI_NAMES, normalize_owner

START = datetime(2024, 1, 1)

REEFER_HEADINGS = {"0803", "0805", "0806", "0808", "3002"}
REEFER_CHAPTERS = {"02", "03", "04"}
PERISHABLE_CHAPTERS = {"02", "03", "04", "07", "08"}
DANGER_CODES = {"290511", "291611", "271019", "850760"}

UNITS = ("CTNS", "PKGS", "BAGS", "DRUMS", "PALLETS", "CASES", "ROLLS", "BUNDLES", "CRATES", "SACKS")
ADJECTIVES = ("", "FRESH", "PREMIUM", "ASSORTED", "MIXED", "GRADE A", "NEW", "BULK", "FINE", "FROZEN",
              "DRIED", "REFINED")
TAILS = ("", "AS PER INVOICE", "FOR EXPORT", "SHIPPER LOAD COUNT AND SEAL", "SAID TO CONTAIN",
         "NET WT {n} KGS", "PO {n}", "HS PENDING")
OWNER_FORMS = ("{N} CO., LTD.", "{N} CO LTD", "{N}", "{N} CORP.", "{n} Co., Ltd.", "{n} Inc.", "{N} LIMITED")
AMBIGUOUS_OWNERS = ("GLOBAL TRADING", "ASIA LOGISTICS", "KOREA FOODS", "PACIFIC SHIPPING",
                    "STAR ELECTRONICS", "UNITED STEEL", "EAST TEXTILE CO", "ORIENT CHEMICAL")
JUNK_OWNERS = ("TO ORDER", "TO THE ORDER OF BANK", "XXXX", "N/A", "SAME AS CONSIGNEE")
JUNK_CARGO = ("XXXX", "GENERAL CARGO", "N/A", "FAK", "SAID TO CONTAIN 1 LOT")

COUNTRIES = ("CN", "US", "VN", "JP", "DE", "AU", "TH", "IN", "ID", "MY", "BR", "CL", "NZ", "IT", "ES",
             "FR", "NL", "CA", "MX", "TW")
CARRIERS = ("K1", "K2", "K3", "K4", "K5", "K6", "K7", "K8", "K9")

SIZE_MU = {"SME": 0.15, "Mid": 0.0, "Large": -0.2, "Unknown": 0.05}
SIZE_SIGMA = {"SME": 0.6, "Mid": 0.5, "Large": 0.38, "Unknown": 0.55}
MIN_DWELL_H = 4.0
BL_VALUES = (0, 1, 2, None)
BL_CUM = list(itertools.accumulate((0.6, 0.25, 0.1, 0.05)))


@dataclass(frozen=True)
class GeneratorConfig:
    n_containers: int = 20000
    vessel_interarrival_hours: float = 11.0
    batch_size_mean: float = 500.0
    discharge_window_hours: float = 12.0
    n_cargo_profiles: int = 0          # 0 = every profile in the keyword table
    n_owner_profiles: int = 0          # 0 = every owner in the name table
    base_log_dwell: float = 4.1
    chapter_sd: float = 0.35
    heading_sd: float = 0.25
    subheading_sd: float = 0.2
    division_sd: float = 0.2
    group_sd: float = 0.15
    perishable_shift: float = -0.4
    carrier_sd: float = 0.5            # context effects, used when context_effects is on
    country_sd: float = 0.45
    forty_ft_shift: float = 0.3
    bl_shift: float = 0.4              # log-dwell step per BL kind
    noise_scale: float = 0.5           # multiplies the per-owner-size residual sigma
    weight_sd: float = 0.15            # log-normal spread of cargo weight around its profile mean
    # per (cargo profile, owner size) log-normal overrides: "hs6:size:mu:sigma; ..."
    dwell_params: tuple[tuple[str, str, float, float], ...] = ()
    fixed_dwell: tuple[float, ...] = ()  # (mu, sigma) applied to every container when set
    context_effects: bool = True
    cr_fraction_range: tuple[float, float] = (0.2, 0.9)
    cp_lead_hours_range: tuple[float, float] = (1.0, 48.0)
    do_margin_hours_range: tuple[float, float] = (6.0, 72.0)
    reefer_fraction: float = 0.2
    forty_ft_fraction: float = 0.5
    ambiguous_fraction: float = 0.05
    junk_fraction: float = 0.01
    fresh_text_prob: float = 0.03
    variants_per_profile: int = 12
    seed: int = 0

    def validate(self) -> None:
        if self.n_containers < 0:
            raise ConfigError("n_containers must be >= 0")
        for name in ("vessel_interarrival_hours", "batch_size_mean", "discharge_window_hours"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("cr_fraction_range", "cp_lead_hours_range", "do_margin_hours_range"):
            lo, hi = getattr(self, name)
            if not 0 < lo <= hi:
                raise ConfigError(f"{name} must satisfy 0 < lo <= hi")
        if self.cr_fraction_range[1] >= 1:
            raise ConfigError("cr_fraction_range must stay below 1")
        if self.cp_lead_hours_range[0] >= MIN_DWELL_H / 2:
            raise ConfigError(f"cp_lead lower bound must be below {MIN_DWELL_H / 2} h")
        for name in ("reefer_fraction", "forty_ft_fraction", "ambiguous_fraction", "junk_fraction",
                     "fresh_text_prob"):
            if not 0 <= getattr(self, name) <= 1:
                raise ConfigError(f"{name} must lie in [0, 1]")
        if self.ambiguous_fraction + self.junk_fraction > 1:
            raise ConfigError("ambiguous + junk fractions exceed 1")
        if self.fixed_dwell and (len(self.fixed_dwell) != 2 or self.fixed_dwell[1] <= 0):
            raise ConfigError("fixed_dwell must be (mu, sigma>0)")
        if self.variants_per_profile < 1:
            raise ConfigError("variants_per_profile must be >= 1")
        for name in ("chapter_sd", "heading_sd", "subheading_sd", "division_sd", "group_sd", "carrier_sd",
                     "country_sd", "noise_scale", "weight_sd"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")


@dataclass(frozen=True)
class CargoProfile:
    hs6: str
    keywords: tuple[str, ...]
    reefer: bool
    danger: bool
    weight_mean: float


@dataclass
class GroundTruth:
    """Expected mock classification of every generated text, plus per-record profile."""

    ci: dict[str, tuple[tuple, str]] = field(default_factory=dict)
    oi: dict[str, tuple[tuple, str, str]] = field(default_factory=dict)
    cargo_of: dict[str, str] = field(default_factory=dict)
    owner_of: dict[str, str] = field(default_factory=dict)


def cargo_profiles() -> list[CargoProfile]:
    by_code: dict[str, list[str]] = {}
    for kw, code in CI_KEYWORDS.items():
        by_code.setdefault(code, []).append(kw)
    out = []
    for code in sorted(by_code):
        reefer = code[:2] in REEFER_CHAPTERS or code[:4] in REEFER_HEADINGS
        weight = 6000.0 + (int(code) * 7919 % 97) * 200.0
        out.append(CargoProfile(code, tuple(by_code[code]), reefer, code in DANGER_CODES, weight))
    return out


def _zipf_cum(n: int, rng: np.random.Generator, s: float = 1.0) -> list[float]:
    """Cumulative Zipf weights over a seeded random ranking of ``n`` items."""
    w = 1.0 / np.arange(1, n + 1) ** s
    return list(itertools.accumulate(w[rng.permutation(n)].tolist()))


def _draw(rng: np.random.Generator, cum: list[float]) -> int:
    """Index drawn with probability proportional to the increments of ``cum``."""
    return min(bisect.bisect_right(cum, rng.random() * cum[-1]), len(cum) - 1)


def _cargo_text(rng: np.random.Generator, keywords: tuple[str, ...]) -> str:
    kw = keywords[int(rng.integers(len(keywords)))]
    if len(keywords) > 1 and rng.random() < 0.3:
        other = keywords[int(rng.integers(len(keywords)))]
        if other != kw:
            kw = f"{kw} {other}"
    qty = int(rng.integers(1, 999))
    unit = UNITS[int(rng.integers(len(UNITS)))]
    adj = ADJECTIVES[int(rng.integers(len(ADJECTIVES)))]
    tail = TAILS[int(rng.integers(len(TAILS)))].format(n=int(rng.integers(100, 99999)))
    parts = [f"{qty} {unit}", adj, kw, tail]
    text = " ".join(p for p in parts if p)
    return text if rng.random() < 0.8 else text.title()


def _owner_text(rng: np.random.Generator, name: str) -> str:
    form = OWNER_FORMS[int(rng.integers(len(OWNER_FORMS)))]
    return form.format(N=name, n=name.title())


def _centred(rng: np.random.Generator, keys, sd: float) -> dict:
    draws = rng.normal(0, sd, len(keys))
    return {k: float(v) for k, v in zip(keys, draws - draws.mean())}


def _effects(rng: np.random.Generator, codes, sd: float) -> dict[str, float]:
    return {c: float(rng.normal(0.0, sd)) for c in sorted(codes)}


def generate_dataset(config: GeneratorConfig) -> tuple[list[ContainerRecord], GroundTruth]:
    """Deterministic given ``config.seed``."""
    config.validate()
    rng = np.random.default_rng(config.seed)

    profiles = cargo_profiles()
    if config.n_cargo_profiles:
        keep = sorted(rng.permutation(len(profiles))[: config.n_cargo_profiles])
        profiles = [profiles[i] for i in keep]
    owners = sorted(OI_NAMES)
    if config.n_owner_profiles:
        keep = sorted(rng.permutation(len(owners))[: config.n_owner_profiles])
        owners = [owners[i] for i in keep]
    reefer_p = [p for p in profiles if p.reefer]
    dry_p = [p for p in profiles if not p.reefer]
    if not reefer_p or not dry_p:
        raise ConfigError("profile subset needs both reefer and non-reefer cargo")

    # dwell structure: nested effects down the HS and KSIC hierarchies
    hs_codes = [p.hs6 for p in profiles]
    ch_eff = _effects(rng, {c[:2] for c in hs_codes}, config.chapter_sd)
    hd_eff = _effects(rng, {c[:4] for c in hs_codes}, config.heading_sd)
    sh_eff = _effects(rng, set(hs_codes), config.subheading_sd)
    div_eff = _effects(rng, {OI_NAMES[o][1] for o in owners}, config.division_sd)
    grp_eff = _effects(rng, {OI_NAMES[o][2] for o in owners}, config.group_sd)
    overrides = {(h, s): (mu, sd) for h, s, mu, sd in config.dwell_params}
    # context effects are centred so they spread dwell without moving its overall level
    carrier_eff = _centred(rng, CARRIERS, config.carrier_sd)
    country_eff = _centred(rng, COUNTRIES, config.country_sd)
    bl_eff = {0: -config.bl_shift, 1: 0.0, 2: config.bl_shift, None: 0.5 * config.bl_shift}

    reefer_w = _zipf_cum(len(reefer_p), rng)
    dry_w = _zipf_cum(len(dry_p), rng)
    owner_w = _zipf_cum(len(owners), rng)
    country_w = _zipf_cum(len(COUNTRIES), rng)

    variants = {p.hs6: [_cargo_text(rng, p.keywords) for _ in range(config.variants_per_profile)]
                for p in profiles}
    variant_w = _zipf_cum(config.variants_per_profile, rng, s=1.2)
    owner_variants = {o: sorted({_owner_text(rng, o) for _ in range(6)}) for o in owners}

    # vessel arrivals and batch sizes
    n = config.n_containers
    arrivals: list[tuple[float, str]] = []
    t = 0.0
    while len(arrivals) < n:
        t += float(rng.exponential(config.vessel_interarrival_hours))
        carrier = CARRIERS[int(rng.integers(len(CARRIERS)))]
        size = max(1, int(rng.poisson(config.batch_size_mean)))
        for _ in range(min(size, n - len(arrivals))):
            arrivals.append((t + float(rng.uniform(0, config.discharge_window_hours)), carrier))
    arrivals.sort(key=lambda a: a[0])

    truth = GroundTruth()
    records: list[ContainerRecord] = []
    for i, (t_in, carrier) in enumerate(arrivals):
        cid = f"C{i + 1:07d}"
        reefer = rng.random() < config.reefer_fraction
        pool, w = (reefer_p, reefer_w) if reefer else (dry_p, dry_w)
        prof = pool[_draw(rng, w)]
        owner = owners[_draw(rng, owner_w)]
        sec, div, grp, osize = OI_NAMES[owner]

        # cargo text
        u = rng.random()
        if u < config.junk_fraction:
            ci_raw = JUNK_CARGO[int(rng.integers(len(JUNK_CARGO)))]
            truth.ci[ci_raw] = ((None, None, None), "Type3")
        elif u < config.junk_fraction + config.ambiguous_fraction:
            g = sorted(CI_GENERIC)[int(rng.integers(len(CI_GENERIC)))]
            ci_raw = f"{int(rng.integers(1, 400))} {UNITS[int(rng.integers(len(UNITS)))]} {g}"
            truth.ci[ci_raw] = ((*CI_GENERIC[g], None), "Type2")
        else:
            if rng.random() < config.fresh_text_prob:
                ci_raw = _cargo_text(rng, prof.keywords)
            else:
                ci_raw = variants[prof.hs6][_draw(rng, variant_w)]
            truth.ci[ci_raw] = ((prof.hs6[:2], prof.hs6[:4], prof.hs6), "Type1")

        # owner text; an unresolvable owner has Unknown size for dwell purposes
        u = rng.random()
        eff_size = osize
        if u < config.junk_fraction:
            oi_raw = JUNK_OWNERS[int(rng.integers(len(JUNK_OWNERS)))]
            truth.oi[oi_raw] = ((None, None, None), "Type3", "Unknown")
        elif u < config.junk_fraction + config.ambiguous_fraction:
            oi_raw = AMBIGUOUS_OWNERS[int(rng.integers(len(AMBIGUOUS_OWNERS)))]
            tok = next(t for t in normalize_owner(oi_raw).split() if t in OI_GENERIC)
            truth.oi[oi_raw] = ((*OI_GENERIC[tok], None), "Type2", "Unknown")
        else:
            vs = owner_variants[owner]
            oi_raw = vs[int(rng.integers(len(vs)))]
            truth.oi[oi_raw] = ((sec, div, grp), "Type1", osize)

        # dwell
        bl = BL_VALUES[_draw(rng, BL_CUM)]
        size = Size.FT40 if rng.random() < config.forty_ft_fraction else Size.FT20
        country = COUNTRIES[_draw(rng, country_w)]
        if config.fixed_dwell:
            mu, sigma = config.fixed_dwell
        elif (prof.hs6, eff_size) in overrides:
            mu, sigma = overrides[(prof.hs6, eff_size)]
        else:
            mu = (config.base_log_dwell + ch_eff[prof.hs6[:2]] + hd_eff[prof.hs6[:4]] + sh_eff[prof.hs6]
                  + div_eff[div] + grp_eff[grp] + SIZE_MU[eff_size])
            if prof.hs6[:2] in PERISHABLE_CHAPTERS:
                mu += config.perishable_shift
            if config.context_effects:
                mu += carrier_eff[carrier] + country_eff[country] + bl_eff[bl]
                mu += config.forty_ft_shift if size is Size.FT40 else 0.0
            sigma = SIZE_SIGMA[eff_size] * config.noise_scale
        dwell = max(float(math.exp(rng.normal(mu, sigma))), MIN_DWELL_H)

        lo, hi = config.cp_lead_hours_range
        lead = float(rng.uniform(lo, min(hi, 0.5 * dwell)))
        t_out = t_in + dwell
        t_cp = t_out - lead
        f_lo, f_hi = config.cr_fraction_range
        t_cr = t_in + float(rng.uniform(f_lo, f_hi)) * (t_cp - t_in)
        m_lo, m_hi = config.do_margin_hours_range
        t_do = t_cp + float(rng.uniform(m_lo, m_hi))

        if reefer:
            ctype = CType.REEFER
        elif prof.danger:
            ctype = CType.DANGER
        else:
            ctype = CType.OTHER if rng.random() < 0.03 else CType.DRY
        weight = round(float(prof.weight_mean * math.exp(rng.normal(0, config.weight_sd))) * (1.3 if size is Size.FT40 else 1.0), 1)

        stamps = [_stamp(x) for x in (t_in, t_cr, t_cp, t_out, t_do)]
        records.append(ContainerRecord(cid, *stamps, size, ctype, bl, weight, country, carrier, ci_raw, oi_raw))
        truth.cargo_of[cid] = prof.hs6
        truth.owner_of[cid] = owner
    return records, truth


def _stamp(hours: float) -> datetime:
    return START + timedelta(seconds=round(hours * 3600.0))
