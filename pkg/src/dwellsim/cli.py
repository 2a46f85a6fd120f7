"""Command-line entry point: ``dwellsim <command> [options]``.

Exit codes: 0 success, 1 usage error, 2 data or invariant error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from dwellsim import __version__
from dwellsim.edi.features import FeatureOptions
from dwellsim.edi.records import ContainerRecord, atomic_write_text, read_records, write_records
from dwellsim.errors import BackendError, DwellSimError, SchemaError
from dwellsim.harness.config import build_dataclass, read_kv
from dwellsim.harness.experiment import load_experiment_config, run_experiment_matrix
from dwellsim.harness.generator import GeneratorConfig, generate_dataset
from dwellsim.harness.report import FILES, emit_report, report_csv, report_table, rows_from_json
from dwellsim.predictor import (
    Forecaster, GBRTConfig, StateModels, fit_oracle, split_records, train_state_models,
)
from dwellsim.standardization import STDBank, TextKind, bank_stats, make_backend, standardize
from dwellsim.yardsim import YardLayout, run_simulation

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit with status 2
        raise UsageError(f"{self.prog}: error: {message}")


def _std_maps(records: Sequence[ContainerRecord], bank_path: str | None, backend_name: str,
              flip_prob: float, seed: int):
    """Look every text up in the bank, filling gaps from the backend."""
    bank = STDBank(bank_path)
    backend = make_backend(backend_name, flip_prob, seed)
    maps = {TextKind.CI: {}, TextKind.OI: {}}
    for r in records:
        for raw, kind in ((r.ci_raw, TextKind.CI), (r.oi_raw, TextKind.OI)):
            if raw in maps[kind]:
                continue
            try:
                maps[kind][raw] = standardize(raw, kind, backend, bank)
            except (BackendError, SchemaError):
                pass
    return bank, maps[TextKind.CI], maps[TextKind.OI]


# commands ------------------------------------------------------------------

def cmd_gen(args) -> int:
    values = read_kv(args.config) if args.config else {}
    if args.n is not None:
        values["n_containers"] = str(args.n)
    if args.seed is not None:
        values["seed"] = str(args.seed)
    cfg = build_dataclass(GeneratorConfig, values)
    records, truth = generate_dataset(cfg)
    write_records(args.out, records)
    if args.truth:
        doc = {"ci": {k: {"code": list(c), "validation": v} for k, (c, v) in sorted(truth.ci.items())},
               "oi": {k: {"code": list(c), "validation": v, "owner_size": s}
                      for k, (c, v, s) in sorted(truth.oi.items())}}
        atomic_write_text(args.truth, json.dumps(doc, indent=1, sort_keys=True) + "\n")
    print(f"wrote {len(records)} records to {args.out}")
    return EXIT_OK


def cmd_standardize(args) -> int:
    records = read_records(args.data)
    bank = STDBank(args.bank)
    backend = make_backend(args.backend, args.flip_prob, args.seed)
    failures = 0
    for r in sorted(records, key=lambda r: (r.t_in, r.id)):
        for raw, kind in ((r.ci_raw, TextKind.CI), (r.oi_raw, TextKind.OI)):
            try:
                standardize(raw, kind, backend, bank)
            except (BackendError, SchemaError):
                failures += 1
        bank.note_containers(1)
    if args.bank:
        bank.save()
    stats = bank_stats(bank, args.unit_cost) if bank.containers_processed else None
    out = {"entries": len(bank), "failures": failures, **bank.counters()}
    if stats is not None:
        out["request_ratio"] = stats.request_ratio
        out["cost_per_1000"] = stats.cost_per_1000
    print(json.dumps(out, sort_keys=True))
    return EXIT_OK


def cmd_train(args) -> int:
    records = read_records(args.data)
    train, _ = split_records(records, args.train_fraction, args.split, args.split_seed)
    _, ci, oi = _std_maps(records, args.bank, args.backend, args.flip_prob, args.seed)
    cfg = GBRTConfig(n_trees=args.n_trees, max_depth=args.max_depth, learning_rate=args.learning_rate,
                     seed=args.seed)
    models = train_state_models(train, cfg, FeatureOptions(args.std_level, not args.no_edi), ci, oi,
                                model=args.model)
    models.save(args.out)
    print(f"trained {args.model} models ({models.options.label()}) on {len(train)} records -> {args.out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    records = read_records(args.data)
    if args.test_only:
        _, records = split_records(records, args.train_fraction, args.split, args.split_seed)
    forecaster = None
    if args.strategy == "picdt":
        if not args.models:
            raise UsageError("--strategy picdt needs --models PATH (or --models oracle)")
        if args.models == "oracle":
            forecaster = Forecaster(fit_oracle(records))
        else:
            _, ci, oi = _std_maps(records, args.bank, args.backend, args.flip_prob, args.seed)
            forecaster = Forecaster(StateModels.load(args.models), ci, oi)
    layout = YardLayout(args.yards)
    res = run_simulation(records, layout, args.strategy, forecaster, args.seed,
                         repredict=not args.no_edi, tier_fill=not args.no_tier_fill)
    if args.out:
        res.save(args.out, include_per_departure=args.per_departure)
    print(json.dumps({"strategy": args.strategy, "yards": args.yards, "seed": args.seed,
                      "rl_total": res.rl_total, "overflow_count": res.overflow_count,
                      "occ_avg": res.occ_avg, "occ_max": res.occ_max}, sort_keys=True))
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg = load_experiment_config(args.config)
    log = (lambda msg: None) if args.quiet else (lambda msg: print(msg, file=sys.stderr))
    result = run_experiment_matrix(cfg, progress=log)
    paths = emit_report(result, args.out)
    print(paths["table"].read_text(encoding="utf-8"), end="")
    return EXIT_OK


def cmd_report(args) -> int:
    src = Path(args.input)
    if src.is_dir():
        src = src / FILES["json"]
    rows = rows_from_json(src.read_text(encoding="utf-8"))
    text = report_table(rows) if args.format == "table" else report_csv(rows)
    if args.out:
        atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from dwellsim.service.app import create_app

    app = create_app(bank_path=args.bank, models_path=args.models, backend=args.backend)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


# parser --------------------------------------------------------------------

def _add_std_source(p) -> None:
    p.add_argument("--bank", help="STD bank JSONL file (created if missing)")
    p.add_argument("--backend", choices=("mock", "noisy", "http"), default="mock")
    p.add_argument("--flip-prob", type=float, default=0.1)


def _add_split(p) -> None:
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--split", choices=("chronological", "random"), default="chronological")
    p.add_argument("--split-seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dwellsim", description="Container dwell prediction and yard stacking simulation.")
    parser.add_argument("--version", action="version", version=f"dwellsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a synthetic dataset (JSON lines)")
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--config", help="key = value generator settings")
    p.add_argument("--truth", help="also write the expected mock classification of every text")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("standardize", help="run dataset texts through the STD bank")
    p.add_argument("--data", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--unit-cost", type=float, default=0.002)
    _add_std_source(p)
    p.set_defaults(func=cmd_standardize)

    p = sub.add_parser("train", help="fit per-state dwell models")
    p.add_argument("--data", required=True)
    p.add_argument("--std-level", type=int, choices=(0, 1, 2, 3), default=3,
                   help="hierarchy level of the code features; 0 disables them")
    p.add_argument("--no-edi", action="store_true", help="drop the elapsed / due-date features")
    p.add_argument("--model", choices=("mean", "gbrt"), default="gbrt")
    p.add_argument("--n-trees", type=int, default=300)
    p.add_argument("--max-depth", type=int, default=6)
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_std_source(p)
    _add_split(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("simulate", help="replay a dataset through the yard")
    p.add_argument("--data", required=True)
    p.add_argument("--strategy", choices=("baseline", "picdt", "aicdt"), required=True)
    p.add_argument("--yards", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--models", help="model file from `train`, or `oracle`")
    p.add_argument("--no-edi", action="store_true", help="keep the gate-in forecast (no re-prediction)")
    p.add_argument("--no-tier-fill", action="store_true")
    p.add_argument("--test-only", action="store_true", help="replay only the held-out part of the split")
    p.add_argument("--per-departure", action="store_true", help="include per-departure counts in --out")
    p.add_argument("--out")
    _add_std_source(p)
    _add_split(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("experiment", help="run the component matrix from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("report", help="render a saved experiment report")
    p.add_argument("--input", required=True, help="report.json or its directory")
    p.add_argument("--format", choices=("table", "csv"), default="table")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--bank")
    p.add_argument("--models")
    p.add_argument("--backend", choices=("mock", "noisy", "http"), default="mock")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except (DwellSimError, OSError, ValueError, KeyError) as exc:
        print(f"dwellsim: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
