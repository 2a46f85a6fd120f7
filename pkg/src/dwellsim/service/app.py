"""HTTP front end over the core package.

The service keeps one STD bank and, optionally, one set of trained models
for its lifetime. Domain errors become 422 responses.
"""

from __future__ import annotations

import os

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse

from dwellsim import __version__
from dwellsim.edi.records import EDIState, check_records
from dwellsim.errors import BackendError, DwellSimError, SchemaError
from dwellsim.predictor import Forecaster, StateModels, fit_oracle
from dwellsim.service.schemas import (
    BankStatsResponse, ConsistencyRequest, ConsistencyResponse, PredictRequest, PredictResponse,
    SimulateRequest, SimulateResponse, StandardizeRequest, StandardizeResponse,
)
from dwellsim.standardization import (
    STDBank, TextKind, consistency_rate, make_backend, mean_consistency_rate, standardize,
)
from dwellsim.standardization.bank import derive_metrics
from dwellsim.yardsim import YardLayout, run_simulation


def create_app(bank_path: str | os.PathLike | None = None, models_path: str | os.PathLike | None = None,
               backend: str = "mock", flip_prob: float = 0.1, seed: int = 0,
               unit_cost: float = 0.002) -> FastAPI:
    app = FastAPI(title="dwellsim", version=__version__)
    bank = STDBank(bank_path)
    call = make_backend(backend, flip_prob, seed)
    models = StateModels.load(models_path) if models_path else None

    @app.exception_handler(DwellSimError)
    async def _domain_error(request: Request, exc: DwellSimError):
        return JSONResponse(status_code=422, content={"detail": str(exc), "error": type(exc).__name__})

    def _maps(records):
        maps = {TextKind.CI: {}, TextKind.OI: {}}
        for r in records:
            for raw, kind in ((r.ci_raw, TextKind.CI), (r.oi_raw, TextKind.OI)):
                if raw not in maps[kind]:
                    try:
                        maps[kind][raw] = standardize(raw, kind, call, bank)
                    except (BackendError, SchemaError):
                        pass
        return maps[TextKind.CI], maps[TextKind.OI]

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__, "models_loaded": models is not None}

    @app.post("/standardize", response_model=StandardizeResponse)
    def post_standardize(req: StandardizeRequest) -> dict:
        return standardize(req.text, TextKind(req.kind), call, bank).to_dict()

    @app.get("/bank/stats", response_model=BankStatsResponse)
    def get_bank_stats() -> dict:
        c = bank.counters()
        out = {"entries": len(bank), "containers_processed": bank.containers_processed, **c}
        if c["lookups"] and bank.containers_processed:
            out["request_ratio"], out["cost_per_1000"] = derive_metrics(
                c["lookups"], c["backend_calls"], unit_cost, bank.containers_processed)
        return out

    @app.post("/consistency", response_model=ConsistencyResponse)
    def post_consistency(req: ConsistencyRequest) -> dict:
        return {"rate": mean_consistency_rate(req.repeats),
                "per_entry": [consistency_rate(r) for r in req.repeats]}

    @app.post("/predict", response_model=PredictResponse)
    def post_predict(req: PredictRequest) -> dict:
        if models is None:
            raise HTTPException(status_code=409, detail="no models loaded; start the service with --models")
        records = [m.to_record() for m in req.records]
        ci, oi = _maps(records)
        preds = Forecaster(models, ci, oi).predict_batch(records, EDIState[req.state])
        return {"state": req.state, "predictions": [float(p) for p in preds]}

    @app.post("/simulate", response_model=SimulateResponse)
    def post_simulate(req: SimulateRequest) -> dict:
        records = [m.to_record() for m in req.records]
        check_records(records)
        forecaster = None
        if req.strategy == "picdt":
            if req.oracle:
                forecaster = Forecaster(fit_oracle(records))
            elif models is not None:
                forecaster = Forecaster(models, *_maps(records))
            else:
                raise HTTPException(status_code=409, detail="picdt needs loaded models or oracle=true")
        res = run_simulation(records, YardLayout(req.yards), req.strategy, forecaster, req.seed,
                             repredict=req.repredict, tier_fill=req.tier_fill)
        return {"strategy": req.strategy, "yards": req.yards, "seed": req.seed,
                "n_containers": res.n_containers, "rl_total": res.rl_total,
                "overflow_count": res.overflow_count, "occ_avg": res.occ_avg, "occ_max": res.occ_max}

    app.state.bank = bank
    return app
