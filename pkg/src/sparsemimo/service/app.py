"""HTTP front end for the estimator and the Monte-Carlo harness.

    uvicorn sparsemimo.service:app --port 8000

Configuration errors come back as 422 with ``{"error", "field", "detail"}``;
numerical failures as 500 with the same body.
"""

from __future__ import annotations

import math

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..channel import cfr_full
from ..config import config_from_dict
from ..errors import ConfigError, EstimationError
from ..esprit import MeasurementWindow, estimate_channel, reconstruct_cfr
from ..harness import run_sweep, single_measurement
from ..io import parse_sidecar, sidecar_dict
from ..pilots import MeasurementMatrix
from .schemas import (
    ComplexMatrix,
    ConfigRequest,
    EstimateRequest,
    EstimateResponse,
    GenerateRequest,
    GenerateResponse,
    SimulateRequest,
    SimulateResponse,
    SweepRowModel,
    ValidateResponse,
)


def _matrix(a: np.ndarray) -> ComplexMatrix:
    a = np.asarray(a)
    return ComplexMatrix(re=a.real.tolist(), im=a.imag.tolist())


def _array(m: ComplexMatrix) -> np.ndarray:
    re, im = np.asarray(m.re, dtype=float), np.asarray(m.im, dtype=float)
    if re.shape != im.shape or re.ndim != 2:
        raise ConfigError("measurement", "matching 2-D re/im arrays",
                          f"re {re.shape} and im {im.shape} must be equal 2-D shapes")
    return re + 1j * im


def _finite_or_tag(x: float):
    return x if math.isfinite(x) else str(x)


def create_app() -> FastAPI:
    app = FastAPI(title="sparsemimo", version=__version__)

    @app.exception_handler(ConfigError)
    async def config_error(request: Request, exc: ConfigError):
        return JSONResponse(status_code=422, content={"error": exc.kind, "field": exc.field, "detail": str(exc)})

    @app.exception_handler(EstimationError)
    async def estimation_error(request: Request, exc: EstimationError):
        return JSONResponse(status_code=500, content={"error": exc.kind, "field": None, "detail": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/validate", response_model=ValidateResponse)
    def validate(req: ConfigRequest):
        cfg = config_from_dict(req.config)
        cfg.validate()
        return ValidateResponse(ok=True, config_hash=cfg.config_hash())

    @app.post("/simulate", response_model=SimulateResponse)
    def simulate(req: SimulateRequest):
        cfg = config_from_dict(req.config)
        try:
            result = run_sweep(cfg, req.schemes, req.snr_db, req.trials, req.time_varying, req.threads)
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError("schemes", "known scheme", str(exc)) from None
        rows = [
            SweepRowModel(scheme=r.scheme.value, snr_db=r.snr_db, nt=r.nt, nr=r.nr, np=r.np, r=r.r,
                          mean_nmse_db=_finite_or_tag(r.mean_nmse_db), trials=r.trials, excluded=r.excluded)
            for r in result.sorted_rows()
        ]
        return SimulateResponse(config_hash=result.config_hash, rows=rows)

    @app.post("/generate", response_model=GenerateResponse)
    def generate(req: GenerateRequest):
        cfg = config_from_dict(req.config)
        cfg.validate()
        snr = math.inf if req.snr_db is None else req.snr_db
        chan, meas = single_measurement(cfg, snr, req.seed)
        sidecar = sidecar_dict(cfg.plan, cfg.system, cfg.geometry, cfg.estimator, snr, meas.symbol_index)
        return GenerateResponse(
            sidecar=sidecar,
            measurement=_matrix(meas.data),
            truth=_matrix(cfr_full(chan, cfg.system)),
            delays_s=chan.delays.tolist(),
        )

    @app.post("/estimate", response_model=EstimateResponse)
    def estimate(req: EstimateRequest):
        plan, system, geometry, estimator, snr, symbol = parse_sidecar(req.sidecar)
        data = _array(req.measurement)
        if data.shape != (plan.Np, geometry.pairs):
            raise ConfigError("measurement", "Np x (Nt*Nr)",
                              f"measurement is {data.shape}, expected {(plan.Np, geometry.pairs)}")
        meas = MeasurementMatrix(data, snr, symbol)
        est = estimate_channel(MeasurementWindow(symbol, [meas]), plan, system, estimator)
        return EstimateResponse(
            delays_s=est.delays.tolist(),
            gains=_matrix(est.gains),
            cfr=_matrix(reconstruct_cfr(est)),
        )

    return app


app = create_app()
