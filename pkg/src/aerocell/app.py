"""HTTP front end: thin routes over the service layer.

Run with `aerocell serve` or `uvicorn aerocell.app:app`.  All endpoints are
synchronous and CPU-bound; FastAPI dispatches them to its worker threads.
"""

from __future__ import annotations

import math
from typing import Any

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import __version__, service
from .analysis import DEFAULT_TOL, AnalysisError
from .montecarlo import SimulationError
from .params import (
    ConfigError,
    InvalidParams,
    SystemParams,
    db_to_linear,
    default_params,
    load_config,
    render_config,
    validate,
)
from .quadrature import NonConvergence, Tolerance
from .schemas import (
    AnalyzeRequest,
    AnalyzeResponse,
    HealthResponse,
    SimulateRequest,
    SimulateResponse,
    SweepRequest,
    SweepResponse,
    ValidateRequest,
    ValidateResponse,
)


def _build_params(config: dict[str, Any], beta_db: float | None,
                  tau_db: float | None) -> SystemParams:
    prm = load_config(config)
    changes = {}
    if beta_db is not None:
        changes["beta"] = db_to_linear(beta_db)
    if tau_db is not None:
        changes["tau_b"] = db_to_linear(tau_db)
    return validate(prm.replace(**changes)) if changes else prm


def _build_tol(rel: float | None, abs_: float | None) -> Tolerance | None:
    if rel is None and abs_ is None:
        return None
    return Tolerance(rel=rel if rel is not None else DEFAULT_TOL.rel,
                     abs=abs_ if abs_ is not None else DEFAULT_TOL.abs)


def create_app() -> FastAPI:
    app = FastAPI(title="aerocell",
                  description="Coverage and backhaul probabilities for a hybrid "
                              "aerial/terrestrial downlink network",
                  version=__version__)

    @app.exception_handler(ConfigError)
    async def _config_error(request: Request, exc: ConfigError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(InvalidParams)
    async def _invalid_params(request: Request, exc: InvalidParams):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(service.ServiceError)
    async def _service_error(request: Request, exc: service.ServiceError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(SimulationError)
    async def _simulation_error(request: Request, exc: SimulationError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(AnalysisError)
    async def _analysis_error(request: Request, exc: AnalysisError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(NonConvergence)
    async def _non_convergence(request: Request, exc: NonConvergence):
        detail = {"detail": f"quadrature did not converge: {exc}",
                  "partial_value": None if math.isnan(exc.value) else exc.value,
                  "error_bound": None if math.isnan(exc.error) else exc.error}
        return JSONResponse(status_code=500, content=detail)

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.get("/defaults")
    def defaults() -> dict[str, Any]:
        return render_config(default_params())

    @app.post("/analyze", response_model=AnalyzeResponse)
    def analyze(req: AnalyzeRequest) -> AnalyzeResponse:
        prm = _build_params(req.config, req.beta_db, req.tau_db)
        rep = service.run_analyze(prm, tol=_build_tol(req.rel_tol, req.abs_tol))
        return AnalyzeResponse.from_report(rep)

    @app.post("/simulate", response_model=SimulateResponse)
    def simulate(req: SimulateRequest) -> SimulateResponse:
        prm = _build_params(req.config, req.beta_db, req.tau_db)
        metrics = service.run_simulate(prm, req.n_trials, req.seed,
                                       mode=req.mode, jobs=req.jobs,
                                       r_sim_scale=req.r_sim_scale)
        return SimulateResponse.from_metrics(metrics, req.n_trials, req.seed,
                                             req.mode)

    @app.post("/sweep", response_model=SweepResponse)
    def sweep(req: SweepRequest) -> SweepResponse:
        prm = _build_params(req.config, req.beta_db, req.tau_db)
        spec = service.SweepSpec(axis=req.axis, values=tuple(req.values),
                                 metrics=tuple(req.metrics), mode=req.mode,
                                 n_trials=req.n_trials, seed=req.seed,
                                 jobs=req.jobs, r_sim_scale=req.r_sim_scale)
        out = service.run_sweep(prm, spec,
                                tol=_build_tol(req.rel_tol, req.abs_tol))
        rows = [[c if isinstance(c, str) else (None if math.isnan(c) else c)
                 for c in row] for row in out.rows]
        return SweepResponse(axis=out.axis, columns=list(out.columns), rows=rows)

    @app.post("/validate", response_model=ValidateResponse)
    def validate_cmd(req: ValidateRequest) -> ValidateResponse:
        prm = _build_params(req.config, req.beta_db, req.tau_db)
        rep = service.run_validation(prm, req.n_trials, req.seed, jobs=req.jobs,
                                     tol=_build_tol(req.rel_tol, req.abs_tol),
                                     r_sim_scale=req.r_sim_scale)
        return ValidateResponse.from_report(rep)

    return app


app = create_app()
