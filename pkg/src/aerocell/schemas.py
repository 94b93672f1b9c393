"""Pydantic models for the HTTP boundary.

NaN never crosses the wire: undefined metrics (a dead tier, zero trials)
are serialized as null.  The `config` field of every request takes the
same JSON document the CLI reads from --config; omitted keys fall back to
the defaults from GET /defaults.
"""

from __future__ import annotations

import math
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field

from .analysis import AnalyticReport
from .montecarlo import MetricEstimate
from .service import METRICS, ValidationReport


def _nan_to_none(x: float) -> float | None:
    return None if math.isnan(x) else x


class AnalyzeRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: dict[str, Any] = {}
    beta_db: float | None = None
    tau_db: float | None = None
    rel_tol: float | None = Field(None, gt=0)
    abs_tol: float | None = Field(None, gt=0)


class AnalyzeResponse(BaseModel):
    a_g: float
    a_a: float
    a_los: float
    a_nlos: float
    s_backhaul: float
    p_cov_g: float | None
    p_cov_a: float | None
    p_cov: float | None
    beta: float
    tau_b: float
    errors: dict[str, float]

    @classmethod
    def from_report(cls, rep: AnalyticReport) -> "AnalyzeResponse":
        return cls(a_g=rep.a_g, a_a=rep.a_a, a_los=rep.a_los, a_nlos=rep.a_nlos,
                   s_backhaul=rep.s_backhaul,
                   p_cov_g=_nan_to_none(rep.p_cov_g),
                   p_cov_a=_nan_to_none(rep.p_cov_a),
                   p_cov=_nan_to_none(rep.p_cov),
                   beta=rep.beta, tau_b=rep.tau_b, errors=dict(rep.errors))


class MetricModel(BaseModel):
    value: float | None
    trials: int
    half_width: float | None
    flagged: bool
    note: str

    @classmethod
    def from_estimate(cls, est: MetricEstimate) -> "MetricModel":
        return cls(value=_nan_to_none(est.value), trials=est.trials,
                   half_width=_nan_to_none(est.half_width),
                   flagged=est.flagged, note=est.note)


class SimulateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: dict[str, Any] = {}
    n_trials: int = Field(10_000, ge=1)
    seed: int = Field(0, ge=0)
    mode: Literal["full", "center-uav"] = "full"
    jobs: int | None = Field(None, ge=1)
    r_sim_scale: float = Field(1.0, gt=0)
    beta_db: float | None = None
    tau_db: float | None = None


class SimulateResponse(BaseModel):
    metrics: dict[str, MetricModel]
    n_trials: int
    seed: int
    mode: str

    @classmethod
    def from_metrics(cls, metrics: dict[str, MetricEstimate], n_trials: int,
                     seed: int, mode: str) -> "SimulateResponse":
        return cls(metrics={k: MetricModel.from_estimate(v) for k, v in metrics.items()},
                   n_trials=n_trials, seed=seed, mode=mode)


class SweepRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: dict[str, Any] = {}
    axis: Literal["h_a", "lambda_g", "beta", "tau_b", "n_uav"]
    values: list[float]
    metrics: list[str] = Field(default=list(METRICS), min_length=1)
    mode: Literal["analytic", "simulate", "both"] = "analytic"
    n_trials: int = Field(2000, ge=1)
    seed: int = Field(0, ge=0)
    jobs: int | None = Field(None, ge=1)
    r_sim_scale: float = Field(1.0, gt=0)
    beta_db: float | None = None
    tau_db: float | None = None
    rel_tol: float | None = Field(None, gt=0)
    abs_tol: float | None = Field(None, gt=0)


class SweepResponse(BaseModel):
    axis: str
    columns: list[str]
    rows: list[list[float | str | None]]   # cells aligned with columns


class ValidateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: dict[str, Any] = {}
    n_trials: int = Field(20_000, ge=1)
    seed: int = Field(0, ge=0)
    jobs: int | None = Field(None, ge=1)
    r_sim_scale: float = Field(1.0, gt=0)
    beta_db: float | None = None
    tau_db: float | None = None
    rel_tol: float | None = Field(None, gt=0)
    abs_tol: float | None = Field(None, gt=0)


class ValidationRowModel(BaseModel):
    metric: str
    reference: float | None
    estimate: float | None
    half_width: float | None
    gap: float | None
    tol: float | None
    passed: bool
    note: str


class ValidateResponse(BaseModel):
    passed: bool
    n_trials: int
    seed: int
    rows: list[ValidationRowModel]

    @classmethod
    def from_report(cls, rep: ValidationReport) -> "ValidateResponse":
        rows = [ValidationRowModel(metric=r.metric,
                                   reference=_nan_to_none(r.reference),
                                   estimate=_nan_to_none(r.estimate),
                                   half_width=_nan_to_none(r.half_width),
                                   gap=_nan_to_none(r.gap),
                                   tol=_nan_to_none(r.tol),
                                   passed=r.passed, note=r.note)
                for r in rep.rows]
        return cls(passed=rep.passed, n_trials=rep.n_trials, seed=rep.seed,
                   rows=rows)


class HealthResponse(BaseModel):
    status: str
    version: str
