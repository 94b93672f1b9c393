"""Orchestration shared by the HTTP app and the CLI.

Everything here is synchronous and stateless: one request in, one report
out.  The CLI calls these functions in-process; the HTTP layer wraps them
with pydantic models and nothing else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import analysis, montecarlo
from .analysis import AnalysisError, AnalyticReport
from .montecarlo import MetricEstimate, SimulationError, TrialData
from .params import InvalidParams, SystemParams, validate
from .quadrature import NonConvergence, Tolerance

__all__ = [
    "ServiceError",
    "METRICS",
    "SWEEP_AXES",
    "SWEEP_MODES",
    "SweepSpec",
    "SweepResult",
    "ValidationRow",
    "ValidationReport",
    "run_analyze",
    "run_simulate",
    "sweep_columns",
    "run_sweep",
    "run_validation",
]

METRICS = ("a_g", "a_a", "a_los", "a_nlos",
           "s_backhaul", "p_cov_g", "p_cov_a", "p_cov")
SWEEP_AXES = ("h_a", "lambda_g", "beta", "tau_b", "n_uav")
SWEEP_MODES = ("analytic", "simulate", "both")

# failures a single sweep point is allowed to swallow into its error column
_POINT_ERRORS = (InvalidParams, AnalysisError, NonConvergence, SimulationError)

_DOUBLING_TRIAL_CAP = 20_000


class ServiceError(ValueError):
    """Raised for malformed requests (unknown axis, metric, or mode)."""


def run_analyze(params: SystemParams, *, beta: float | None = None,
                tau_b: float | None = None,
                tol: Tolerance | None = None) -> AnalyticReport:
    """Evaluate the full analytic report at one parameter point."""
    return analysis.overall_coverage(params, beta=beta, tau_b=tau_b, tol=tol)


def run_simulate(params: SystemParams, n_trials: int, seed: int, *,
                 mode: str = "full", jobs: int | None = None,
                 r_sim_scale: float = 1.0, beta: float | None = None,
                 tau_b: float | None = None) -> dict[str, MetricEstimate]:
    """Estimate all metrics from fresh trials at one parameter point."""
    return montecarlo.estimate_metrics(params, n_trials, seed, mode=mode,
                                       jobs=jobs, r_sim_scale=r_sim_scale,
                                       beta=beta, tau_b=tau_b)


@dataclass(frozen=True)
class SweepSpec:
    """One-axis parameter sweep request."""

    axis: str
    values: tuple[float, ...]
    metrics: tuple[str, ...] = METRICS
    mode: str = "analytic"
    n_trials: int = 2000
    seed: int = 0
    jobs: int | None = None
    r_sim_scale: float = 1.0


@dataclass(frozen=True)
class SweepResult:
    axis: str
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]   # one tuple per axis value, aligned with columns


def _check_spec(spec: SweepSpec) -> None:
    if spec.axis not in SWEEP_AXES:
        raise ServiceError(f"axis must be one of {SWEEP_AXES}, got {spec.axis!r}")
    if spec.mode not in SWEEP_MODES:
        raise ServiceError(f"mode must be one of {SWEEP_MODES}, got {spec.mode!r}")
    bad = [m for m in spec.metrics if m not in METRICS]
    if bad:
        raise ServiceError(f"unknown metrics {bad}; choose from {METRICS}")
    if not spec.metrics:
        raise ServiceError("metrics must not be empty")
    if spec.axis == "n_uav":
        for v in spec.values:
            if float(v) != int(v):
                raise ServiceError(f"n_uav values must be integers, got {v!r}")


def sweep_columns(spec: SweepSpec) -> tuple[str, ...]:
    """The fixed CSV header for a sweep: axis, metric columns, error."""
    cols = [spec.axis]
    for m in spec.metrics:
        if spec.mode in ("analytic", "both"):
            cols += [f"{m}_analytic", f"{m}_analytic_err"]
        if spec.mode in ("simulate", "both"):
            cols += [f"{m}_sim", f"{m}_sim_ci"]
    cols.append("error")
    return tuple(cols)

# AnalyticReport carries one error bound per integral; complements share it
_ERR_KEY = {"a_a": "a_g", "a_nlos": "a_los"}


def _point_params(base: SystemParams, axis: str, value) -> SystemParams:
    if axis == "n_uav":
        return base.replace(n_uav=int(value))
    return base.replace(**{axis: float(value)})


def run_sweep(params: SystemParams, spec: SweepSpec, *,
              tol: Tolerance | None = None) -> SweepResult:
    """Evaluate the requested metrics along one axis, one row per value.

    A failure at a point fills that row's error column and the sweep moves
    on.  Threshold axes reuse a single trial batch across all values.
    """
    _check_spec(spec)
    validate(params)
    columns = sweep_columns(spec)

    shared: TrialData | None = None
    if spec.mode in ("simulate", "both") and spec.axis in ("beta", "tau_b") \
            and spec.values:
        shared = montecarlo.run_trials(params, spec.n_trials, spec.seed,
                                       jobs=spec.jobs,
                                       r_sim_scale=spec.r_sim_scale)

    rows = []
    for value in spec.values:
        cells: list = [value]
        err = ""
        try:
            prm = _point_params(params, spec.axis, value)
            if spec.mode in ("analytic", "both"):
                rep = run_analyze(prm, tol=tol)
                d = rep.as_dict()
                for m in spec.metrics:
                    cells += [d[m], rep.errors.get(_ERR_KEY.get(m, m), math.nan)]
            if spec.mode in ("simulate", "both"):
                if shared is not None:
                    est = montecarlo.metrics_from_trials(
                        shared, params, **{spec.axis: float(value)})
                else:
                    est = run_simulate(prm, spec.n_trials, spec.seed,
                                       jobs=spec.jobs,
                                       r_sim_scale=spec.r_sim_scale)
                for m in spec.metrics:
                    cells += [est[m].value, est[m].half_width]
        except _POINT_ERRORS as exc:
            err = f"{type(exc).__name__}: {exc}"
            cells = [value] + [math.nan] * (len(columns) - 2)
        cells.append(err)
        rows.append(tuple(cells))
    return SweepResult(axis=spec.axis, columns=columns, rows=tuple(rows))


@dataclass(frozen=True)
class ValidationRow:
    """One cross-check: |reference - estimate| against a tolerance."""

    metric: str
    reference: float
    estimate: float
    half_width: float
    gap: float
    tol: float
    passed: bool
    note: str = ""


@dataclass(frozen=True)
class ValidationReport:
    rows: tuple[ValidationRow, ...]
    passed: bool
    n_trials: int
    seed: int


def _gap(ref: float, est: float) -> tuple[float, bool]:
    if math.isnan(ref) and math.isnan(est):
        return 0.0, True            # both lanes agree the metric is undefined
    if math.isnan(ref) or math.isnan(est):
        return math.nan, False
    return abs(ref - est), True


def _check_row(metric: str, ref: float, est: MetricEstimate,
               fixed_tol: float) -> ValidationRow:
    sigma = est.half_width / montecarlo._CONFIDENCE
    tol = max(fixed_tol, 3.0 * sigma)
    gap, comparable = _gap(ref, est.value)
    passed = comparable and gap <= tol
    return ValidationRow(metric=metric, reference=ref, estimate=est.value,
                         half_width=est.half_width, gap=gap, tol=tol,
                         passed=passed, note=est.note)


def _take(data: TrialData, n: int) -> TrialData:
    return TrialData(mode=data.mode, tier=data.tier[:n], sir=data.sir[:n],
                     bh_tier=data.bh_tier[:n], sinr=data.sinr[:n])


def run_validation(params: SystemParams, n_trials: int, seed: int, *,
                   jobs: int | None = None, beta: float | None = None,
                   tau_b: float | None = None, tol: Tolerance | None = None,
                   r_sim_scale: float = 1.0) -> ValidationReport:
    """Cross-validate the analytic lane against fresh simulations.

    Association splits are held to 3 sigma of the simulated count; success
    probabilities to the fixed cross-validation budgets (or 3 sigma when
    the run is too short for those to be meaningful).  Window-doubling rows
    compare two window sizes at matched trial counts, so a truncation
    artifact shows up as a gap exceeding both confidence intervals.
    """
    validate(params)
    rep = run_analyze(params, beta=beta, tau_b=tau_b, tol=tol)

    full = montecarlo.run_trials(params, n_trials, seed, jobs=jobs,
                                 r_sim_scale=r_sim_scale)
    center = montecarlo.run_trials(params, n_trials, seed + 1,
                                   mode="center-uav", jobs=jobs,
                                   r_sim_scale=r_sim_scale)
    m_full = montecarlo.metrics_from_trials(full, params, beta=beta, tau_b=tau_b)
    m_center = montecarlo.metrics_from_trials(center, params, beta=beta, tau_b=tau_b)

    rows = [
        _check_row("a_g", rep.a_g, m_full["a_g"], 0.0),
        _check_row("a_a", rep.a_a, m_full["a_a"], 0.0),
        _check_row("a_los", rep.a_los, m_center["a_los"], 0.0),
        _check_row("a_nlos", rep.a_nlos, m_center["a_nlos"], 0.0),
        _check_row("s_backhaul", rep.s_backhaul, m_center["s_backhaul"], 0.02),
        _check_row("p_cov_g", rep.p_cov_g, m_full["p_cov_g"], 0.02),
        _check_row("p_cov_a", rep.p_cov_a, m_full["p_cov_a"], 0.02),
        _check_row("p_cov", rep.p_cov, m_full["p_cov"], 0.02),
    ]

    ind = montecarlo.independence_gap_from_trials(full, params, beta=beta,
                                                  tau_b=tau_b)
    rows.append(_check_row("independence_gap", 0.0, ind, 0.03))

    n_dbl = min(n_trials, _DOUBLING_TRIAL_CAP)
    doubled = montecarlo.run_trials(params, n_dbl, seed, jobs=jobs,
                                    r_sim_scale=2.0 * r_sim_scale)
    m_base = montecarlo.metrics_from_trials(_take(full, n_dbl), params,
                                            beta=beta, tau_b=tau_b)
    m_dbl = montecarlo.metrics_from_trials(doubled, params, beta=beta, tau_b=tau_b)
    for key in ("a_g", "s_backhaul", "p_cov"):
        a, b = m_base[key], m_dbl[key]
        gap, comparable = _gap(a.value, b.value)
        tol_row = a.half_width + b.half_width
        passed = comparable and gap <= tol_row
        rows.append(ValidationRow(metric=f"doubling:{key}", reference=a.value,
                                  estimate=b.value, half_width=b.half_width,
                                  gap=gap, tol=tol_row, passed=passed,
                                  note="window stability"))

    return ValidationReport(rows=tuple(rows), passed=all(r.passed for r in rows),
                            n_trials=n_trials, seed=seed)
