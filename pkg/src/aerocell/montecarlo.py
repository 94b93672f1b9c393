"""Simulation lane: direct trials of the network on finite windows.

Each trial draws one station pattern, one set of aerial nodes, and all
fading/beam marks, then replays the association rules literally.  Trial i
is driven by a substream derived from (seed, i), so results are identical
for any worker count and a longer run extends a shorter one.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import (
    LinkKind,
    gain_distribution,
    los_probability,
    sample_fading,
    sample_interferer_gain,
)
from .channel import GainDistribution
from .geometry import sample_bpp_disk, sample_ppp_disk
from .params import SystemParams, validate

__all__ = [
    "SimulationError",
    "SimWindow",
    "simulation_window",
    "TrialOutcome",
    "TrialData",
    "MetricEstimate",
    "run_trial",
    "run_trials",
    "metrics_from_trials",
    "estimate_metrics",
    "independence_gap_from_trials",
    "independence_gap",
]

_MODES = ("full", "center-uav")
_CONFIDENCE = 1.96  # two-sided 95%
_MIN_CONDITIONAL_TRIALS = 100
_MAX_DONOR_COUNT = 2e4  # cap on the expected backhaul population per trial


class SimulationError(ValueError):
    """Raised for invalid simulation requests."""


@dataclass(frozen=True)
class SimWindow:
    """Truncation radii (meters): access interferers, backhaul donors, sampling."""

    r_access: float
    r_backhaul: float
    r_sample: float


def simulation_window(params: SystemParams, *, r_sim_scale: float = 1.0) -> SimWindow:
    """Choose the finite windows for one trial.

    The access radius keeps the expected station count at or above one
    hundred no matter how thin the deployment; mean power is monotone in
    distance, so capturing the nearest station decides the association
    exactly, and the miss probability is exp(-100).  The donor radius makes
    the chance of the serving donor falling outside about exp(-13.8) even
    if every far station were in the clear state.  When the clear-state
    floor is vanishingly small that bound explodes, so the donor population
    is additionally capped; far clear donors are irrelevant in that regime.
    """
    validate(params)
    if not (r_sim_scale > 0.0 and math.isfinite(r_sim_scale)):
        raise SimulationError(f"r_sim_scale must be finite and > 0, got {r_sim_scale!r}")
    r_access = max(10.0 / math.sqrt(math.pi * params.lambda_g), 5.0 * params.r_c)
    floor = float(los_probability(1e300, params))
    r_backhaul = min(
        math.sqrt(13.8 / (math.pi * params.lambda_g * max(floor, 1e-300))),
        math.sqrt(_MAX_DONOR_COUNT / (math.pi * params.lambda_g)),
    )
    r_sample = max(r_access, r_backhaul + params.r_c + params.x_0)
    return SimWindow(r_access=r_access * r_sim_scale,
                     r_backhaul=r_backhaul * r_sim_scale,
                     r_sample=r_sample * r_sim_scale)


@dataclass(frozen=True)
class TrialOutcome:
    """One trial, reported with named tiers for interactive use."""

    tier: str                      # "bs" or "uav"
    sir: float                     # access SIR of the serving link
    backhaul_tier: str | None      # "los"/"nlos" when tier == "uav"
    sinr: float                    # backhaul SINR; NaN when tier == "bs"


@dataclass(frozen=True)
class TrialData:
    """Columnar record of many trials; thresholds are applied afterwards."""

    mode: str
    tier: np.ndarray      # int8, 0 ground / 1 aerial
    sir: np.ndarray       # float64, NaN in center-uav mode
    bh_tier: np.ndarray   # int8, 0 clear / 1 blocked / -1 not applicable
    sinr: np.ndarray      # float64, NaN where not applicable

    @property
    def n_trials(self) -> int:
        return self.tier.size


@dataclass(frozen=True)
class MetricEstimate:
    """Point estimate with a 95% half width; flagged when underpowered."""

    value: float
    trials: int
    half_width: float
    flagged: bool = False
    note: str = ""


@dataclass(frozen=True)
class _Context:
    params: SystemParams
    window: SimWindow
    dh2: float
    gd: GainDistribution


def _make_context(params: SystemParams, r_sim_scale: float) -> _Context:
    window = simulation_window(params, r_sim_scale=r_sim_scale)
    return _Context(params=params, window=window, dh2=params.delta_h ** 2,
                    gd=gain_distribution(params))


def _backhaul_link(ctx: _Context, rng: np.random.Generator,
                   d_h: np.ndarray) -> tuple[int, float]:
    """Tier and SINR of the mmWave link given donor horizontal distances."""
    p = ctx.params
    if d_h.size == 0:
        return 1, 0.0
    clear = rng.random(d_h.size) < los_probability(d_h, p)
    z = np.sqrt(d_h * d_h + ctx.dh2)
    path_gain = np.where(clear, p.c_l * z ** -p.eta_l, p.c_n * z ** -p.eta_n)
    srv = int(np.argmax(path_gain))
    fad = np.where(clear,
                   sample_fading(LinkKind.BACKHAUL_LOS, p, rng, d_h.size),
                   sample_fading(LinkKind.BACKHAUL_NLOS, p, rng, d_h.size))
    gains = sample_interferer_gain(ctx.gd, rng, d_h.size)
    rx = p.p_tb * path_gain * fad * gains
    rec = p.p_tb * path_gain[srv] * fad[srv] * ctx.gd.serving_gain
    interf = float(rx.sum() - rx[srv])
    sinr = rec / (p.sigma2 + interf)
    return (0 if clear[srv] else 1), float(sinr)


def _full_trial(ctx: _Context, rng: np.random.Generator) -> tuple[int, float, int, float]:
    p = ctx.params
    w = ctx.window
    bs = sample_ppp_disk(p.lambda_g, w.r_sample, rng)
    uav = sample_bpp_disk(p.n_uav, p.r_c, rng, center=(p.x_0, 0.0))

    bs_h = np.hypot(bs[:, 0], bs[:, 1])
    bs_h = bs_h[bs_h <= w.r_access]
    bs_pow = p.p_tg * (bs_h * bs_h + p.h_g ** 2) ** (-p.eta_g / 2.0)
    uav_d = np.hypot(np.hypot(uav[:, 0], uav[:, 1]), p.h_a)
    uav_pow = p.p_ta * uav_d ** -p.eta_a

    bs_fad = sample_fading(LinkKind.ACCESS_BS, p, rng, bs_pow.size)
    uav_fad = sample_fading(LinkKind.ACCESS_UAV, p, rng, uav_pow.size)
    bs_rx = bs_pow * bs_fad
    uav_rx = uav_pow * uav_fad

    best_bs = int(np.argmax(bs_pow)) if bs_pow.size else -1
    best_uav = int(np.argmax(uav_pow))
    ground_wins = best_bs >= 0 and bs_pow[best_bs] >= uav_pow[best_uav]

    rec = bs_rx[best_bs] if ground_wins else uav_rx[best_uav]
    interf = float(bs_rx.sum() + uav_rx.sum() - rec)
    sir = rec / interf if interf > 0.0 else math.inf

    if ground_wins:
        return 0, float(sir), -1, math.nan

    upos = uav[best_uav]
    d_h = np.hypot(bs[:, 0] - upos[0], bs[:, 1] - upos[1])
    bh_tier, sinr = _backhaul_link(ctx, rng, d_h[d_h <= w.r_backhaul])
    return 1, float(sir), bh_tier, sinr


def _center_trial(ctx: _Context, rng: np.random.Generator) -> tuple[int, float]:
    p = ctx.params
    bs = sample_ppp_disk(p.lambda_g, ctx.window.r_backhaul, rng)
    return _backhaul_link(ctx, rng, np.hypot(bs[:, 0], bs[:, 1]))


def run_trial(params: SystemParams, rng: np.random.Generator,
              *, r_sim_scale: float = 1.0) -> TrialOutcome:
    """Run one full trial on a caller-supplied generator."""
    ctx = _make_context(params, r_sim_scale)
    tier, sir, bh, sinr = _full_trial(ctx, rng)
    if tier == 0:
        return TrialOutcome(tier="bs", sir=sir, backhaul_tier=None, sinr=sinr)
    return TrialOutcome(tier="uav", sir=sir,
                        backhaul_tier="los" if bh == 0 else "nlos", sinr=sinr)


def _trial_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def _simulate_block(params: SystemParams, start: int, stop: int, seed: int,
                    mode: str, r_sim_scale: float):
    ctx = _make_context(params, r_sim_scale)
    n = stop - start
    tier = np.ones(n, dtype=np.int8)
    sir = np.full(n, np.nan)
    bh = np.full(n, -1, dtype=np.int8)
    sinr = np.full(n, np.nan)
    for k in range(n):
        rng = _trial_rng(seed, start + k)
        if mode == "full":
            tier[k], sir[k], bh[k], sinr[k] = _full_trial(ctx, rng)
        else:
            bh[k], sinr[k] = _center_trial(ctx, rng)
    return tier, sir, bh, sinr


def run_trials(params: SystemParams, n_trials: int, seed: int, *,
               mode: str = "full", jobs: int | None = None,
               r_sim_scale: float = 1.0) -> TrialData:
    """Run n_trials independent trials and return their columnar record."""
    validate(params)
    if mode not in _MODES:
        raise SimulationError(f"mode must be one of {_MODES}, got {mode!r}")
    if not isinstance(n_trials, int) or n_trials <= 0:
        raise SimulationError(f"n_trials must be a positive integer, got {n_trials!r}")
    if not isinstance(seed, int) or seed < 0:
        raise SimulationError(f"seed must be a nonnegative integer, got {seed!r}")
    simulation_window(params, r_sim_scale=r_sim_scale)  # fail fast on bad scale

    if jobs is None or jobs <= 1 or n_trials < 4:
        parts = [_simulate_block(params, 0, n_trials, seed, mode, r_sim_scale)]
    else:
        step = -(-n_trials // jobs)
        spans = [(i, min(i + step, n_trials)) for i in range(0, n_trials, step)]
        with ProcessPoolExecutor(max_workers=len(spans)) as pool:
            parts = list(pool.map(
                _simulate_block,
                [params] * len(spans),
                [a for a, _ in spans],
                [b for _, b in spans],
                [seed] * len(spans),
                [mode] * len(spans),
                [r_sim_scale] * len(spans),
            ))

    return TrialData(
        mode=mode,
        tier=np.concatenate([q[0] for q in parts]),
        sir=np.concatenate([q[1] for q in parts]),
        bh_tier=np.concatenate([q[2] for q in parts]),
        sinr=np.concatenate([q[3] for q in parts]),
    )


def _prop(success: np.ndarray, label: str) -> MetricEstimate:
    n = int(success.size)
    if n == 0:
        return MetricEstimate(value=math.nan, trials=0, half_width=math.nan,
                              flagged=True, note=f"no trials for {label}")
    v = float(np.mean(success))
    # Agresti-Coull width: a run with zero failures still carries ~z^2/n
    # of uncertainty, so boundary estimates keep an honest interval
    z2 = _CONFIDENCE * _CONFIDENCE
    vt = (v * n + 0.5 * z2) / (n + z2)
    hw = _CONFIDENCE * math.sqrt(vt * (1.0 - vt) / (n + z2))
    flagged = n < _MIN_CONDITIONAL_TRIALS
    return MetricEstimate(value=v, trials=n, half_width=hw, flagged=flagged,
                          note=f"only {n} trials" if flagged else "")


def _complement(est: MetricEstimate) -> MetricEstimate:
    value = math.nan if math.isnan(est.value) else 1.0 - est.value
    return MetricEstimate(value=value, trials=est.trials, half_width=est.half_width,
                          flagged=est.flagged, note=est.note)


def _thresholds(params: SystemParams, beta, tau_b) -> tuple[float, float]:
    beta = float(params.beta if beta is None else beta)
    tau = float(params.tau_b if tau_b is None else tau_b)
    if beta < 0.0 or tau < 0.0:
        raise SimulationError("thresholds must be nonnegative")
    return beta, tau


def metrics_from_trials(data: TrialData, params: SystemParams, *,
                        beta: float | None = None,
                        tau_b: float | None = None) -> dict[str, MetricEstimate]:
    """Apply thresholds to recorded trials; cheap enough to sweep repeatedly."""
    beta, tau = _thresholds(params, beta, tau_b)
    bh_ok = data.sinr > tau if tau > 0.0 else np.ones(data.sinr.size, dtype=bool)

    if data.mode == "center-uav":
        a_los = _prop(data.bh_tier == 0, "a_los")
        return {"a_los": a_los, "a_nlos": _complement(a_los),
                "s_backhaul": _prop(bh_ok, "s_backhaul")}

    uav = data.tier == 1
    covered = data.sir > beta
    a_g = _prop(~uav, "a_g")
    a_los = _prop(data.bh_tier[uav] == 0, "a_los")
    return {
        "a_g": a_g,
        "a_a": _complement(a_g),
        "p_cov_g": _prop(covered[~uav], "p_cov_g"),
        "p_cov_a": _prop(covered[uav], "p_cov_a"),
        "a_los": a_los,
        "a_nlos": _complement(a_los),
        "s_backhaul": _prop(bh_ok[uav], "s_backhaul"),
        "p_cov": _prop(np.where(uav, covered & bh_ok, covered), "p_cov"),
    }


def estimate_metrics(params: SystemParams, n_trials: int, seed: int, *,
                     mode: str = "full", jobs: int | None = None,
                     r_sim_scale: float = 1.0, beta: float | None = None,
                     tau_b: float | None = None) -> dict[str, MetricEstimate]:
    """Simulate and summarize in one step."""
    data = run_trials(params, n_trials, seed, mode=mode, jobs=jobs,
                      r_sim_scale=r_sim_scale)
    return metrics_from_trials(data, params, beta=beta, tau_b=tau_b)


def independence_gap_from_trials(data: TrialData, params: SystemParams, *,
                                 beta: float | None = None,
                                 tau_b: float | None = None) -> MetricEstimate:
    """|P(joint) - P(access)P(backhaul)| among aerial-tier trials.

    Measures how far the two conditional link successes are from factorizing;
    the analytic assembly multiplies them, so this is its model error probe.
    """
    if data.mode != "full":
        raise SimulationError("independence gap needs full-mode trials")
    beta, tau = _thresholds(params, beta, tau_b)
    uav = data.tier == 1
    n = int(uav.sum())
    if n == 0:
        return MetricEstimate(value=math.nan, trials=0, half_width=math.nan,
                              flagged=True, note="no aerial-tier trials")
    covered = data.sir[uav] > beta
    ok = data.sinr[uav] > tau if tau > 0.0 else np.ones(n, dtype=bool)
    p_joint = float(np.mean(covered & ok))
    p_cov = float(np.mean(covered))
    p_ok = float(np.mean(ok))
    gap = abs(p_joint - p_cov * p_ok)
    spread = (math.sqrt(p_joint * (1.0 - p_joint))
              + p_ok * math.sqrt(p_cov * (1.0 - p_cov))
              + p_cov * math.sqrt(p_ok * (1.0 - p_ok)))
    hw = _CONFIDENCE * spread / math.sqrt(n)
    flagged = n < _MIN_CONDITIONAL_TRIALS
    return MetricEstimate(value=gap, trials=n, half_width=hw, flagged=flagged,
                          note=f"only {n} trials" if flagged else "")


def independence_gap(params: SystemParams, n_trials: int, seed: int, *,
                     jobs: int | None = None, r_sim_scale: float = 1.0,
                     beta: float | None = None,
                     tau_b: float | None = None) -> MetricEstimate:
    """Simulate full trials and report the factorization gap."""
    data = run_trials(params, n_trials, seed, mode="full", jobs=jobs,
                      r_sim_scale=r_sim_scale)
    return independence_gap_from_trials(data, params, beta=beta, tau_b=tau_b)
