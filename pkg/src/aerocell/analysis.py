"""Closed-form layer: tier masses, interference transforms, coverage.

Everything here reduces to one-dimensional quadrature.  Conditional
expectations over the interferer fields are expressed through raw
(unnormalized) transforms so that the conditioning mass cancels against
the serving-distance density instead of being divided out numerically.
"""

from __future__ import annotations

import enum
import functools
import math
import threading
from dataclasses import dataclass, field

import numpy as np

from .channel import gain_distribution, los_probability
from .geometry import ExclusionKind, UavDistanceLaw, exclusion_radius
from .params import SystemParams, validate
from .quadrature import (
    _KRONROD_W,
    _NODES,
    Tolerance,
    integrate,
    integrate_semi_infinite,
)

__all__ = [
    "AnalysisError",
    "DegenerateTier",
    "InterferenceScenario",
    "AnalyticReport",
    "DEFAULT_TOL",
    "association_probabilities",
    "serving_distance_pdf",
    "interference_laplace",
    "uav_interference_derivatives",
    "conditional_coverage_bs",
    "conditional_coverage_uav",
    "backhaul_tier_mass",
    "backhaul_tier_probabilities",
    "backhaul_serving_distance_pdf",
    "backhaul_probability",
    "overall_coverage",
]

DEFAULT_TOL = Tolerance(rel=1e-7, abs=1e-10)
_TIER_FLOOR = 1e-12
_DENSITY_FLOOR = 1e-160
_EXP_CUTOFF = 745.0  # exp(-x) underflows past this
_MAX_SERIES_ORDER = 3  # derivative ladder depth, caps m_a at 4
_MAX_ALZER_SHAPE = 20  # binomial cancellation swamps the sum beyond this


class AnalysisError(ValueError):
    """Raised when an analytic routine is asked for something outside its domain."""


class DegenerateTier(AnalysisError):
    """Raised when a conditional quantity is requested for a tier of vanishing mass."""


class InterferenceScenario(enum.Enum):
    """Which interferer population, and which conditioning, a transform refers to."""

    BS_EXCEPT_SERVING = "bs_except_serving"
    UAVS_GIVEN_BS = "uavs_given_bs"
    ALL_BS_GIVEN_UAV = "all_bs_given_uav"
    UAVS_EXCEPT_SERVING = "uavs_except_serving"


def _resolve_tol(tol: Tolerance | None) -> Tolerance:
    return DEFAULT_TOL if tol is None else tol


def _tail_rate(m: int) -> float:
    """Exponent rate of the tight exponential bound on the unit-mean gamma ccdf."""
    return m * math.factorial(m) ** (-1.0 / m)


def _hit_probability(m: float, x):
    """1 - (1+x)^-m without cancellation for small x."""
    return -np.expm1(-m * np.log1p(x))


def _unit_interval(value: float, what: str) -> float:
    if not -1e-6 <= value <= 1.0 + 1e-6:
        raise AnalysisError(f"{what} out of range: {value!r}")
    return min(max(value, 0.0), 1.0)


def _tail_integral(f, lower: float, eta: float, tol: Tolerance) -> float:
    """Integrate f over [lower, inf) when f decays like t**(1-eta).

    The standard rational map leaves a (1-u)**(eta-3) factor that is singular
    for eta < 3; raising the map to kappa = 2/(eta-2) flattens the tail to a
    linear zero instead.  kappa is capped so intermediate powers stay finite;
    past the cap a mild endpoint singularity remains and costs panels, not
    correctness.
    """
    kappa = min(max(2.0 / (eta - 2.0), 1.0), 16.0)
    limit = np.nextafter(1.0, 0.0)

    def g(v):
        v = np.minimum(v, limit)
        om = 1.0 - v
        w = v / om
        t = lower + w ** kappa
        jac = kappa * w ** (kappa - 1.0) / (om * om)
        return np.asarray(f(t), dtype=float) * jac

    return integrate(g, 0.0, 1.0, tol).value


# --- access-tier association -------------------------------------------------


@functools.lru_cache(maxsize=64)
def _ground_tier_mass(params: SystemParams, tol: Tolerance) -> tuple[float, float]:
    """Probability that the strongest mean power comes from the ground process."""
    law = UavDistanceLaw(params)
    lam = params.lambda_g
    n = params.n_uav
    e_max = exclusion_radius(ExclusionKind.BS_GIVEN_UAV, params.w_max, params)
    if e_max <= 0.0:
        return 0.0, 0.0

    def f(r):
        e_g = exclusion_radius(ExclusionKind.UAV_GIVEN_BS, r, params)
        return (2.0 * math.pi * lam * r * np.exp(-math.pi * lam * r * r)
                * law.ccdf(e_g) ** n)

    bps = [exclusion_radius(ExclusionKind.BS_GIVEN_UAV, w, params)
           for w in (params.h_a, params.w_knee)]
    res = integrate(f, 0.0, e_max, tol, breakpoints=tuple(b for b in bps if b > 0.0))
    return min(max(res.value, 0.0), 1.0), res.error


def association_probabilities(
    params: SystemParams, tol: Tolerance | None = None,
) -> tuple[float, float]:
    """Return (ground, aerial) tier probabilities; they sum to one exactly."""
    validate(params)
    a_g, _ = _ground_tier_mass(params, _resolve_tol(tol))
    return a_g, 1.0 - a_g


def serving_distance_pdf(params: SystemParams, tier: str, x, tol: Tolerance | None = None):
    """Density of the serving-link distance conditioned on the given access tier."""
    validate(params)
    if tier not in ("bs", "uav"):
        raise AnalysisError(f"unknown access tier: {tier!r}")
    tol = _resolve_tol(tol)
    a_g, a_a = association_probabilities(params, tol)
    law = UavDistanceLaw(params)
    lam = params.lambda_g
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    xs = np.atleast_1d(arr)

    if tier == "bs":
        if a_g < _TIER_FLOOR:
            raise DegenerateTier("ground tier carries no probability mass")
        e_max = exclusion_radius(ExclusionKind.BS_GIVEN_UAV, params.w_max, params)
        e_g = exclusion_radius(ExclusionKind.UAV_GIVEN_BS, xs, params)
        out = (2.0 * math.pi * lam * xs * np.exp(-math.pi * lam * xs * xs)
               * law.ccdf(e_g) ** params.n_uav) / a_g
        out[(xs < 0.0) | (xs > e_max)] = 0.0
    else:
        if a_a < _TIER_FLOOR:
            raise DegenerateTier("aerial tier carries no probability mass")
        e_a = exclusion_radius(ExclusionKind.BS_GIVEN_UAV, xs, params)
        out = (params.n_uav * law.pdf(xs)
               * np.exp(-math.pi * lam * e_a ** 2)
               * law.ccdf(xs) ** (params.n_uav - 1)) / a_a

    return float(out[0]) if scalar else out


# --- interferer-field transforms ---------------------------------------------


def _ground_field_exponent(
    params: SystemParams, s: float, lower: float, tol: Tolerance, order: int = 0,
) -> float:
    """PGFL exponent of the ground field beyond `lower`, or its derivative in s."""
    if s == 0.0 and order == 0:
        return 0.0
    lam_coef = 2.0 * math.pi * params.lambda_g
    h2 = params.h_g ** 2
    expo = -params.eta_g / 2.0

    if order == 0:
        def f(z):
            sa = s * params.p_tg * (z * z + h2) ** expo
            return lam_coef * (sa / (1.0 + sa)) * z

        return _tail_integral(f, lower, params.eta_g, tol)

    def f(z):
        a_z = params.p_tg * (z * z + h2) ** expo
        return lam_coef * a_z ** order * z / (1.0 + s * a_z) ** (order + 1)

    sign = (-1.0) ** (order + 1) * math.factorial(order)
    return sign * _tail_integral(f, lower, params.eta_g, tol)


def _aerial_factor(
    params: SystemParams,
    law: UavDistanceLaw,
    s: float,
    lower: float,
    tol: Tolerance,
    order: int = 0,
) -> float:
    """Raw single-node transform over the tail of the distance law.

    Order k returns the k-th derivative in s, including its sign; order 0 is
    the plain (unnormalized) expectation, so dividing by ccdf(lower) recovers
    the conditional transform.
    """
    lo = max(lower, params.h_a)
    if lo >= params.w_max:
        return 0.0
    m = params.m_a

    def f(u):
        b = params.p_ta * u ** -params.eta_a / m
        return b ** order * (1.0 + s * b) ** -(m + order) * law.pdf(u)

    val = integrate(f, lo, params.w_max, tol, breakpoints=(params.w_knee,)).value
    coeff = 1.0
    for j in range(order):
        coeff *= -(m + j)
    return coeff * val


def interference_laplace(
    params: SystemParams,
    scenario: InterferenceScenario,
    s: float,
    serving_dist: float,
    tol: Tolerance | None = None,
) -> float:
    """Laplace transform of one interferer population at argument s.

    `serving_dist` is the serving-link distance fixing the exclusion region.
    """
    validate(params)
    tol = _resolve_tol(tol)
    s = float(s)
    if s < 0.0:
        raise AnalysisError("transform argument must be nonnegative")
    if serving_dist < 0.0:
        raise AnalysisError("serving distance must be nonnegative")
    if s == 0.0:
        return 1.0

    if scenario is InterferenceScenario.BS_EXCEPT_SERVING:
        return math.exp(-_ground_field_exponent(params, s, serving_dist, tol))
    if scenario is InterferenceScenario.ALL_BS_GIVEN_UAV:
        lower = exclusion_radius(ExclusionKind.BS_GIVEN_UAV, serving_dist, params)
        return math.exp(-_ground_field_exponent(params, s, lower, tol))

    if scenario is InterferenceScenario.UAVS_GIVEN_BS:
        lo = exclusion_radius(ExclusionKind.UAV_GIVEN_BS, serving_dist, params)
        power = params.n_uav
    elif scenario is InterferenceScenario.UAVS_EXCEPT_SERVING:
        lo = serving_dist
        power = params.n_uav - 1
    else:
        raise AnalysisError(f"unknown interference scenario: {scenario!r}")

    if power == 0:
        return 1.0
    law = UavDistanceLaw(params)
    lo = max(lo, params.h_a)
    tail = law.ccdf(lo)
    if tail <= 0.0:
        return 1.0
    j = _aerial_factor(params, law, s, lo, tol) / tail
    return min(j, 1.0) ** power


def _order_tol(tol: Tolerance, scale: float, s: float, k: int) -> Tolerance:
    # A k-th derivative in s lives at magnitude ~ scale / s**k; an absolute
    # floor sized for the order-0 integral would let the adaptive rule accept
    # pure noise there, so shrink it accordingly (never loosen).
    cap = tol.rel * scale / (1.0 + s) ** k
    return Tolerance(tol.rel, min(tol.abs, cap), tol.max_depth)


def _product_derivatives(
    params: SystemParams,
    law: UavDistanceLaw,
    x: float,
    s: float,
    kmax: int,
    tol: Tolerance,
) -> np.ndarray:
    """Derivatives 0..kmax of the full interference transform seen from a
    serving node at distance x: ground field beyond the access exclusion
    times the raw transform of the remaining aerial nodes."""
    lower_bs = exclusion_radius(ExclusionKind.BS_GIVEN_UAV, x, params)
    g = [_ground_field_exponent(params, s, lower_bs, tol)]
    g += [_ground_field_exponent(params, s, lower_bs,
                                 _order_tol(tol, abs(g[0]), s, k), order=k)
          for k in range(1, kmax + 1)]
    L = [math.exp(-g[0])]
    if kmax >= 1:
        L.append(-g[1] * L[0])
    if kmax >= 2:
        L.append(-g[2] * L[0] - g[1] * L[1])
    if kmax >= 3:
        L.append(-g[3] * L[0] - 2.0 * g[2] * L[1] - g[1] * L[2])

    p = params.n_uav - 1
    if p == 0:
        M = [1.0, 0.0, 0.0, 0.0]
    else:
        J = [_aerial_factor(params, law, s, x, tol)]
        J += [_aerial_factor(params, law, s, x,
                             _order_tol(tol, abs(J[0]), s, k), order=k)
              for k in range(1, kmax + 1)]
        M = [J[0] ** p]
        if kmax >= 1:
            M.append(p * J[0] ** (p - 1) * J[1] if p >= 1 else 0.0)
        if kmax >= 2:
            m2 = p * J[0] ** (p - 1) * J[2]
            if p >= 2:
                m2 += p * (p - 1) * J[0] ** (p - 2) * J[1] ** 2
            M.append(m2)
        if kmax >= 3:
            m3 = p * J[0] ** (p - 1) * J[3]
            if p >= 2:
                m3 += 3.0 * p * (p - 1) * J[0] ** (p - 2) * J[1] * J[2]
            if p >= 3:
                m3 += p * (p - 1) * (p - 2) * J[0] ** (p - 3) * J[1] ** 3
            M.append(m3)

    T = [L[0] * M[0]]
    if kmax >= 1:
        T.append(L[1] * M[0] + L[0] * M[1])
    if kmax >= 2:
        T.append(L[2] * M[0] + 2.0 * L[1] * M[1] + L[0] * M[2])
    if kmax >= 3:
        T.append(L[3] * M[0] + 3.0 * L[2] * M[1] + 3.0 * L[1] * M[2] + L[0] * M[3])
    return np.array(T[: kmax + 1])


def uav_interference_derivatives(
    params: SystemParams,
    x: float,
    s: float,
    max_order: int,
    tol: Tolerance | None = None,
) -> np.ndarray:
    """Transform of the total interference at a served aerial node and its
    first `max_order` derivatives in s, as an array of length max_order+1."""
    validate(params)
    if not 0 <= max_order <= _MAX_SERIES_ORDER:
        raise AnalysisError(
            f"derivative order must lie in [0, {_MAX_SERIES_ORDER}], got {max_order}")
    if s < 0.0:
        raise AnalysisError("transform argument must be nonnegative")
    law = UavDistanceLaw(params)
    return _product_derivatives(params, law, float(x), float(s), max_order,
                                _resolve_tol(tol))


# --- conditional access coverage ---------------------------------------------


def _ground_coverage_mass(
    params: SystemParams, beta: float, tol: Tolerance,
) -> tuple[float, float]:
    """Joint mass P(ground tier, SIR > beta); divide by the tier mass to condition."""
    law = UavDistanceLaw(params)
    lam = params.lambda_g
    n = params.n_uav
    inner = tol.tighter(10.0)
    e_max = exclusion_radius(ExclusionKind.BS_GIVEN_UAV, params.w_max, params)
    if e_max <= 0.0:
        return 0.0, 0.0
    h2 = params.h_g ** 2

    def f(rs):
        out = np.zeros(rs.shape)
        gauss = 2.0 * math.pi * lam * rs * np.exp(-math.pi * lam * rs * rs)
        e_gs = exclusion_radius(ExclusionKind.UAV_GIVEN_BS, rs, params)
        for i, r in enumerate(rs):
            s1 = beta * (r * r + h2) ** (params.eta_g / 2.0) / params.p_tg
            expo = _ground_field_exponent(params, s1, float(r), inner)
            j = _aerial_factor(params, law, s1, float(e_gs[i]), inner)
            out[i] = gauss[i] * math.exp(-expo) * j ** n
        return out

    bps = tuple(
        b for b in (exclusion_radius(ExclusionKind.BS_GIVEN_UAV, w, params)
                    for w in (params.h_a, params.w_knee))
        if b > 0.0)
    res = integrate(f, 0.0, e_max, tol, breakpoints=bps)
    return res.value, res.error


def conditional_coverage_bs(
    params: SystemParams, beta: float | None = None, tol: Tolerance | None = None,
) -> float:
    """P(access SIR > beta | served by a ground station)."""
    validate(params)
    tol = _resolve_tol(tol)
    beta = float(params.beta if beta is None else beta)
    if beta < 0.0:
        raise AnalysisError("access threshold must be nonnegative")
    if beta == 0.0:
        return 1.0
    a_g, _ = _ground_tier_mass(params, tol)
    if a_g < _TIER_FLOOR:
        raise DegenerateTier("ground tier carries no probability mass")
    mass, _ = _ground_coverage_mass(params, beta, tol)
    return _unit_interval(mass / a_g, "ground coverage")


def _aerial_coverage_mass(
    params: SystemParams, beta: float, tol: Tolerance,
) -> tuple[float, float]:
    """Joint mass P(aerial tier, SIR > beta)."""
    law = UavDistanceLaw(params)
    lam = params.lambda_g
    kmax = params.m_a - 1
    inner = tol.tighter(10.0)
    factorials = [math.factorial(k) for k in range(kmax + 1)]

    def f(xs):
        out = np.zeros(xs.shape)
        pdfs = law.pdf(xs)
        e_as = exclusion_radius(ExclusionKind.BS_GIVEN_UAV, xs, params)
        void = np.exp(-math.pi * lam * e_as ** 2)
        for i, x in enumerate(xs):
            if pdfs[i] <= 0.0:
                continue
            s2 = params.m_a * beta * float(x) ** params.eta_a / params.p_ta
            T = _product_derivatives(params, law, float(x), s2, kmax, inner)
            acc = 0.0
            for k in range(kmax + 1):
                acc += (-s2) ** k / factorials[k] * T[k]
            out[i] = params.n_uav * pdfs[i] * void[i] * acc
        return out

    res = integrate(f, params.h_a, params.w_max, tol, breakpoints=(params.w_knee,))
    return res.value, res.error


def conditional_coverage_uav(
    params: SystemParams, beta: float | None = None, tol: Tolerance | None = None,
) -> float:
    """P(access SIR > beta | served by an aerial node)."""
    validate(params)
    tol = _resolve_tol(tol)
    beta = float(params.beta if beta is None else beta)
    if beta < 0.0:
        raise AnalysisError("access threshold must be nonnegative")
    if beta == 0.0:
        return 1.0
    if params.m_a - 1 > _MAX_SERIES_ORDER:
        raise AnalysisError(
            f"aerial fading shape above {_MAX_SERIES_ORDER + 1} exceeds the "
            "derivative ladder")
    a_g, _ = _ground_tier_mass(params, tol)
    a_a = 1.0 - a_g
    if a_a < _TIER_FLOOR:
        raise DegenerateTier("aerial tier carries no probability mass")
    mass, _ = _aerial_coverage_mass(params, beta, tol)
    return _unit_interval(mass / a_a, "aerial coverage")


# --- backhaul ----------------------------------------------------------------


class _RadialMeasure:
    """Cumulative intensity coef * integral_0^r w(t) t dt with cached panels.

    The grid grows geometrically and each panel holds a fixed 15-point rule;
    the weight functions here are smooth sigmoids, so per-panel error is at
    rounding level while queries stay O(log n) plus one partial panel.
    """

    _GROWTH = 1.06

    def __init__(self, weight, coef: float):
        self._weight = weight
        self._coef = coef
        self._edges = [0.0, 1.0]
        self._cum = [0.0, self._panel(0.0, 1.0)]
        self._grow = threading.Lock()

    def _panel(self, a: float, b: float) -> float:
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        t = mid + half * _NODES
        return half * float(np.dot(self._coef * self._weight(t) * t, _KRONROD_W))

    def _extend(self, r: float) -> None:
        # Instances are shared through the _blockage_measures cache; growth
        # must be serialized.  Readers stay lock-free: _cum is appended before
        # _edges, so an index found in _edges is always valid in _cum.
        with self._grow:
            while self._edges[-1] < r:
                nxt = self._edges[-1] * self._GROWTH
                self._cum.append(self._cum[-1] + self._panel(self._edges[-1], nxt))
                self._edges.append(nxt)

    def __call__(self, r):
        arr = np.asarray(r, dtype=float)
        scalar = arr.ndim == 0
        rr = np.clip(np.atleast_1d(arr), 0.0, None)
        if rr.size == 0:
            return rr.copy()
        self._extend(float(rr.max()))
        edges = np.asarray(self._edges)
        cum = np.asarray(self._cum)
        j = np.searchsorted(edges, rr, side="right") - 1
        lo = edges[j]
        mid, half = 0.5 * (rr + lo), 0.5 * (rr - lo)
        t = mid[:, None] + half[:, None] * _NODES[None, :]
        vals = (self._coef * self._weight(t.ravel()) * t.ravel()).reshape(t.shape)
        out = cum[j] + half * (vals @ _KRONROD_W)
        return float(out[0]) if scalar else out


def _exclusion_onset(params: SystemParams, kind: ExclusionKind) -> float | None:
    """Distance where the cross-tier exclusion radius leaves zero, if any."""
    dh2 = params.delta_h ** 2
    if dh2 == 0.0:
        return None
    if kind is ExclusionKind.NLOS_GIVEN_LOS:
        ratio = (params.c_l / params.c_n) ** (2.0 / params.eta_n)
        expo = params.eta_n / params.eta_l
    else:
        ratio = (params.c_n / params.c_l) ** (2.0 / params.eta_l)
        expo = params.eta_l / params.eta_n
    v = (dh2 * ratio) ** expo - dh2
    return math.sqrt(v) if v > 0.0 else None


def _clear_cut_radius(params: SystemParams) -> float:
    """Beyond this the clear-path void probability underflows exp()."""
    floor = los_probability(1e300, params)
    if floor <= 0.0:
        return math.inf
    return math.sqrt(_EXP_CUTOFF / (math.pi * params.lambda_g * floor))


def _blocked_cut_radius(params: SystemParams) -> float:
    s_q = 10.0 * params.delta_h + 100.0
    q = 1.0 - los_probability(s_q, params)
    if q < 1e-6:
        return math.inf
    return math.sqrt(_EXP_CUTOFF / (math.pi * params.lambda_g * q) + s_q * s_q)


def _clear_density_raw(params, xs, los_m, nlos_m, cut):
    """Unnormalized density of the nearest clear-path station winning at xs."""
    out = np.zeros(xs.shape)
    live = (xs >= 0.0) & (xs <= cut)
    if not live.any():
        return out
    x = xs[live]
    e_l = exclusion_radius(ExclusionKind.NLOS_GIVEN_LOS, x, params)
    lam_coef = 2.0 * math.pi * params.lambda_g
    out[live] = (lam_coef * x * los_probability(x, params)
                 * np.exp(-los_m(x) - nlos_m(e_l)))
    return out


def _blocked_density_raw(params, xs, los_m, nlos_m, cut):
    """Unnormalized density of the nearest blocked-path station winning at xs."""
    out = np.zeros(xs.shape)
    live = (xs >= 0.0) & (xs <= cut)
    if not live.any():
        return out
    x = xs[live]
    e_n = exclusion_radius(ExclusionKind.LOS_GIVEN_NLOS, x, params)
    lam_coef = 2.0 * math.pi * params.lambda_g
    out[live] = (lam_coef * x * (1.0 - los_probability(x, params))
                 * np.exp(-nlos_m(x) - los_m(e_n)))
    return out


@functools.lru_cache(maxsize=16)
def _blockage_measures(params: SystemParams) -> tuple[_RadialMeasure, _RadialMeasure]:
    lam_coef = 2.0 * math.pi * params.lambda_g
    los_m = _RadialMeasure(lambda t: los_probability(t, params), lam_coef)
    nlos_m = _RadialMeasure(lambda t: 1.0 - los_probability(t, params), lam_coef)
    return los_m, nlos_m


@functools.lru_cache(maxsize=64)
def _tier_mass(params: SystemParams, tier: str, tol: Tolerance) -> tuple[float, float]:
    los_m, nlos_m = _blockage_measures(params)
    if tier == "los":
        cut = _clear_cut_radius(params)
        bp = _exclusion_onset(params, ExclusionKind.NLOS_GIVEN_LOS)

        def f(xs):
            return _clear_density_raw(params, xs, los_m, nlos_m, cut)
    elif tier == "nlos":
        cut = _blocked_cut_radius(params)
        bp = _exclusion_onset(params, ExclusionKind.LOS_GIVEN_NLOS)

        def f(xs):
            return _blocked_density_raw(params, xs, los_m, nlos_m, cut)
    else:
        raise AnalysisError(f"unknown backhaul tier: {tier!r}")

    res = integrate_semi_infinite(f, 0.0, tol,
                                  breakpoints=() if bp is None else (bp,))
    return min(max(res.value, 0.0), 1.0), res.error


def backhaul_tier_mass(params: SystemParams, tier: str, tol: Tolerance | None = None) -> float:
    """Probability that the min-path-loss backhaul association lands in `tier`."""
    validate(params)
    return _tier_mass(params, tier, _resolve_tol(tol))[0]


def backhaul_tier_probabilities(
    params: SystemParams, tol: Tolerance | None = None,
) -> tuple[float, float]:
    """Return (clear, blocked) association probabilities; exact complements."""
    validate(params)
    a_los = _tier_mass(params, "los", _resolve_tol(tol))[0]
    return a_los, 1.0 - a_los


def backhaul_serving_distance_pdf(
    params: SystemParams, tier: str, x, tol: Tolerance | None = None,
):
    """Density of the backhaul serving distance conditioned on the tier."""
    validate(params)
    tol = _resolve_tol(tol)
    mass, _ = _tier_mass(params, tier, tol)
    if mass < _TIER_FLOOR:
        raise DegenerateTier(f"backhaul tier {tier!r} carries no probability mass")
    los_m, nlos_m = _blockage_measures(params)
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    xs = np.atleast_1d(arr)
    if tier == "los":
        out = _clear_density_raw(params, xs, los_m, nlos_m, _clear_cut_radius(params))
    else:
        out = _blocked_density_raw(params, xs, los_m, nlos_m, _blocked_cut_radius(params))
    out = out / mass
    return float(out[0]) if scalar else out


def _backhaul_success_mass(
    params: SystemParams, tau: float, tol: Tolerance,
) -> tuple[float, float]:
    """P(backhaul SINR > tau), marginalized over both tiers."""
    if max(params.m_l, params.m_n) > _MAX_ALZER_SHAPE:
        raise AnalysisError(
            f"backhaul fading shapes above {_MAX_ALZER_SHAPE} lose precision "
            "in the alternating sum")
    inner = tol.tighter(10.0)
    gd = gain_distribution(params)
    gbar = gd.gains / gd.serving_gain
    pk = gd.probs
    lam_coef = 2.0 * math.pi * params.lambda_g
    dh2 = params.delta_h ** 2
    los_m, nlos_m = _blockage_measures(params)
    gam_l = _tail_rate(params.m_l)
    gam_n = _tail_rate(params.m_n)
    noise = params.sigma2 / (params.p_tb * gd.serving_gain)

    def field_exponent(clear: bool, m_int: int, eta_int: float, coefs, lower: float) -> float:
        def f(ts):
            zt = (ts * ts + dh2) ** (eta_int / 2.0)
            hit = _hit_probability(m_int, coefs[:, None] / zt[None, :])
            kern = los_probability(ts, params)
            if not clear:
                kern = 1.0 - kern
            return lam_coef * (pk @ hit) * kern * ts

        return _tail_integral(f, max(lower, 0.0), eta_int, inner)

    cut_l = _clear_cut_radius(params)
    cut_n = _blocked_cut_radius(params)

    def clear_integrand(xs):
        out = np.zeros(xs.shape)
        dens = _clear_density_raw(params, xs, los_m, nlos_m, cut_l)
        for i in np.flatnonzero(dens > _DENSITY_FLOOR):
            x = float(xs[i])
            zp = (x * x + dh2) ** (params.eta_l / 2.0)
            e_l = float(exclusion_radius(ExclusionKind.NLOS_GIVEN_LOS, x, params))
            snr1 = gam_l * tau * zp * noise / params.c_l
            acc = 0.0
            for n in range(1, params.m_l + 1):
                own = field_exponent(
                    True, params.m_l, params.eta_l,
                    n * gam_l * tau * gbar * zp / params.m_l, x)
                cross = field_exponent(
                    False, params.m_n, params.eta_n,
                    n * gam_l * tau * gbar * zp * params.c_n / (params.c_l * params.m_n),
                    e_l)
                acc += ((-1.0) ** (n + 1) * math.comb(params.m_l, n)
                        * math.exp(-n * snr1 - own - cross))
            out[i] = dens[i] * acc
        return out

    def blocked_integrand(xs):
        out = np.zeros(xs.shape)
        dens = _blocked_density_raw(params, xs, los_m, nlos_m, cut_n)
        for i in np.flatnonzero(dens > _DENSITY_FLOOR):
            x = float(xs[i])
            zp = (x * x + dh2) ** (params.eta_n / 2.0)
            e_n = float(exclusion_radius(ExclusionKind.LOS_GIVEN_NLOS, x, params))
            snr1 = gam_n * tau * zp * noise / params.c_n
            acc = 0.0
            for n in range(1, params.m_n + 1):
                own = field_exponent(
                    False, params.m_n, params.eta_n,
                    n * gam_n * tau * gbar * zp / params.m_n, x)
                cross = field_exponent(
                    True, params.m_l, params.eta_l,
                    n * gam_n * tau * gbar * zp * params.c_l / (params.c_n * params.m_l),
                    e_n)
                acc += ((-1.0) ** (n + 1) * math.comb(params.m_n, n)
                        * math.exp(-n * snr1 - own - cross))
            out[i] = dens[i] * acc
        return out

    bp_l = _exclusion_onset(params, ExclusionKind.NLOS_GIVEN_LOS)
    bp_n = _exclusion_onset(params, ExclusionKind.LOS_GIVEN_NLOS)
    res_l = integrate_semi_infinite(clear_integrand, 0.0, tol,
                                    breakpoints=() if bp_l is None else (bp_l,))
    res_n = integrate_semi_infinite(blocked_integrand, 0.0, tol,
                                    breakpoints=() if bp_n is None else (bp_n,))
    return res_l.value + res_n.value, res_l.error + res_n.error


def backhaul_probability(
    params: SystemParams, tau: float | None = None, tol: Tolerance | None = None,
) -> float:
    """P(backhaul SINR > tau) under the Alzer exponential bound on the fading ccdf."""
    validate(params)
    tau = float(params.tau_b if tau is None else tau)
    if tau < 0.0:
        raise AnalysisError("backhaul threshold must be nonnegative")
    if tau == 0.0:
        return 1.0
    mass, _ = _backhaul_success_mass(params, tau, _resolve_tol(tol))
    return _unit_interval(mass, "backhaul success probability")


# --- top-level assembly ------------------------------------------------------


@dataclass(frozen=True)
class AnalyticReport:
    """All analytic outputs for one parameter point.

    Conditional coverages of tiers with vanishing mass are NaN; their terms
    are dropped from the overall probability.  `errors` holds quadrature
    error bounds propagated linearly to each reported field.
    """

    a_g: float
    a_a: float
    a_los: float
    a_nlos: float
    s_backhaul: float
    p_cov_g: float
    p_cov_a: float
    p_cov: float
    beta: float
    tau_b: float
    errors: dict[str, float] = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = {name: getattr(self, name)
             for name in ("a_g", "a_a", "a_los", "a_nlos", "s_backhaul",
                          "p_cov_g", "p_cov_a", "p_cov", "beta", "tau_b")}
        d["errors"] = dict(self.errors)
        return d


def overall_coverage(
    params: SystemParams,
    beta: float | None = None,
    tau_b: float | None = None,
    tol: Tolerance | None = None,
) -> AnalyticReport:
    """Evaluate every analytic quantity once and assemble the joint coverage."""
    validate(params)
    tol = _resolve_tol(tol)
    beta = float(params.beta if beta is None else beta)
    tau = float(params.tau_b if tau_b is None else tau_b)
    if beta < 0.0:
        raise AnalysisError("access threshold must be nonnegative")
    if tau < 0.0:
        raise AnalysisError("backhaul threshold must be nonnegative")

    g_mass, g_err = _ground_tier_mass(params, tol)
    a_g = g_mass
    a_a = 1.0 - a_g

    l_mass, l_err = _tier_mass(params, "los", tol)
    a_los = l_mass
    a_nlos = 1.0 - a_los

    if tau == 0.0:
        s_bh, s_err = 1.0, 0.0
    else:
        s_raw, s_err = _backhaul_success_mass(params, tau, tol)
        s_bh = _unit_interval(s_raw, "backhaul success probability")

    if beta == 0.0:
        p_g, pg_err = 1.0, 0.0
    elif a_g < _TIER_FLOOR:
        p_g, pg_err = math.nan, 0.0
    else:
        num, num_err = _ground_coverage_mass(params, beta, tol)
        p_g = _unit_interval(num / a_g, "ground coverage")
        pg_err = (num_err + p_g * g_err) / a_g

    if beta == 0.0:
        p_a, pa_err = 1.0, 0.0
    elif a_a < _TIER_FLOOR:
        p_a, pa_err = math.nan, 0.0
    else:
        if params.m_a - 1 > _MAX_SERIES_ORDER:
            raise AnalysisError(
                f"aerial fading shape above {_MAX_SERIES_ORDER + 1} exceeds the "
                "derivative ladder")
        num, num_err = _aerial_coverage_mass(params, beta, tol)
        p_a = _unit_interval(num / a_a, "aerial coverage")
        pa_err = (num_err + p_a * g_err) / a_a

    dead_g = math.isnan(p_g)
    dead_a = math.isnan(p_a)
    if not dead_g and not dead_a:
        p_cov = a_g * p_g + a_a * p_a * s_bh
    elif dead_g and not dead_a:
        p_cov = a_a * p_a * s_bh
    elif dead_a and not dead_g:
        p_cov = a_g * p_g
    else:
        p_cov = math.nan

    cov_err = 0.0
    if not dead_g:
        cov_err += a_g * pg_err + p_g * g_err
    if not dead_a:
        cov_err += a_a * (pa_err * s_bh + p_a * s_err) + p_a * s_bh * g_err

    errors = {
        "a_g": g_err,
        "a_los": l_err,
        "s_backhaul": s_err,
        "p_cov_g": pg_err,
        "p_cov_a": pa_err,
        "p_cov": cov_err,
    }
    return AnalyticReport(
        a_g=a_g, a_a=a_a, a_los=a_los, a_nlos=a_nlos, s_backhaul=s_bh,
        p_cov_g=p_g, p_cov_a=p_a, p_cov=p_cov, beta=beta, tau_b=tau,
        errors=errors)
