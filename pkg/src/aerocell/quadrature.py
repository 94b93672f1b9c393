"""Adaptive quadrature and finite-difference differentiation.

Integrators use an embedded Gauss-Kronrod 7/15 pair with worst-interval
bisection.  Integrands must be vectorized: they receive a float ndarray of
abscissae and return a same-shape ndarray.  Endpoints are never evaluated
(all Kronrod nodes are interior), so integrable endpoint singularities are
tolerated.

Semi-infinite ranges are folded onto (0, 1) with t = a + u/(1-u).

``derivative`` uses central differences with a relative step tied to machine
epsilon, Richardson-extrapolated once; the function there is scalar-valued.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

__all__ = [
    "Tolerance",
    "IntegralResult",
    "QuadratureError",
    "NonConvergence",
    "NonFiniteEvaluation",
    "integrate",
    "integrate_semi_infinite",
    "derivative",
]


@dataclass(frozen=True)
class Tolerance:
    rel: float = 1e-8
    abs: float = 1e-12
    max_depth: int = 60

    def tighter(self, factor: float = 10.0) -> "Tolerance":
        """Tolerance for inner integrals of a nested pair."""
        return Tolerance(self.rel / factor, self.abs / factor, self.max_depth)


@dataclass(frozen=True)
class IntegralResult:
    value: float
    error: float


class QuadratureError(Exception):
    pass


class NonConvergence(QuadratureError):
    def __init__(self, value: float, error: float, message: str):
        self.value = value
        self.error = error
        super().__init__(f"{message} (best estimate {value!r}, error {error!r})")


class NonFiniteEvaluation(QuadratureError):
    def __init__(self, x: float):
        self.x = x
        super().__init__(f"integrand returned a non-finite value at x={x!r}")


# Gauss-Kronrod 7/15 nodes and weights (positive half; node 0 last).
_XGK = np.array([
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0,
])
_WGK = np.array([
    0.0229353220105292, 0.0630920926299785, 0.1047900103222502,
    0.1406532597155259, 0.1690047266392679, 0.1903505780647854,
    0.2044329400752989, 0.2094821410847278,
])
_WG = np.array([
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
    0.4179591836734694,
])

# full symmetric 15-point arrays on [-1, 1]
_NODES = np.concatenate([-_XGK[:7], _XGK[7:8], _XGK[6::-1]])
_KRONROD_W = np.concatenate([_WGK[:7], _WGK[7:8], _WGK[6::-1]])
_GAUSS_W = np.zeros(15)
_GAUSS_W[1:14:2] = np.concatenate([_WG[:3], _WG[3:4], _WG[2::-1]])

_MAX_PANELS = 20_000


def _eval_panel(f, a: float, b: float):
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    xs = mid + half * _NODES
    fx = np.asarray(f(xs), dtype=float)
    if fx.shape != xs.shape:
        raise QuadratureError(
            f"integrand must be vectorized: got shape {fx.shape} for input {xs.shape}")
    finite = np.isfinite(fx)
    if not finite.all():
        raise NonFiniteEvaluation(float(xs[np.argmin(finite)]))
    k = half * float(_KRONROD_W @ fx)
    g = half * float(_GAUSS_W @ fx)
    err = max(abs(k - g), abs(k) * 5e-16)
    return k, err


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: Tolerance | None = None,
    *,
    breakpoints: Iterable[float] = (),
) -> IntegralResult:
    """Integrate a vectorized f over [a, b] to the requested tolerance.

    Returns the value and an error estimate that is conservative on smooth
    integrands.  Raises NonConvergence when bisection depth or the panel
    budget is exhausted before the tolerance is met, NonFiniteEvaluation if
    the integrand produces nan/inf.
    """
    tol = tol or Tolerance()
    if a == b:
        return IntegralResult(0.0, 0.0)
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0

    cuts = sorted({float(c) for c in breakpoints if a < c < b})
    edges = [a, *cuts, b]

    heap: list[tuple[float, int, float, float, float, float, int]] = []
    seq = 0
    total_val = 0.0
    total_err = 0.0
    frozen_val = 0.0
    frozen_err = 0.0
    n_panels = 0

    def push(lo: float, hi: float, depth: int) -> None:
        nonlocal seq, total_val, total_err, n_panels
        val, err = _eval_panel(f, lo, hi)
        total_val += val
        total_err += err
        heapq.heappush(heap, (-err, seq, lo, hi, val, err, depth))
        seq += 1
        n_panels += 1

    for lo, hi in zip(edges[:-1], edges[1:]):
        push(lo, hi, 0)

    while total_err > max(tol.abs, tol.rel * abs(total_val)):
        if not heap or n_panels >= _MAX_PANELS:
            return _non_convergence(sign, total_val, total_err)
        _, _, lo, hi, val, err, depth = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if depth >= tol.max_depth or mid <= lo or mid >= hi:
            # cannot refine further: freeze this panel's contribution
            frozen_val += val
            frozen_err += err
            if frozen_err > max(tol.abs, tol.rel * abs(total_val)):
                return _non_convergence(sign, total_val, total_err)
            continue
        total_val -= val
        total_err -= err
        push(lo, mid, depth + 1)
        push(mid, hi, depth + 1)

    return IntegralResult(sign * total_val, total_err)


def _non_convergence(sign: float, value: float, error: float) -> IntegralResult:
    raise NonConvergence(sign * value, error, "quadrature failed to converge")


def integrate_semi_infinite(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    tol: Tolerance | None = None,
    *,
    breakpoints: Iterable[float] = (),
) -> IntegralResult:
    """Integrate a vectorized f over [a, inf) via t = a + u/(1-u)."""
    limit = np.nextafter(1.0, 0.0)  # deep panels can round a node onto u=1

    def g(u: np.ndarray) -> np.ndarray:
        u = np.minimum(u, limit)
        om = 1.0 - u
        t = a + u / om
        return np.asarray(f(t), dtype=float) / (om * om)

    cuts = [(c - a) / (1.0 + (c - a)) for c in breakpoints if c > a]
    return integrate(g, 0.0, 1.0, tol, breakpoints=cuts)


_STENCILS: dict[int, tuple[tuple[float, ...], tuple[float, ...], int]] = {
    # order: (offsets in units of h, coefficients, power of h in denominator)
    1: ((1.0, -1.0), (0.5, -0.5), 1),
    2: ((1.0, 0.0, -1.0), (1.0, -2.0, 1.0), 2),
    3: ((2.0, 1.0, -1.0, -2.0), (0.5, -1.0, 1.0, -0.5), 3),
    4: ((2.0, 1.0, 0.0, -1.0, -2.0), (1.0, -4.0, 6.0, -4.0, 1.0), 4),
}


def derivative(f: Callable[[float], float], s: float, k: int) -> float:
    """k-th derivative of scalar f at s by central differences (k = 0..4).

    Step h = max(|s|, 1) * eps**(1/(k+2)); one Richardson extrapolation of
    the O(h^2) central-difference error.
    """
    if not isinstance(k, int) or not 0 <= k <= 4:
        raise ValueError(f"derivative order must be an integer in 0..4, got {k!r}")
    if k == 0:
        return float(f(s))
    eps = float(np.finfo(float).eps)
    h = max(abs(s), 1.0) * eps ** (1.0 / (k + 2))

    offsets, coeffs, power = _STENCILS[k]

    def d(step: float) -> float:
        acc = 0.0
        for off, c in zip(offsets, coeffs):
            acc += c * float(f(s + off * step))
        return acc / step ** power

    d1 = d(h)
    d2 = d(h / 2.0)
    return (4.0 * d2 - d1) / 3.0
