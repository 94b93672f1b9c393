"""Spatial layer: point-process samplers, UAV distance laws, exclusion radii.

Conventions: terrestrial stations live on the ground plane and are indexed by
horizontal distance from the receiver; aerial stations are indexed by 3-D
distance.  All lengths in metres.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from .params import SystemParams

TWO_PI = 2.0 * math.pi


class GeometryError(ValueError):
    """Invalid geometric configuration or sampler argument."""


class DegenerateSupport(GeometryError):
    """A conditional distance law was requested on an empty support."""


def _uniform_disk(n: int, radius: float, rng: np.random.Generator,
                  center: tuple[float, float]) -> np.ndarray:
    # r = R * sqrt(U) gives area-uniform radii
    r = radius * np.sqrt(rng.random(n))
    phi = TWO_PI * rng.random(n)
    pts = np.empty((n, 2))
    pts[:, 0] = center[0] + r * np.cos(phi)
    pts[:, 1] = center[1] + r * np.sin(phi)
    return pts


def sample_ppp_disk(density: float, radius: float, rng: np.random.Generator,
                    center: tuple[float, float] = (0.0, 0.0)) -> np.ndarray:
    """Draw one Poisson point process realization on a disk.

    Returns an (n, 2) array of planar coordinates; n is Poisson with mean
    density * pi * radius**2.
    """
    if not (density >= 0.0 and math.isfinite(density)):
        raise GeometryError(f"density must be finite and >= 0, got {density}")
    if not (radius > 0.0 and math.isfinite(radius)):
        raise GeometryError(f"radius must be finite and > 0, got {radius}")
    n = int(rng.poisson(density * math.pi * radius * radius))
    return _uniform_disk(n, radius, rng, center)


def sample_bpp_disk(n: int, radius: float, rng: np.random.Generator,
                    center: tuple[float, float] = (0.0, 0.0)) -> np.ndarray:
    """Draw exactly n points uniformly on a disk; returns an (n, 2) array."""
    if n < 0:
        raise GeometryError(f"n must be >= 0, got {n}")
    if not (radius > 0.0 and math.isfinite(radius)):
        raise GeometryError(f"radius must be finite and > 0, got {radius}")
    return _uniform_disk(int(n), radius, rng, center)


class UavDistanceLaw:
    """Distribution of the 3-D distance from the receiver to one aerial station.

    The station is uniform on the horizontal disk of radius r_c at height h_a;
    the receiver sits on the ground at horizontal offset x_0 < r_c from the
    disk center.  Support is [h_a', w_max] with h_a' = sqrt(h_a^2) and the two
    pdf pieces joining continuously at w_knee.
    """

    def __init__(self, params: SystemParams) -> None:
        self.h_a = params.h_a
        self.r_c = params.r_c
        self.x_0 = params.x_0
        self.w_knee = params.w_knee
        self.w_max = params.w_max

    def pdf(self, w):
        arr = np.asarray(w, dtype=float)
        scalar = arr.ndim == 0
        a = np.atleast_1d(arr).astype(float)
        out = np.zeros(a.shape)
        near = (a >= self.h_a) & (a <= self.w_knee)
        out[near] = 2.0 * a[near] / self.r_c ** 2
        if self.x_0 > 0.0:
            far = (a > self.w_knee) & (a <= self.w_max)
            if far.any():
                v = np.sqrt(a[far] ** 2 - self.h_a ** 2)
                # fraction of the circle of horizontal radius v that stays
                # inside the deployment disk
                arg = (v * v + self.x_0 ** 2 - self.r_c ** 2) / (2.0 * self.x_0 * v)
                out[far] = (2.0 * a[far] / (math.pi * self.r_c ** 2)) \
                    * np.arccos(np.clip(arg, -1.0, 1.0))
        return float(out[0]) if scalar else out

    def cdf(self, w):
        arr = np.asarray(w, dtype=float)
        scalar = arr.ndim == 0
        a = np.atleast_1d(arr).astype(float)
        out = np.zeros(a.shape)
        out[a >= self.w_max] = 1.0
        mid = (a > self.h_a) & (a < self.w_max)
        if mid.any():
            v2 = a[mid] ** 2 - self.h_a ** 2
            if self.x_0 == 0.0:
                out[mid] = np.clip(v2 / self.r_c ** 2, 0.0, 1.0)
            else:
                out[mid] = self._overlap_fraction(v2)
        return float(out[0]) if scalar else out

    def _overlap_fraction(self, v2):
        """Area fraction of disk(x_0, v) inside disk(0, r_c); v2 = v**2."""
        d, rc = self.x_0, self.r_c
        v = np.sqrt(np.clip(v2, 0.0, None))
        res = np.empty(v.shape)
        contained = v <= rc - d
        res[contained] = v2[contained] / rc ** 2
        part = ~contained
        if part.any():
            vp, v2p = v[part], v2[part]
            a1 = np.clip((d * d + v2p - rc * rc) / (2.0 * d * vp), -1.0, 1.0)
            a2 = np.clip((d * d + rc * rc - v2p) / (2.0 * d * rc), -1.0, 1.0)
            tri = (-d + vp + rc) * (d + vp - rc) * (d - vp + rc) * (d + vp + rc)
            lens = v2p * np.arccos(a1) + rc * rc * np.arccos(a2) \
                - 0.5 * np.sqrt(np.clip(tri, 0.0, None))
            res[part] = np.clip(lens / (math.pi * rc ** 2), 0.0, 1.0)
        return res

    def ccdf(self, w):
        return 1.0 - self.cdf(w)


def uav_distance_pdf(w, params: SystemParams):
    """pdf of the 3-D distance to one uniformly placed aerial station."""
    return UavDistanceLaw(params).pdf(w)


def nearest_uav_ccdf(x, params: SystemParams):
    """P(closest of n_uav aerial stations is farther than x)."""
    return UavDistanceLaw(params).ccdf(x) ** params.n_uav


def interferer_distance_pdf(u, lower: float, params: SystemParams):
    """pdf of one aerial distance conditioned on being beyond `lower`.

    Raises DegenerateSupport when the conditioning event has zero
    probability (lower >= w_max).
    """
    law = UavDistanceLaw(params)
    lo = max(float(lower), params.h_a)
    tail = float(law.ccdf(lo))
    if tail <= 0.0:
        raise DegenerateSupport(
            f"no aerial station can lie beyond {lo} (support ends at {law.w_max})")
    arr = np.asarray(u, dtype=float)
    scalar = arr.ndim == 0
    a = np.atleast_1d(arr).astype(float)
    vals = np.atleast_1d(law.pdf(a)) / tail
    vals[a < lo] = 0.0
    return float(vals[0]) if scalar else vals


class ExclusionKind(enum.Enum):
    """Which interferer population is thinned, given which serving tier."""

    BS_GIVEN_UAV = "bs_given_uav"      # ground interferers, aerial server at 3-D dist x
    UAV_GIVEN_BS = "uav_given_bs"      # aerial interferers, ground server at horiz dist x
    NLOS_GIVEN_LOS = "nlos_given_los"  # blocked backhaul interferers, clear server
    LOS_GIVEN_NLOS = "los_given_nlos"  # clear backhaul interferers, blocked server


def exclusion_radius(kind: ExclusionKind, x, params: SystemParams):
    """Closest allowed horizontal distance for the losing population.

    Any point of the losing population closer than this would have offered
    a higher mean power (access) or lower path loss (backhaul) than the
    server at distance x, contradicting the association rule.
    """
    p = params
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    a = np.atleast_1d(arr).astype(float)
    if kind is ExclusionKind.BS_GIVEN_UAV:
        val = np.sqrt(np.clip(
            (p.p_tg / p.p_ta) ** (2.0 / p.eta_g) * a ** (2.0 * p.eta_a / p.eta_g)
            - p.h_g ** 2, 0.0, None))
    elif kind is ExclusionKind.UAV_GIVEN_BS:
        val = (p.p_ta / p.p_tg) ** (1.0 / p.eta_a) \
            * (a ** 2 + p.h_g ** 2) ** (p.eta_g / (2.0 * p.eta_a))
    elif kind is ExclusionKind.NLOS_GIVEN_LOS:
        dh2 = p.delta_h ** 2
        val = np.sqrt(np.clip(
            (p.c_n / p.c_l) ** (2.0 / p.eta_n) * (a ** 2 + dh2) ** (p.eta_l / p.eta_n)
            - dh2, 0.0, None))
    elif kind is ExclusionKind.LOS_GIVEN_NLOS:
        dh2 = p.delta_h ** 2
        val = np.sqrt(np.clip(
            (p.c_l / p.c_n) ** (2.0 / p.eta_l) * (a ** 2 + dh2) ** (p.eta_n / p.eta_l)
            - dh2, 0.0, None))
    else:
        raise GeometryError(f"unknown exclusion kind: {kind!r}")
    return float(val[0]) if scalar else val
