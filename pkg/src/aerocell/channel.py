"""Propagation layer: blockage model, path loss, fading, directional gains.

Link conventions: ACCESS_BS distances are horizontal (station height is
folded into the path loss), every other kind takes the 3-D distance.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .params import SystemParams


class LinkKind(enum.Enum):
    ACCESS_BS = "access_bs"
    ACCESS_UAV = "access_uav"
    BACKHAUL_LOS = "backhaul_los"
    BACKHAUL_NLOS = "backhaul_nlos"


def los_probability(s, params: SystemParams):
    """Probability that a backhaul path with horizontal separation s is clear.

    Sigmoid in the elevation angle; s = 0 means looking straight up
    regardless of the height gap.
    """
    arr = np.asarray(s, dtype=float)
    scalar = arr.ndim == 0
    a = np.abs(np.atleast_1d(arr).astype(float))
    theta = np.degrees(np.arctan2(params.delta_h, a))
    theta[a == 0.0] = 90.0
    out = 1.0 / (1.0 + params.env_a * np.exp(-params.env_b * (theta - params.env_a)))
    return float(out[0]) if scalar else out


def mean_rx_power(kind: LinkKind, dist, params: SystemParams):
    """Fading-averaged received power on one link, before antenna gains."""
    p = params
    arr = np.asarray(dist, dtype=float)
    scalar = arr.ndim == 0
    a = np.atleast_1d(arr).astype(float)
    if kind is LinkKind.ACCESS_BS:
        val = p.p_tg * (a * a + p.h_g ** 2) ** (-p.eta_g / 2.0)
    elif kind is LinkKind.ACCESS_UAV:
        val = p.p_ta * a ** -p.eta_a
    elif kind is LinkKind.BACKHAUL_LOS:
        val = p.p_tb * p.c_l * a ** -p.eta_l
    elif kind is LinkKind.BACKHAUL_NLOS:
        val = p.p_tb * p.c_n * a ** -p.eta_n
    else:
        raise ValueError(f"unknown link kind: {kind!r}")
    return float(val[0]) if scalar else val


_FADING_SHAPE = {
    LinkKind.ACCESS_BS: lambda p: 1,
    LinkKind.ACCESS_UAV: lambda p: p.m_a,
    LinkKind.BACKHAUL_LOS: lambda p: p.m_l,
    LinkKind.BACKHAUL_NLOS: lambda p: p.m_n,
}


def sample_fading(kind: LinkKind, params: SystemParams, rng: np.random.Generator,
                  size=None):
    """Draw unit-mean power fading: Exp(1) for ground access, Gamma(m, 1/m) else."""
    m = _FADING_SHAPE[kind](params)
    if m == 1:
        out = rng.exponential(1.0, size)
    else:
        out = rng.standard_gamma(m, size) / m
    return float(out) if size is None else out


@dataclass(frozen=True, eq=False)
class GainDistribution:
    """Four-point law for the product of the two antenna-end gains."""

    gains: np.ndarray        # (4,) main*main, main*side, side*main, side*side
    probs: np.ndarray        # (4,) matching probabilities, sums to 1
    serving_gain: float      # aligned pair: main*main


def gain_distribution(params: SystemParams) -> GainDistribution:
    """Gain law for an interfering backhaul link with independently aimed ends."""
    ant = params.antenna
    cg = ant.main_lobe_frac_bs
    ca = ant.main_lobe_frac_uav
    gains = np.array([
        ant.g_main_bs * ant.g_main_uav,
        ant.g_main_bs * ant.g_side_uav,
        ant.g_side_bs * ant.g_main_uav,
        ant.g_side_bs * ant.g_side_uav,
    ])
    probs = np.array([cg * ca, cg * (1.0 - ca), (1.0 - cg) * ca, (1.0 - cg) * (1.0 - ca)])
    return GainDistribution(gains=gains, probs=probs,
                            serving_gain=float(ant.g_main_bs * ant.g_main_uav))


def sample_interferer_gain(dist: GainDistribution, rng: np.random.Generator,
                           size=None):
    """Draw antenna gains for interfering links from the four-point law."""
    out = rng.choice(dist.gains, size=size, p=dist.probs)
    return float(out) if size is None else out
