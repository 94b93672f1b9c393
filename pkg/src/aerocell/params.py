"""System parameters, validation, and JSON config ingestion.

All internal arithmetic is carried out in SI linear units (metres, watts,
linear power ratios, radians).  Decibel and degree values appear only at the
config boundary, where explicitly suffixed keys (``*_db``, ``*_deg``) are
converted on the way in.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Any, Mapping

TWO_PI = 2.0 * math.pi


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class AntennaPattern:
    """Sectored two-lobe beam pattern for the directional backhaul ends."""

    g_main_bs: float = db_to_linear(18.0)   # BS main-lobe gain (linear)
    g_side_bs: float = db_to_linear(-2.0)   # BS side-lobe gain
    g_main_uav: float = db_to_linear(18.0)  # UAV main-lobe gain
    g_side_uav: float = db_to_linear(-2.0)  # UAV side-lobe gain
    theta_bs: float = math.radians(20.0)    # BS main-lobe beamwidth [rad]
    theta_uav: float = math.radians(20.0)   # UAV main-lobe beamwidth [rad]

    @property
    def main_lobe_frac_bs(self) -> float:
        """Probability that a uniformly oriented BS beam covers a given direction."""
        return self.theta_bs / TWO_PI

    @property
    def main_lobe_frac_uav(self) -> float:
        return self.theta_uav / TWO_PI


@dataclass(frozen=True)
class SystemParams:
    """Full parameter set of the two-tier downlink model."""

    lambda_g: float = 1e-6     # terrestrial BS density [1/m^2]
    h_g: float = 30.0          # BS height [m]
    h_a: float = 100.0         # UAV height [m]
    n_uav: int = 5             # number of UAVs uniformly placed in the disk
    r_c: float = 1000.0        # UAV placement disk radius [m]
    x_0: float = 0.0           # UE horizontal offset from the disk centre [m]
    p_tg: float = 20.0         # BS access transmit power [W]
    p_ta: float = 1.0          # UAV access transmit power [W]
    p_tb: float = 10.0         # BS backhaul transmit power [W]
    eta_g: float = 4.0         # path-loss exponent, BS access link
    eta_a: float = 2.5         # path-loss exponent, UAV access link
    eta_l: float = 2.5         # path-loss exponent, LOS backhaul
    eta_n: float = 4.0         # path-loss exponent, NLOS backhaul
    m_a: int = 3               # Nakagami shape, UAV access fading
    m_l: int = 3               # Nakagami shape, LOS backhaul fading
    m_n: int = 1               # Nakagami shape, NLOS backhaul fading
    c_l: float = db_to_linear(-69.8)  # LOS backhaul path-loss intercept
    c_n: float = db_to_linear(-69.8)  # NLOS backhaul path-loss intercept
    env_a: float = 4.88        # blockage environment constant
    env_b: float = 0.43        # blockage environment constant [1/deg]
    sigma2: float = 4e-11      # backhaul noise power [W]
    beta: float = 1.0          # access SIR threshold (linear)
    tau_b: float = 1.0         # backhaul SINR threshold (linear)
    antenna: AntennaPattern = field(default_factory=AntennaPattern)

    # -- derived geometry -------------------------------------------------

    @property
    def delta_h(self) -> float:
        """Height separation between the UAV and BS tiers [m]."""
        return abs(self.h_a - self.h_g)

    @property
    def w_knee(self) -> float:
        """UE-UAV distance where the placement disk edge first matters [m]."""
        return math.hypot(self.r_c - self.x_0, self.h_a)

    @property
    def w_max(self) -> float:
        """Largest possible UE-UAV distance [m]."""
        return math.hypot(self.r_c + self.x_0, self.h_a)

    def replace(self, **changes: Any) -> "SystemParams":
        return dataclasses.replace(self, **changes)


def default_params() -> SystemParams:
    return SystemParams()


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    code: str     # non_positive | exponent_too_small | non_integer_shape | ue_outside_disk
    field: str
    message: str


class InvalidParams(ValueError):
    def __init__(self, violations: list[Violation]):
        self.violations = violations
        lines = "; ".join(f"{v.field}: {v.message}" for v in violations)
        super().__init__(f"invalid parameters: {lines}")


_POSITIVE_FIELDS = (
    "lambda_g", "h_g", "h_a", "r_c", "p_tg", "p_ta", "p_tb",
    "c_l", "c_n", "sigma2", "env_a", "env_b",
)
_NONNEGATIVE_FIELDS = ("x_0", "beta", "tau_b")
_EXPONENT_FIELDS = ("eta_g", "eta_a", "eta_l", "eta_n")
_SHAPE_FIELDS = ("m_a", "m_l", "m_n")
_ANTENNA_GAIN_FIELDS = ("g_main_bs", "g_side_bs", "g_main_uav", "g_side_uav")


def check(params: SystemParams, *, allow_zero_uavs: bool = False) -> list[Violation]:
    """Total validation: returns the complete list of violations, never raises."""
    out: list[Violation] = []

    def bad(code: str, fieldname: str, message: str) -> None:
        out.append(Violation(code, fieldname, message))

    for name in _POSITIVE_FIELDS:
        v = getattr(params, name)
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            bad("non_positive", name, f"must be a finite positive number, got {v!r}")
    for name in _NONNEGATIVE_FIELDS:
        v = getattr(params, name)
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v >= 0):
            bad("non_positive", name, f"must be a finite non-negative number, got {v!r}")
    for name in _EXPONENT_FIELDS:
        v = getattr(params, name)
        if not (isinstance(v, (int, float)) and math.isfinite(v)):
            bad("non_positive", name, f"must be a finite number, got {v!r}")
        elif v <= 2.0:
            bad("exponent_too_small", name,
                f"path-loss exponent must exceed 2 for finite interference, got {v!r}")
    for name in _SHAPE_FIELDS:
        v = getattr(params, name)
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v) \
                or v != int(v):
            bad("non_integer_shape", name, f"Nakagami shape must be an integer, got {v!r}")
        elif v < 1:
            bad("non_positive", name, f"Nakagami shape must be >= 1, got {v!r}")

    n = params.n_uav
    if isinstance(n, bool) or not isinstance(n, (int, float)) or n != int(n):
        bad("non_integer_shape", "n_uav", f"UAV count must be an integer, got {n!r}")
    elif n < (0 if allow_zero_uavs else 1):
        bad("non_positive", "n_uav", f"UAV count must be >= 1, got {n!r}")

    if isinstance(params.x_0, (int, float)) and isinstance(params.r_c, (int, float)) \
            and math.isfinite(params.x_0) and math.isfinite(params.r_c) \
            and params.x_0 >= params.r_c > 0:
        bad("ue_outside_disk", "x_0",
            f"UE offset must satisfy 0 <= x_0 < r_c, got x_0={params.x_0!r} r_c={params.r_c!r}")

    a = params.antenna
    for name in _ANTENNA_GAIN_FIELDS:
        v = getattr(a, name)
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            bad("non_positive", f"antenna.{name}",
                f"antenna gain must be a finite positive number, got {v!r}")
    for name in ("theta_bs", "theta_uav"):
        v = getattr(a, name)
        if not (isinstance(v, (int, float)) and math.isfinite(v) and 0 < v <= TWO_PI):
            bad("non_positive", f"antenna.{name}",
                f"beamwidth must lie in (0, 2*pi] radians, got {v!r}")
    return out


def validate(params: SystemParams, *, allow_zero_uavs: bool = False) -> SystemParams:
    violations = check(params, allow_zero_uavs=allow_zero_uavs)
    if violations:
        raise InvalidParams(violations)
    return params


# ---------------------------------------------------------------------------
# config ingestion
#
# Flat JSON document, snake_case keys with explicit unit suffixes.  Each
# parameter has one primary key (SI linear form, what render_config emits)
# and possibly one alternate-unit key; giving both is an error.


class ConfigError(ValueError):
    def __init__(self, issues: list[str]):
        self.issues = issues
        super().__init__("config error: " + "; ".join(issues))


def _deg_to_rad(v: float) -> float:
    return math.radians(v)


# field -> (primary key, alternate key, alternate decoder)
_FIELD_KEYS: dict[str, tuple[str, str | None, Any]] = {
    "lambda_g": ("lambda_g_per_m2", None, None),
    "h_g": ("h_g_m", None, None),
    "h_a": ("h_a_m", None, None),
    "n_uav": ("n_uav", None, None),
    "r_c": ("r_c_m", None, None),
    "x_0": ("x_0_m", None, None),
    "p_tg": ("p_tg_w", None, None),
    "p_ta": ("p_ta_w", None, None),
    "p_tb": ("p_tb_w", None, None),
    "eta_g": ("eta_g", None, None),
    "eta_a": ("eta_a", None, None),
    "eta_l": ("eta_l", None, None),
    "eta_n": ("eta_n", None, None),
    "m_a": ("m_a", None, None),
    "m_l": ("m_l", None, None),
    "m_n": ("m_n", None, None),
    "c_l": ("c_l", "c_l_db", db_to_linear),
    "c_n": ("c_n", "c_n_db", db_to_linear),
    "env_a": ("env_a", None, None),
    "env_b": ("env_b", None, None),
    "sigma2": ("sigma2_w", None, None),
    "beta": ("beta", "beta_db", db_to_linear),
    "tau_b": ("tau_b", "tau_b_db", db_to_linear),
}

_ANTENNA_KEYS: dict[str, tuple[str, str | None, Any]] = {
    "g_main_bs": ("g_main_bs", "g_main_bs_db", db_to_linear),
    "g_side_bs": ("g_side_bs", "g_side_bs_db", db_to_linear),
    "g_main_uav": ("g_main_uav", "g_main_uav_db", db_to_linear),
    "g_side_uav": ("g_side_uav", "g_side_uav_db", db_to_linear),
    "theta_bs": ("theta_bs_rad", "theta_bs_deg", _deg_to_rad),
    "theta_uav": ("theta_uav_rad", "theta_uav_deg", _deg_to_rad),
}

_INT_FIELDS = ("n_uav", "m_a", "m_l", "m_n")

CONFIG_KEYS: tuple[str, ...] = tuple(
    k
    for spec in list(_FIELD_KEYS.values()) + list(_ANTENNA_KEYS.values())
    for k in (spec[0], spec[1])
    if k is not None
)


def _pick(cfg: Mapping[str, Any], fieldname: str, spec, issues: list[str]):
    """Return (present, value) for one field, decoding alternate units."""
    primary, alternate, decode = spec
    has_p = primary in cfg
    has_a = alternate is not None and alternate in cfg
    if has_p and has_a:
        issues.append(f"keys {primary!r} and {alternate!r} both given; use one")
        return False, None
    key = primary if has_p else alternate if has_a else None
    if key is None:
        return False, None
    raw = cfg[key]
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        issues.append(f"key {key!r} must be a number, got {raw!r}")
        return False, None
    value = float(raw)
    if has_a:
        value = decode(value)
    if fieldname in _INT_FIELDS:
        if value != int(value):
            issues.append(f"key {key!r} must be an integer, got {raw!r}")
            return False, None
        return True, int(value)
    return True, value


def load_config(cfg: Mapping[str, Any]) -> SystemParams:
    """Build a SystemParams from a flat config mapping.

    Unknown keys are rejected.  Semantic validation (positivity etc.) is a
    separate step: see :func:`validate`.
    """
    issues: list[str] = []
    for key in cfg:
        if key not in CONFIG_KEYS:
            issues.append(f"unknown key {key!r}")

    scalar_changes: dict[str, Any] = {}
    for fieldname, spec in _FIELD_KEYS.items():
        present, value = _pick(cfg, fieldname, spec, issues)
        if present:
            scalar_changes[fieldname] = value

    antenna_changes: dict[str, Any] = {}
    for fieldname, spec in _ANTENNA_KEYS.items():
        present, value = _pick(cfg, fieldname, spec, issues)
        if present:
            antenna_changes[fieldname] = value

    if issues:
        raise ConfigError(issues)

    params = SystemParams(**scalar_changes) if scalar_changes else SystemParams()
    if antenna_changes:
        params = params.replace(antenna=dataclasses.replace(params.antenna, **antenna_changes))
    return params


def render_config(params: SystemParams) -> dict[str, Any]:
    """Emit the primary-key (SI linear) config document; exact round trip."""
    out: dict[str, Any] = {}
    for fieldname, (primary, _alt, _dec) in _FIELD_KEYS.items():
        out[primary] = getattr(params, fieldname)
    for fieldname, (primary, _alt, _dec) in _ANTENNA_KEYS.items():
        out[primary] = getattr(params.antenna, fieldname)
    return out
