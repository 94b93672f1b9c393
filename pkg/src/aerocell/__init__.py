"""Coverage and backhaul analysis for hybrid aerial/terrestrial downlink networks.

The layers, bottom up: `params` (validated configuration), `quadrature`
(adaptive integration), `geometry`/`channel` (distance laws, fading, gains),
`analysis` (closed-form probabilities), `montecarlo` (trial engine),
`service` (orchestration), `app` (HTTP boundary) and `cli`.
"""

from aerocell.analysis import (
    AnalysisError,
    AnalyticReport,
    backhaul_probability,
    association_probabilities,
    overall_coverage,
)
from aerocell.montecarlo import (
    MetricEstimate,
    SimulationError,
    estimate_metrics,
    metrics_from_trials,
    run_trials,
)
from aerocell.params import (
    AntennaPattern,
    ConfigError,
    InvalidParams,
    SystemParams,
    default_params,
    load_config,
    render_config,
    validate,
)
from aerocell.quadrature import NonConvergence, Tolerance
from aerocell.service import (
    ServiceError,
    SweepSpec,
    ValidationReport,
    run_analyze,
    run_simulate,
    run_sweep,
    run_validation,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisError",
    "AnalyticReport",
    "AntennaPattern",
    "ConfigError",
    "InvalidParams",
    "MetricEstimate",
    "NonConvergence",
    "ServiceError",
    "SimulationError",
    "SweepSpec",
    "SystemParams",
    "Tolerance",
    "ValidationReport",
    "association_probabilities",
    "backhaul_probability",
    "default_params",
    "estimate_metrics",
    "load_config",
    "metrics_from_trials",
    "overall_coverage",
    "render_config",
    "run_analyze",
    "run_simulate",
    "run_sweep",
    "run_trials",
    "run_validation",
    "validate",
    "__version__",
]
