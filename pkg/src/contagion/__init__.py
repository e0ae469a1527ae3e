"""Credit contagion laboratory.

Exact simulation of interacting default cascades in finite portfolios,
their large-portfolio mean-field limit, and Gaussian approximations of
portfolio losses, with a config-driven CLI for reproducible runs.
"""

__version__ = "0.1.0"

from .clt import (
    VarianceReport,
    excess_curve,
    excess_prob,
    mc_validate_covdiag,
    variance_horizon,
)
from .ctmc import (
    EnsembleStats,
    EventLog,
    PathGrid,
    intensities,
    loss_process,
    monte_carlo,
    simulate_path,
)
from .limit import (
    LimitSolution,
    default_curve,
    limit_loss,
    sample_default_times,
    sample_limit_default_time,
    solve_limit,
)
from .model import (
    Environment,
    FirmClass,
    Portfolio,
    ReciprocityCertificate,
    build_portfolio,
    check_reciprocity,
    validate_environment,
)
from . import errors

__all__ = [
    "__version__",
    "errors",
    "FirmClass",
    "Environment",
    "Portfolio",
    "ReciprocityCertificate",
    "validate_environment",
    "check_reciprocity",
    "build_portfolio",
    "EventLog",
    "PathGrid",
    "EnsembleStats",
    "intensities",
    "simulate_path",
    "loss_process",
    "monte_carlo",
    "LimitSolution",
    "solve_limit",
    "limit_loss",
    "default_curve",
    "sample_default_times",
    "sample_limit_default_time",
    "VarianceReport",
    "variance_horizon",
    "excess_prob",
    "excess_curve",
    "mc_validate_covdiag",
]
