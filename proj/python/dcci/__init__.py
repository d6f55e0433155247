"""Data cleaning-adjusted causal inference with corrupted covariates.

Thin wrapper over the compiled core. Missing covariates are NaN.
"""

from ._core import (  # noqa: F401
    ConfigurationError,
    DimensionError,
    Error,
    central_scale,
    corrupt,
    cross_fit_estimate,
    estimate_rates,
    fill,
    fit_cleaning,
    generate_factor_signal,
    micro_scale,
    pca_truncate,
    privatize_micro,
    run_coverage,
    scree,
    simulate_dgp,
    suggest_k,
)

__version__ = "0.1.0"
