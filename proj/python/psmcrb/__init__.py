"""Post-model-selection misspecified Cramer-Rao bounds for a linear Gaussian model."""

from ._core import (
    ConfigError,
    DegenerateSelection,
    DomainError,
    Geometry,
    Hypothesis,
    Interpretation,
    NumericalError,
    bounds,
    bounds_columns,
    chi2_cdf,
    chi2_cdf_d2lambda,
    chi2_cdf_dlambda,
    chi2_survival,
    cond_cov,
    cond_mean,
    glrt_select,
    glrt_statistic,
    mcrb_k,
    msl,
    msnl,
    noncentrality,
    oracle_ml,
    standard_config_json,
    pseudo_true,
    psml,
    reg_lower_gamma,
    selection_probs,
    selfcheck,
    sweep_columns,
    sweep_csv,
)

__all__ = [
    "ConfigError",
    "DegenerateSelection",
    "DomainError",
    "Geometry",
    "Hypothesis",
    "Interpretation",
    "NumericalError",
    "bounds",
    "bounds_columns",
    "chi2_cdf",
    "chi2_cdf_d2lambda",
    "chi2_cdf_dlambda",
    "chi2_survival",
    "cond_cov",
    "cond_mean",
    "glrt_select",
    "glrt_statistic",
    "mcrb_k",
    "msl",
    "msnl",
    "noncentrality",
    "oracle_ml",
    "standard_config_json",
    "pseudo_true",
    "psml",
    "reg_lower_gamma",
    "selection_probs",
    "selfcheck",
    "sweep_columns",
    "sweep_csv",
]

__version__ = "0.1.0"
