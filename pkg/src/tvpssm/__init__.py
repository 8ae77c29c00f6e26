"""Seasonally-adjusted time-varying-parameter Bayesian state-space forecasting.

Fits a univariate series with a Gibbs sampler whose updates are all
univariate closed forms, produces multi-step posterior-predictive
forecasts with credible intervals, and ships the verification
instruments (conditional grid oracle, joint-distribution sampler test)
used to certify the sampler.
"""

from .model import (
    GaussianFactor,
    Hyperparameters,
    INTERCEPT_ANCHOR,
    McmcConfig,
    ModelKind,
    PathKind,
    SamplerState,
    SEASONAL_ANCHOR,
    SLOPE_ANCHOR,
    TimeSeriesData,
    count_gaussian_factors,
    empirical_bayes_xi0,
    gaussian_factors,
    log_joint,
    prior_step_scale,
)
from .gibbs import (
    NumericalError,
    PosteriorDraws,
    chain_rng,
    forecast_rng,
    impute_missing,
    init_chain,
    run_chain,
    sweep,
    tau_conditional,
    update_latent,
    update_mu0,
    update_obs_coeff,
    update_state_coeff,
    update_tau,
    update_x0,
)
from .forecast import (
    ForecastSummary,
    ValidationReport,
    forecast_paths,
    forecast_summary,
    holdout_validate,
    sample_predictive_path,
)
from .diagnostics import (
    GewekeReport,
    OracleReport,
    conditional_oracle_check,
    geweke_joint_test,
    geweke_test_hyper,
    run_oracle_suite,
    summary_stats,
    trace_export,
)
from .synthetic import (
    SyntheticSpec,
    generate_seasonal_series,
    simulate_from_prior,
)
from .io import (
    DataFormatError,
    load_series,
    write_series,
)

__version__ = "0.1.0"
