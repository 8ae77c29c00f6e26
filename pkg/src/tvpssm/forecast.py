"""Posterior-predictive forward sampling and holdout validation.

Each retained posterior draw seeds one predictive path: for every future
step the coefficients advance one step along their random walks (the
variance decay simply continues past T), the latent value follows the
transition equation, and the observation follows the observation
equation.  Seasonal lags resolve to historical latents while they reach
back into the sample and to previously forecast latents afterward.

Point forecasts are per-step sample medians; interval bounds are sample
quantiles computed with linear interpolation between order statistics
(numpy's default rule).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .gibbs import PosteriorDraws, forecast_rng, run_chain
from .model import (
    Hyperparameters,
    McmcConfig,
    ModelKind,
    PathKind,
    SamplerState,
    TimeSeriesData,
    prior_step_scale,
)

__all__ = [
    "ForecastSummary",
    "ValidationReport",
    "sample_predictive_path",
    "forecast_paths",
    "forecast_summary",
    "score_forecast",
    "holdout_validate",
]


@dataclass
class ForecastSummary:
    """Per-horizon point forecast (median) and credible bounds."""

    horizon: int
    point: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    levels: tuple[float, float]
    n_paths: int

    def __post_init__(self):
        if not ((self.lower <= self.point + 1e-12).all()
                and (self.point <= self.upper + 1e-12).all()):
            raise ValueError("quantile bounds must bracket the median")


@dataclass
class ValidationReport:
    """Holdout forecast errors and interval coverage.

    ``errors`` are observed minus median; entries are nan where the
    holdout observation itself is missing, and those steps are excluded
    from the RMSE and from ``n_covered``/``n_scored``.
    """

    horizon: int
    observed: np.ndarray
    point: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    errors: np.ndarray
    covered: np.ndarray
    rmse: float
    levels: tuple[float, float]
    kind: ModelKind

    @property
    def n_scored(self) -> int:
        return int(np.isfinite(self.errors).sum())

    @property
    def n_covered(self) -> int:
        return int(self.covered[np.isfinite(self.errors)].sum())


def _step_scales(hyper: Hyperparameters, t: int, s: int) -> tuple[float, ...]:
    return (
        prior_step_scale(PathKind.STATE_INTERCEPT, t, hyper, s),
        prior_step_scale(PathKind.STATE_SLOPE, t, hyper, s),
        prior_step_scale(PathKind.STATE_SEASONAL, t, hyper, s),
        prior_step_scale(PathKind.OBS_INTERCEPT, t, hyper, s),
        prior_step_scale(PathKind.OBS_SLOPE, t, hyper, s),
        prior_step_scale(PathKind.OBS_SEASONAL, t, hyper, s),
    )


def sample_predictive_path(
    draw: SamplerState,
    data: TimeSeriesData,
    hyper: Hyperparameters,
    kind: ModelKind,
    M: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """One predictive path Y_{T+1}..Y_{T+M} from one posterior snapshot.

    Per step, draws in a fixed order: the six coefficients (bt0, bt1,
    bts, b0, b1, bs; seasonal ones skipped for the baseline), then X,
    then Y.
    """
    if M < 1:
        raise ValueError("forecast horizon M must be at least 1")
    draw.check_consistent(data)
    T = data.n
    s = data.period
    seasonal = kind is ModelKind.SEASONAL
    sd = 1.0 / math.sqrt(draw.tau)

    bt0, bt1, bts = draw.bt0[T], draw.bt1[T], draw.bts[T]
    b0, b1, bs = draw.b0[T], draw.b1[T], draw.bs[T]
    xs = np.concatenate([draw.x, np.empty(M)])
    out = np.empty(M)
    for h in range(1, M + 1):
        t = T + h
        v_bt0, v_bt1, v_bts, v_b0, v_b1, v_bs = _step_scales(hyper, t, s)
        bt0 = rng.normal(bt0, math.sqrt(v_bt0) * sd)
        bt1 = rng.normal(bt1, math.sqrt(v_bt1) * sd)
        if seasonal:
            bts = rng.normal(bts, math.sqrt(v_bts) * sd)
        b0 = rng.normal(b0, math.sqrt(v_b0) * sd)
        b1 = rng.normal(b1, math.sqrt(v_b1) * sd)
        if seasonal:
            bs = rng.normal(bs, math.sqrt(v_bs) * sd)
        x_lag = xs[t - s]
        tm = bt0 + bt1 * xs[t - 1]
        if seasonal:
            tm += bts * x_lag
        xs[t] = rng.normal(tm, math.sqrt(hyper.c_x) * sd)
        om = b0 + b1 * xs[t]
        if seasonal:
            om += bs * x_lag
        out[h - 1] = rng.normal(om, math.sqrt(hyper.c_y) * sd)
    return out


def forecast_paths(
    draws: PosteriorDraws,
    data: TimeSeriesData,
    hyper: Hyperparameters,
    kind: ModelKind,
    M: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """One predictive path per retained draw, vectorized; shape (n_draws, M)."""
    if M < 1:
        raise ValueError("forecast horizon M must be at least 1")
    T = data.n
    if draws.n_time != T or draws.period != data.period:
        raise ValueError("draws and data disagree on length or period")
    s = data.period
    seasonal = kind is ModelKind.SEASONAL
    n = draws.n_draws
    sd = 1.0 / np.sqrt(draws.tau)

    bt0, bt1, bts = (draws.bt0[:, T].copy(), draws.bt1[:, T].copy(),
                     draws.bts[:, T].copy())
    b0, b1, bs = (draws.b0[:, T].copy(), draws.b1[:, T].copy(),
                  draws.bs[:, T].copy())
    xs = np.concatenate([draws.x, np.empty((n, M))], axis=1)
    paths = np.empty((n, M))
    for h in range(1, M + 1):
        t = T + h
        v_bt0, v_bt1, v_bts, v_b0, v_b1, v_bs = _step_scales(hyper, t, s)
        bt0 += rng.standard_normal(n) * (math.sqrt(v_bt0) * sd)
        bt1 += rng.standard_normal(n) * (math.sqrt(v_bt1) * sd)
        if seasonal:
            bts += rng.standard_normal(n) * (math.sqrt(v_bts) * sd)
        b0 += rng.standard_normal(n) * (math.sqrt(v_b0) * sd)
        b1 += rng.standard_normal(n) * (math.sqrt(v_b1) * sd)
        if seasonal:
            bs += rng.standard_normal(n) * (math.sqrt(v_bs) * sd)
        x_lag = xs[:, t - s]
        tm = bt0 + bt1 * xs[:, t - 1]
        if seasonal:
            tm = tm + bts * x_lag
        xs[:, t] = tm + rng.standard_normal(n) * (math.sqrt(hyper.c_x) * sd)
        om = b0 + b1 * xs[:, t]
        if seasonal:
            om = om + bs * x_lag
        paths[:, h - 1] = om + rng.standard_normal(n) * (math.sqrt(hyper.c_y) * sd)
    return paths


def forecast_summary(
    paths: np.ndarray,
    levels: tuple[float, float] = (0.025, 0.975),
) -> ForecastSummary:
    """Per-step median and sample quantiles of a path collection.

    Quantiles use linear interpolation between order statistics.  The
    summary is invariant to the ordering of paths.
    """
    paths = np.asarray(paths, dtype=np.float64)
    if paths.ndim != 2 or paths.shape[0] == 0:
        raise ValueError("empty path set")
    if paths.shape[0] < 100:
        warnings.warn(
            f"only {paths.shape[0]} predictive paths; quantiles want >= 100",
            stacklevel=2,
        )
    lo, hi = float(levels[0]), float(levels[1])
    if not 0.0 <= lo <= hi <= 1.0:
        raise ValueError(f"invalid quantile levels {levels}")
    return ForecastSummary(
        horizon=paths.shape[1],
        point=np.median(paths, axis=0),
        lower=np.quantile(paths, lo, axis=0),
        upper=np.quantile(paths, hi, axis=0),
        levels=(lo, hi),
        n_paths=paths.shape[0],
    )


def score_forecast(
    observed: np.ndarray,
    summary: ForecastSummary,
    kind: ModelKind,
) -> ValidationReport:
    """Score observed holdout values against a forecast summary.

    Errors are observed minus median; coverage flags whether each observed
    value lies inside [lower, upper].  Missing holdout observations score
    as nan and are excluded from the RMSE.
    """
    observed = np.asarray(observed, dtype=np.float64)
    if observed.shape[0] != summary.horizon:
        raise ValueError(
            f"{observed.shape[0]} holdout values for horizon {summary.horizon}")
    errors = observed - summary.point
    covered = (observed >= summary.lower) & (observed <= summary.upper)
    finite = np.isfinite(errors)
    rmse = float(np.sqrt(np.mean(errors[finite] ** 2))) if finite.any() else math.nan
    return ValidationReport(
        horizon=summary.horizon, observed=observed, point=summary.point,
        lower=summary.lower, upper=summary.upper, errors=errors,
        covered=covered, rmse=rmse, levels=summary.levels, kind=kind,
    )


def holdout_validate(
    series: TimeSeriesData,
    hyper: Hyperparameters,
    kind: ModelKind,
    config: McmcConfig,
    M: int,
    levels: tuple[float, float] = (0.025, 0.975),
) -> ValidationReport:
    """Fit on the first T - M points, forecast M, score against the holdout."""
    if M < 1:
        raise ValueError("holdout length M must be at least 1")
    if series.n <= M:
        raise ValueError(
            f"series has {series.n} points, cannot hold out {M}")
    fit_data = TimeSeriesData(
        series.values[: series.n - M].copy(), period=series.period,
        label=series.label)
    draws = run_chain(fit_data, hyper, kind, config)
    paths = forecast_paths(draws, fit_data, hyper, kind, M,
                           forecast_rng(config.seed))
    summ = forecast_summary(paths, levels)
    return score_forecast(series.values[series.n - M:].copy(), summ, kind)
