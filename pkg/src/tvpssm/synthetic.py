"""Synthetic series generation and exact forward simulation from the model.

Two generators live here: a parametric trend-plus-sinusoid series used as
the standard test bed for fitting and holdout comparisons, and an exact
draw of (parameters, latent path, data) from the model's own prior, which
feeds the joint-distribution sampler test and coverage studies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .model import Hyperparameters, ModelKind, SamplerState, TimeSeriesData

__all__ = ["SyntheticSpec", "generate_seasonal_series", "simulate_from_prior"]


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of the trend-plus-sinusoid test series."""

    n: int = 132
    period: int = 12
    trend_slope: float = 0.005
    seasonal_amplitude: float = 8.0
    noise_sd: float = 1.0
    base_level: float = 26.0
    missing_fraction: float = 0.0

    def __post_init__(self):
        if self.n < 2 * self.period + 2:
            raise ValueError(
                f"n must be at least 2*period+2 = {2 * self.period + 2}")
        if not self.noise_sd > 0:
            raise ValueError("noise_sd must be positive")
        if not 0.0 <= self.missing_fraction < 1.0:
            raise ValueError("missing_fraction must lie in [0, 1)")


def generate_seasonal_series(spec: SyntheticSpec, seed: int) -> TimeSeriesData:
    """Trend + sinusoid + white noise, with optional random masking.

    y_t = base + slope*t + amplitude*sin(2*pi*t/period) + N(0, noise_sd^2)
    for t = 1..n.  A fraction of indices is masked uniformly at random,
    never among the first ``period`` points.  Deterministic given seed.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    t = np.arange(1, spec.n + 1, dtype=np.float64)
    values = (spec.base_level
              + spec.trend_slope * t
              + spec.seasonal_amplitude * np.sin(2.0 * np.pi * t / spec.period)
              + rng.normal(0.0, spec.noise_sd, spec.n))
    n_mask = int(spec.missing_fraction * spec.n)
    if n_mask > 0:
        candidates = np.arange(spec.period, spec.n)  # positions of t > period
        masked = rng.choice(candidates, size=n_mask, replace=False)
        values[masked] = np.nan
    return TimeSeriesData(values, period=spec.period, label=f"synthetic-{seed}")


def simulate_from_prior(
    hyper: Hyperparameters,
    kind: ModelKind,
    T: int,
    seed: int,
    period: int = 12,
) -> tuple[SamplerState, TimeSeriesData]:
    """One exact draw of (precision, level, coefficient paths, latents, data).

    Runs the model generatively: tau from its Gamma prior, the level and
    X_0 from their normals, every coefficient path along its anchored
    random walk, then the latent and observation equations, with the same
    regime split at t = period as the joint density.  Requires a fixed
    xi0 (the empirical-mean policy is circular here).  Coefficients are
    not truncated, so occasional draws produce explosive paths at large T.
    """
    if hyper.xi0 is None:
        raise ValueError("xi0 must be fixed for forward simulation")
    if T < 2 * period + 2:
        raise ValueError(f"T must be at least 2*period+2 = {2 * period + 2}")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    seasonal = kind is ModelKind.SEASONAL
    tau, mu0, x, bt0, bt1, bts, b0, b1, bs, y = _kernels.forward_sim_kernel(
        T, period, seasonal, hyper.as_array(hyper.xi0), rng)
    data = TimeSeriesData(y[1:].copy(), period=period, label=f"prior-sim-{seed}")
    state = SamplerState(
        tau=float(tau), mu0=float(mu0), x=x, bt0=bt0, bt1=bt1, bts=bts,
        b0=b0, b1=b1, bs=bs, y=y,
        missing_t=np.empty(0, dtype=np.int64), period=period, kind=kind,
        xi0=float(hyper.xi0),
    )
    return state, data
