import numpy as np
import pytest

from tvpssm import (
    Hyperparameters,
    ModelKind,
    TimeSeriesData,
    init_chain,
)


def make_series(T=26, period=12, n_missing=2, seed=0, level=25.0, sd=3.0):
    """A generic noisy series with a few masked interior points."""
    rng = np.random.default_rng(seed)
    values = level + rng.normal(0.0, sd, T)
    if n_missing:
        masked = rng.choice(np.arange(period, T), size=n_missing, replace=False)
        values[masked] = np.nan
    return TimeSeriesData(values, period=period, label=f"test-{seed}")


def perturbed_state(data, hyper, kind, seed=0):
    """Deterministic start plus moderate noise on every coordinate."""
    rng = np.random.default_rng(seed)
    T = data.n
    s = data.period
    state = init_chain(data, hyper, kind)
    state.tau = float(rng.gamma(5.0, 0.2))
    state.mu0 += rng.normal(0.0, 2.0)
    state.x += rng.normal(0.0, 2.0, T + 1)
    state.bt0[1:] += rng.normal(0.0, 0.5, T)
    state.bt1[1:] += rng.normal(0.0, 0.3, T)
    state.b0[1:] += rng.normal(0.0, 0.5, T)
    state.b1[1:] += rng.normal(0.0, 0.3, T)
    if kind is ModelKind.SEASONAL:
        state.bts[s:] += rng.normal(0.0, 0.3, T - s + 1)
        state.bs[s:] += rng.normal(0.0, 0.3, T - s + 1)
    if len(state.missing_t):
        state.y[state.missing_t] += rng.normal(0.0, 2.0, len(state.missing_t))
    return state


@pytest.fixture
def small_case():
    """(state, data, hyper) for the seasonal model at T=26."""
    data = make_series()
    hyper = Hyperparameters()
    return perturbed_state(data, hyper, ModelKind.SEASONAL, seed=1), data, hyper


@pytest.fixture
def small_baseline_case():
    data = make_series(seed=3)
    hyper = Hyperparameters()
    return perturbed_state(data, hyper, ModelKind.BASELINE, seed=4), data, hyper
