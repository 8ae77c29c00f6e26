"""Deterministic-scan Gibbs sampler: conditionals, sweeps and chains.

Every unknown has a univariate closed-form conditional (normals for the
level, latent path, coefficients and imputed observations; a Gamma for
the shared precision), so the sampler is pure Gibbs: no proposals, no
matrix inversions.  The compiled kernels in :mod:`tvpssm._kernels` do the
per-sweep work; this module provides the typed wrappers, chain driver and
draw retention.

Randomness comes from ``numpy.random.Generator`` instances, which the
kernels consume directly.  ``run_chain`` derives its generator from
``SeedSequence(config.seed).spawn(2)[0]`` (child 1 is reserved for
posterior-predictive sampling), so fits and forecasts are reproducible
and independent per seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .model import (
    Hyperparameters,
    INTERCEPT_ANCHOR,
    McmcConfig,
    ModelKind,
    SamplerState,
    SEASONAL_ANCHOR,
    SLOPE_ANCHOR,
    TimeSeriesData,
)

__all__ = [
    "NumericalError",
    "PosteriorDraws",
    "init_chain",
    "update_tau",
    "update_mu0",
    "update_x0",
    "update_latent",
    "update_state_coeff",
    "update_obs_coeff",
    "impute_missing",
    "sweep",
    "run_chain",
    "chain_rng",
    "forecast_rng",
]

_COEFF_WHICH = {"intercept": 0, "slope": 1, "seasonal": 2}


class NumericalError(RuntimeError):
    """A sampler update produced a non-finite value."""


def chain_rng(seed: int) -> np.random.Generator:
    """The generator stream that drives the Gibbs chain for ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed).spawn(2)[0])


def forecast_rng(seed: int) -> np.random.Generator:
    """The sibling stream reserved for posterior-predictive sampling."""
    return np.random.default_rng(np.random.SeedSequence(seed).spawn(2)[1])


@dataclass
class PosteriorDraws:
    """Retained post-burn-in snapshots of every sampled quantity.

    Path arrays have shape ``(n_draws, T + 1)`` in the same time indexing
    as :class:`SamplerState`; ``ystar`` has one column per missing index,
    ordered like ``missing_t``.
    """

    tau: np.ndarray
    mu0: np.ndarray
    x: np.ndarray
    bt0: np.ndarray
    bt1: np.ndarray
    bts: np.ndarray
    b0: np.ndarray
    b1: np.ndarray
    bs: np.ndarray
    ystar: np.ndarray
    missing_t: np.ndarray
    config: McmcConfig
    kind: ModelKind
    xi0: float
    period: int

    def __post_init__(self):
        if self.n_draws != self.config.n_retained:
            raise ValueError(
                f"retained {self.n_draws} draws, config promises "
                f"{self.config.n_retained}"
            )
        if not (self.tau > 0).all():
            raise ValueError("retained tau draws must all be positive")

    @property
    def n_draws(self) -> int:
        return self.tau.shape[0]

    @property
    def n_time(self) -> int:
        return self.x.shape[1] - 1

    def state_at(self, i: int, data: TimeSeriesData) -> SamplerState:
        """Rebuild the i-th retained snapshot as a full SamplerState."""
        y = np.concatenate([[np.nan], data.values])
        y[self.missing_t] = self.ystar[i]
        return SamplerState(
            tau=float(self.tau[i]), mu0=float(self.mu0[i]),
            x=self.x[i].copy(), bt0=self.bt0[i].copy(),
            bt1=self.bt1[i].copy(), bts=self.bts[i].copy(),
            b0=self.b0[i].copy(), b1=self.b1[i].copy(),
            bs=self.bs[i].copy(), y=y,
            missing_t=self.missing_t.copy(), period=self.period,
            kind=self.kind, xi0=self.xi0,
        )


def init_chain(
    data: TimeSeriesData,
    hyper: Hyperparameters,
    kind: ModelKind,
    seed: int = 0,
) -> SamplerState:
    """Deterministic starting configuration.

    tau = 1, level and X_0 at xi0, the latent path at the observations
    (xi0 where missing), every coefficient path held flat at its anchor,
    and missing observations imputed at xi0.  ``seed`` is accepted for
    interface stability but the start is fully deterministic.
    """
    T = data.n
    s = data.period
    xi0 = hyper.resolve_xi0(data)
    x = np.empty(T + 1)
    x[0] = xi0
    x[1:] = np.where(np.isfinite(data.values), data.values, xi0)
    y = np.concatenate([[np.nan], data.values])
    y[1:][~np.isfinite(data.values)] = xi0

    bt0 = np.full(T + 1, INTERCEPT_ANCHOR)
    bt1 = np.full(T + 1, SLOPE_ANCHOR)
    b0 = np.full(T + 1, INTERCEPT_ANCHOR)
    b1 = np.full(T + 1, SLOPE_ANCHOR)
    bts = np.zeros(T + 1)
    bs = np.zeros(T + 1)
    if kind is ModelKind.SEASONAL:
        bts[s - 1:] = SEASONAL_ANCHOR
        bs[s - 1:] = SEASONAL_ANCHOR

    return SamplerState(
        tau=1.0, mu0=xi0, x=x, bt0=bt0, bt1=bt1, bts=bts, b0=b0, b1=b1,
        bs=bs, y=y, missing_t=data.missing_t, period=data.period,
        kind=kind, xi0=xi0,
    )


def _hyp(state: SamplerState, hyper: Hyperparameters) -> np.ndarray:
    return hyper.as_array(state.xi0)


def update_tau(
    state: SamplerState,
    data: TimeSeriesData,
    hyper: Hyperparameters,
    kind: ModelKind,
    rng: np.random.Generator,
) -> float:
    """Draw the precision from its Gamma conditional.

    The shape is a + N/2 with N the number of Gaussian factors in the
    joint (a + 4T - 10 for the seasonal model at s = 12, a + 3T + 1 for
    the baseline); the rate is b plus half the weighted sum of all
    squared residuals.
    """
    state.check_consistent(data)
    shape, rate = _kernels.tau_shape_rate(
        state.mu0, state.x, state.bt0, state.bt1, state.bts,
        state.b0, state.b1, state.bs, state.y,
        data.period, kind is ModelKind.SEASONAL, _hyp(state, hyper))
    if not (rate > 0 and math.isfinite(rate)):
        raise NumericalError(f"tau conditional rate is not positive: {rate}")
    return float(rng.gamma(shape, 1.0 / rate))


def tau_conditional(
    state: SamplerState,
    data: TimeSeriesData,
    hyper: Hyperparameters,
    kind: ModelKind,
) -> tuple[float, float]:
    """(shape, rate) of the precision's Gamma conditional."""
    state.check_consistent(data)
    shape, rate = _kernels.tau_shape_rate(
        state.mu0, state.x, state.bt0, state.bt1, state.bts,
        state.b0, state.b1, state.bs, state.y,
        data.period, kind is ModelKind.SEASONAL, _hyp(state, hyper))
    return float(shape), float(rate)


def update_mu0(
    state: SamplerState,
    hyper: Hyperparameters,
    rng: np.random.Generator,
) -> float:
    """Draw the initial level from its normal conditional."""
    m, v = _kernels.cond_mu0(state.x[0], state.tau, _hyp(state, hyper))
    return float(rng.normal(m, math.sqrt(v)))


def update_x0(
    state: SamplerState,
    data: TimeSeriesData,
    hyper: Hyperparameters,
    kind: ModelKind,
    rng: np.random.Generator,
) -> float:
    """Draw X_0 from its normal conditional."""
    state.check_consistent(data)
    m, v = _kernels.cond_x0(
        state.tau, state.mu0, state.x, state.bt0, state.bt1, state.bts,
        state.b0, state.b1, state.bs, state.y,
        data.period, kind is ModelKind.SEASONAL, _hyp(state, hyper))
    return float(rng.normal(m, math.sqrt(v)))


def update_latent(
    state: SamplerState,
    data: TimeSeriesData,
    hyper: Hyperparameters,
    kind: ModelKind,
    t: int,
    rng: np.random.Generator,
) -> float:
    """Draw X_t (1 <= t <= T) from its normal conditional.

    Any coupling indexed past T (the t+1 transition at t = T, the t+s
    transition and observation near the tail) is dropped, since those
    factors do not exist in the joint.
    """
    state.check_consistent(data)
    if not 1 <= t <= data.n:
        raise ValueError(f"latent index t must be in 1..{data.n}, got {t}")
    m, v = _kernels.cond_x(
        t, state.tau, state.x, state.bt0, state.bt1, state.bts,
        state.b0, state.b1, state.bs, state.y,
        data.period, kind is ModelKind.SEASONAL, _hyp(state, hyper))
    return float(rng.normal(m, math.sqrt(v)))


def _coeff_range_check(state: SamplerState, kind_of: str, t: int) -> int:
    which = _COEFF_WHICH.get(kind_of)
    if which is None:
        raise ValueError(f"unknown coefficient kind {kind_of!r}")
    T = state.n_time
    if which == 2:
        if state.kind is not ModelKind.SEASONAL:
            raise ValueError("seasonal coefficients exist only in the seasonal model")
        if not state.period <= t <= T:
            raise ValueError(
                f"seasonal coefficient index must be in {state.period}..{T}, got {t}")
    elif not 1 <= t <= T:
        raise ValueError(f"coefficient index must be in 1..{T}, got {t}")
    return which


def update_state_coeff(
    state: SamplerState,
    hyper: Hyperparameters,
    kind_of: str,
    t: int,
    rng: np.random.Generator,
) -> float:
    """Draw one transition coefficient (intercept/slope/seasonal) at t.

    At t = T the successor increment factor does not exist, so both its
    precision and mean contributions are dropped.
    """
    which = _coeff_range_check(state, kind_of, t)
    m, v = _kernels.cond_state_coeff(
        which, t, state.tau, state.x, state.bt0, state.bt1, state.bts,
        state.b0, state.b1, state.bs, state.y,
        state.period, state.kind is ModelKind.SEASONAL, _hyp(state, hyper))
    return float(rng.normal(m, math.sqrt(v)))


def update_obs_coeff(
    state: SamplerState,
    data: TimeSeriesData,
    hyper: Hyperparameters,
    kind_of: str,
    t: int,
    rng: np.random.Generator,
) -> float:
    """Draw one observation coefficient at t (missing Y enter as imputed)."""
    state.check_consistent(data)
    which = _coeff_range_check(state, kind_of, t)
    m, v = _kernels.cond_obs_coeff(
        which, t, state.tau, state.x, state.bt0, state.bt1, state.bts,
        state.b0, state.b1, state.bs, state.y,
        state.period, state.kind is ModelKind.SEASONAL, _hyp(state, hyper))
    return float(rng.normal(m, math.sqrt(v)))


def impute_missing(
    state: SamplerState,
    hyper: Hyperparameters,
    t: int,
    rng: np.random.Generator,
) -> float:
    """Draw the imputed observation at a missing index from the model.

    Raises if t is not a missing index: imputation never overwrites data.
    """
    if t not in state.missing_t:
        raise ValueError(f"t = {t} is not a missing index; refusing to impute")
    m, v = _kernels.cond_ystar(
        t, state.tau, state.x, state.b0, state.b1, state.bs,
        state.period, state.kind is ModelKind.SEASONAL, _hyp(state, hyper))
    return float(rng.normal(m, math.sqrt(v)))


def conditional_params(
    state: SamplerState,
    data: TimeSeriesData,
    hyper: Hyperparameters,
    kind: ModelKind,
    name: str,
    t: int | None = None,
) -> tuple[float, float]:
    """(mean, variance) of a scalar normal conditional, by quantity name.

    Names follow the trace grammar: mu0, x0, x, bt0, bt1, bts, b0, b1,
    bs, ystar (indexed quantities need ``t``).  For tau use
    :func:`tau_conditional`.
    """
    state.check_consistent(data)
    seasonal = kind is ModelKind.SEASONAL
    hyp = _hyp(state, hyper)
    args = (state.tau, state.x, state.bt0, state.bt1, state.bts,
            state.b0, state.b1, state.bs, state.y, data.period, seasonal, hyp)
    if name == "mu0":
        return tuple(map(float, _kernels.cond_mu0(state.x[0], state.tau, hyp)))
    if name == "x0" or (name == "x" and t == 0):
        return tuple(map(float, _kernels.cond_x0(
            state.tau, state.mu0, *args[1:])))
    if name == "x":
        return tuple(map(float, _kernels.cond_x(t, *args)))
    if name in ("bt0", "bt1", "bts"):
        which = {"bt0": 0, "bt1": 1, "bts": 2}[name]
        return tuple(map(float, _kernels.cond_state_coeff(which, t, *args)))
    if name in ("b0", "b1", "bs"):
        which = {"b0": 0, "b1": 1, "bs": 2}[name]
        return tuple(map(float, _kernels.cond_obs_coeff(which, t, *args)))
    if name == "ystar":
        return tuple(map(float, _kernels.cond_ystar(
            t, state.tau, state.x, state.b0, state.b1, state.bs,
            data.period, seasonal, hyp)))
    raise ValueError(f"unknown conditional {name!r}")


def sweep(
    state: SamplerState,
    data: TimeSeriesData,
    hyper: Hyperparameters,
    kind: ModelKind,
    rng: np.random.Generator,
) -> SamplerState:
    """One full deterministic scan; returns the new state.

    Each update sees the most recent values of everything else; anchors
    are never touched.
    """
    state.check_consistent(data)
    out = state.copy()
    out.kind = kind
    tau, mu0, code, idx = _kernels.sweep_kernel(
        out.tau, out.mu0, out.x, out.bt0, out.bt1, out.bts,
        out.b0, out.b1, out.bs, out.y, out.missing_t,
        data.period, kind is ModelKind.SEASONAL, _hyp(state, hyper),
        rng, _kernels.FAULT_NONE)
    if code != _kernels.OK:
        raise NumericalError(
            f"non-finite value produced by {_kernels.ERR_NAMES[code]}"
            + (f" at t = {idx}" if idx >= 0 else ""))
    out.tau = float(tau)
    out.mu0 = float(mu0)
    return out


def run_chain(
    data: TimeSeriesData,
    hyper: Hyperparameters,
    kind: ModelKind,
    config: McmcConfig,
) -> PosteriorDraws:
    """Initialize, run n_iter sweeps, retain every thin-th post-burn-in state.

    Deterministic given the seed.  Any non-finite value aborts with a
    :class:`NumericalError` naming the offending update and index.
    """
    state = init_chain(data, hyper, kind, config.seed)
    rng = chain_rng(config.seed)
    hyp = hyper.as_array(state.xi0)
    seasonal = kind is ModelKind.SEASONAL
    s = data.period
    T = data.n
    n_keep = config.n_retained
    n_miss = state.missing_t.shape[0]

    tau_d = np.empty(n_keep)
    mu0_d = np.empty(n_keep)
    x_d = np.empty((n_keep, T + 1))
    bt0_d = np.empty((n_keep, T + 1))
    bt1_d = np.empty((n_keep, T + 1))
    bts_d = np.empty((n_keep, T + 1))
    b0_d = np.empty((n_keep, T + 1))
    b1_d = np.empty((n_keep, T + 1))
    bs_d = np.empty((n_keep, T + 1))
    ystar_d = np.empty((n_keep, n_miss))

    tau, mu0 = state.tau, state.mu0
    k = 0
    for it in range(1, config.n_iter + 1):
        tau, mu0, code, idx = _kernels.sweep_kernel(
            tau, mu0, state.x, state.bt0, state.bt1, state.bts,
            state.b0, state.b1, state.bs, state.y, state.missing_t,
            s, seasonal, hyp, rng, _kernels.FAULT_NONE)
        if code != _kernels.OK:
            raise NumericalError(
                f"iteration {it}: non-finite value produced by "
                f"{_kernels.ERR_NAMES[code]}"
                + (f" at t = {idx}" if idx >= 0 else ""))
        past = it - config.burn_in
        if past > 0 and past % config.thin == 0 and k < n_keep:
            tau_d[k] = tau
            mu0_d[k] = mu0
            x_d[k] = state.x
            bt0_d[k] = state.bt0
            bt1_d[k] = state.bt1
            bts_d[k] = state.bts
            b0_d[k] = state.b0
            b1_d[k] = state.b1
            bs_d[k] = state.bs
            ystar_d[k] = state.y[state.missing_t]
            k += 1

    return PosteriorDraws(
        tau=tau_d, mu0=mu0_d, x=x_d, bt0=bt0_d, bt1=bt1_d, bts=bts_d,
        b0=b0_d, b1=b1_d, bs=bs_d, ystar=ystar_d,
        missing_t=state.missing_t.copy(), config=config, kind=kind,
        xi0=state.xi0, period=data.period,
    )
