"""Domain types and the exact joint log-density of the seasonal TVP state-space model.

The model couples an observation equation and a latent transition equation,
both with time-varying coefficients that follow variance-decaying random
walks, plus a seasonal lag term that enters both equations from time
``t = period`` onward:

    Y_t = b0_t + b1_t * X_t + bs_t * X_{t-s} + eps_t        (t >= s)
    X_t = bt0_t + bt1_t * X_{t-1} + bts_t * X_{t-s} + eta_t (t >= s)

For ``t < s`` the seasonal terms are absent.  All noise variances are
scalings of a single precision ``tau``: the transition noise has variance
``c_x / tau``, the observation noise ``c_y / tau``, and each coefficient's
step-t random-walk increment has variance ``scale * c / tau`` where
``scale`` decays as ``1/t**2`` (non-seasonal paths) or ``1/(t-s+1)**2``
(seasonal paths).  The decay makes the marginal coefficient variances
converge, since sum(1/t**2) is bounded by pi**2/6.

Everything in this module is a plain value or a pure function; it is the
ground truth that the Gibbs conditionals in :mod:`tvpssm.gibbs` are
verified against.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterator, NamedTuple

import numpy as np

from . import _kernels

__all__ = [
    "ModelKind",
    "TimeSeriesData",
    "Hyperparameters",
    "McmcConfig",
    "SamplerState",
    "PathKind",
    "INTERCEPT_ANCHOR",
    "SLOPE_ANCHOR",
    "SEASONAL_ANCHOR",
    "empirical_bayes_xi0",
    "prior_step_scale",
    "log_joint",
    "GaussianFactor",
    "gaussian_factors",
    "count_gaussian_factors",
]

LOG_2PI = math.log(2.0 * math.pi)

# Boundary constants of the coefficient paths.  Intercept paths start at 0,
# slope paths at 0.5; seasonal paths are pinned to 0 for t < s-1 and to 0.5
# at t = s-1, and evolve freely from t = s.
INTERCEPT_ANCHOR = 0.0
SLOPE_ANCHOR = 0.5
SEASONAL_ANCHOR = 0.5


class ModelKind(Enum):
    """Seasonal model or the non-seasonal baseline variant.

    Baseline drops the seasonal lag from both equations; its states keep
    the seasonal coefficient arrays identically zero and nothing ever
    reads them.
    """

    SEASONAL = "seasonal"
    BASELINE = "baseline"


class PathKind(Enum):
    """The six time-varying coefficient paths."""

    STATE_INTERCEPT = "state_intercept"
    STATE_SLOPE = "state_slope"
    STATE_SEASONAL = "state_seasonal"
    OBS_INTERCEPT = "obs_intercept"
    OBS_SLOPE = "obs_slope"
    OBS_SEASONAL = "obs_seasonal"


@dataclass
class TimeSeriesData:
    """A univariate series Y_1..Y_T with optional missing values.

    Parameters
    ----------
    values : array_like
        Observations in time order; ``nan`` marks a missing value.
        ``values[i]`` is the observation at time ``t = i + 1``.
    period : int
        Season length ``s`` (months per cycle for monthly data).
    label : str
        Free-text identifier carried through to outputs.
    """

    values: np.ndarray
    period: int = 12
    label: str = ""

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1:
            raise ValueError("values must be one-dimensional")
        if self.period < 2:
            raise ValueError(f"period must be >= 2, got {self.period}")
        if self.n < 2 * self.period + 2:
            raise ValueError(
                f"series length {self.n} is too short: need at least "
                f"2*period+2 = {2 * self.period + 2} points"
            )
        if not np.isfinite(self.values).any():
            raise ValueError("empty series: every value is missing")

    @property
    def n(self) -> int:
        """Number of time points T."""
        return self.values.shape[0]

    @property
    def missing_mask(self) -> np.ndarray:
        return ~np.isfinite(self.values)

    @property
    def missing_t(self) -> np.ndarray:
        """Sorted 1-based time indices of missing observations."""
        return np.flatnonzero(self.missing_mask).astype(np.int64) + 1

    @property
    def n_missing(self) -> int:
        return int(self.missing_mask.sum())


@dataclass(frozen=True)
class Hyperparameters:
    """Prior constants.  Defaults are the reference values used throughout.

    ``a`` and ``b`` are the Gamma shape and rate of the precision prior;
    the ``c_*`` constants scale the variances of, respectively: the
    initial-level prior (``c_mu``), the initial latent value (``c_0``),
    the six coefficient random walks, the transition noise (``c_x``) and
    the observation noise (``c_y``).  ``xi0`` is the prior mean of the
    initial level; ``None`` selects the empirical-Bayes policy of using
    the mean of the observed values.
    """

    a: float = 0.01
    b: float = 0.01
    c_mu: float = 100.0
    c_0: float = 100.0
    c_bt0: float = 100.0
    c_bt1: float = 1.0
    c_bts: float = 1.0
    c_b0: float = 100.0
    c_b1: float = 1.0
    c_bs: float = 1.0
    c_x: float = 200.0
    c_y: float = 200.0
    xi0: float | None = None

    def __post_init__(self):
        for name in ("a", "b", "c_mu", "c_0", "c_bt0", "c_bt1", "c_bts",
                     "c_b0", "c_b1", "c_bs", "c_x", "c_y"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"hyperparameter {name} must be a positive real, got {v}")
        if self.xi0 is not None and not math.isfinite(self.xi0):
            raise ValueError("xi0 must be finite when fixed")

    def resolve_xi0(self, data: TimeSeriesData) -> float:
        """The initial-level prior mean: fixed value or empirical mean."""
        if self.xi0 is not None:
            return float(self.xi0)
        return empirical_bayes_xi0(data)

    def with_overrides(self, **kwargs) -> "Hyperparameters":
        return replace(self, **kwargs)

    def as_array(self, xi0: float) -> np.ndarray:
        """Pack into the flat layout the numba kernels consume."""
        return np.array(
            [self.a, self.b, self.c_mu, self.c_0, self.c_bt0, self.c_bt1,
             self.c_bts, self.c_b0, self.c_b1, self.c_bs, self.c_x, self.c_y,
             xi0],
            dtype=np.float64,
        )


@dataclass(frozen=True)
class McmcConfig:
    """Chain length, burn-in, thinning and seed."""

    n_iter: int = 50_000
    burn_in: int = 30_000
    thin: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.n_iter < 1:
            raise ValueError("n_iter must be positive")
        if self.burn_in < 0:
            raise ValueError("burn_in must be nonnegative")
        if self.burn_in >= self.n_iter:
            raise ValueError(
                f"burn_in ({self.burn_in}) must be smaller than n_iter ({self.n_iter})"
            )
        if self.thin < 1:
            raise ValueError("thin must be a positive integer")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        if self.n_retained < 100:
            warnings.warn(
                f"only {self.n_retained} draws will be retained; posterior "
                "summaries want at least 100",
                stacklevel=2,
            )

    @property
    def n_retained(self) -> int:
        return (self.n_iter - self.burn_in) // self.thin


@dataclass
class SamplerState:
    """One full configuration of every sampled quantity.

    All path arrays have length ``T + 1`` and are indexed by time ``t``
    directly: ``x[0]`` is the initial latent value, ``bt0[0]`` etc. hold
    the immutable anchors, and seasonal arrays are zero below ``t = s - 1``
    with the 0.5 anchor at ``t = s - 1``.  ``y`` is the working
    observation vector with imputed values substituted at the missing
    indices; ``y[0]`` is an unused nan sentinel.

    ``period``, ``kind``, ``xi0`` and ``missing_t`` are structural
    metadata fixed at construction; they make the state self-describing.
    """

    tau: float
    mu0: float
    x: np.ndarray
    bt0: np.ndarray
    bt1: np.ndarray
    bts: np.ndarray
    b0: np.ndarray
    b1: np.ndarray
    bs: np.ndarray
    y: np.ndarray
    missing_t: np.ndarray
    period: int
    kind: ModelKind
    xi0: float

    @property
    def n_time(self) -> int:
        """T, the number of observed time points."""
        return self.x.shape[0] - 1

    @property
    def imputed(self) -> np.ndarray:
        """Current imputed values at the missing indices, in index order."""
        return self.y[self.missing_t]

    def copy(self) -> "SamplerState":
        return SamplerState(
            tau=self.tau, mu0=self.mu0,
            x=self.x.copy(), bt0=self.bt0.copy(), bt1=self.bt1.copy(),
            bts=self.bts.copy(), b0=self.b0.copy(), b1=self.b1.copy(),
            bs=self.bs.copy(), y=self.y.copy(),
            missing_t=self.missing_t.copy(), period=self.period,
            kind=self.kind, xi0=self.xi0,
        )

    def check_consistent(self, data: TimeSeriesData) -> None:
        T = data.n
        for name in ("x", "bt0", "bt1", "bts", "b0", "b1", "bs", "y"):
            arr = getattr(self, name)
            if arr.shape != (T + 1,):
                raise ValueError(
                    f"state array {name} has shape {arr.shape}, expected ({T + 1},)"
                )
        if self.period != data.period:
            raise ValueError(
                f"state period {self.period} != data period {data.period}"
            )
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")


def empirical_bayes_xi0(series: TimeSeriesData) -> float:
    """Arithmetic mean of the non-missing observations.

    Used as the default prior mean of the initial level so the model is
    automatic on any series.
    """
    finite = series.values[np.isfinite(series.values)]
    if finite.size == 0:
        raise ValueError("empty series: every value is missing")
    return float(finite.mean())


_PATH_SCALES = {
    PathKind.STATE_INTERCEPT: ("c_bt0", False),
    PathKind.STATE_SLOPE: ("c_bt1", False),
    PathKind.STATE_SEASONAL: ("c_bts", True),
    PathKind.OBS_INTERCEPT: ("c_b0", False),
    PathKind.OBS_SLOPE: ("c_b1", False),
    PathKind.OBS_SEASONAL: ("c_bs", True),
}


def prior_step_scale(
    path_kind: PathKind | str,
    t: int,
    hyper: Hyperparameters,
    period: int = 12,
) -> float:
    """Variance multiplier of the step-t random-walk increment of a path.

    The increment at step t has variance ``prior_step_scale(...) / tau``:
    ``c / t**2`` for the non-seasonal paths (valid from t = 1) and
    ``c / (t - s + 1)**2`` for the seasonal paths (valid from t = s, so
    the first seasonal step carries multiplier ``c``).  There is no upper
    bound on ``t``; forecasting continues the same decay past T.
    """
    kind = PathKind(path_kind)
    c_name, seasonal = _PATH_SCALES[kind]
    c = getattr(hyper, c_name)
    if seasonal:
        u = t - period + 1
        if u < 1:
            raise ValueError(
                f"{kind.value} increments start at t = {period}, got t = {t}"
            )
        return c / float(u * u)
    if t < 1:
        raise ValueError(f"{kind.value} increments start at t = 1, got t = {t}")
    return c / float(t * t)


class GaussianFactor(NamedTuple):
    """One Gaussian factor of the joint density.

    The factor is N(residual; 0, var_multiplier / tau).  ``name`` labels
    the family, ``t`` the time index (0 for the two initial factors).
    """

    name: str
    t: int
    residual: float
    var_multiplier: float


def gaussian_factors(
    state: SamplerState,
    data: TimeSeriesData,
    hyper: Hyperparameters,
    kind: ModelKind,
) -> Iterator[GaussianFactor]:
    """Enumerate every Gaussian factor of the joint density, one by one.

    This is the slow, term-by-term reference used to verify the compiled
    joint density and to count factors; it deliberately shares no code
    with the kernels.  Seasonal factors exist only for ``t >= s`` and
    only under the seasonal kind; nothing here reads the seasonal arrays
    for the baseline kind.
    """
    state.check_consistent(data)
    T = data.n
    s = data.period
    seasonal = kind is ModelKind.SEASONAL
    x, y = state.x, state.y

    yield GaussianFactor("mu0", 0, state.mu0 - state.xi0, hyper.c_mu)
    yield GaussianFactor("x0", 0, x[0] - state.mu0, hyper.c_0)
    for t in range(1, T + 1):
        yield GaussianFactor(
            "bt0", t, state.bt0[t] - state.bt0[t - 1],
            prior_step_scale(PathKind.STATE_INTERCEPT, t, hyper, s))
        yield GaussianFactor(
            "bt1", t, state.bt1[t] - state.bt1[t - 1],
            prior_step_scale(PathKind.STATE_SLOPE, t, hyper, s))
        if seasonal and t >= s:
            yield GaussianFactor(
                "bts", t, state.bts[t] - state.bts[t - 1],
                prior_step_scale(PathKind.STATE_SEASONAL, t, hyper, s))
        trans_mean = state.bt0[t] + state.bt1[t] * x[t - 1]
        if seasonal and t >= s:
            trans_mean += state.bts[t] * x[t - s]
        yield GaussianFactor("trans", t, x[t] - trans_mean, hyper.c_x)
        yield GaussianFactor(
            "b0", t, state.b0[t] - state.b0[t - 1],
            prior_step_scale(PathKind.OBS_INTERCEPT, t, hyper, s))
        yield GaussianFactor(
            "b1", t, state.b1[t] - state.b1[t - 1],
            prior_step_scale(PathKind.OBS_SLOPE, t, hyper, s))
        if seasonal and t >= s:
            yield GaussianFactor(
                "bs", t, state.bs[t] - state.bs[t - 1],
                prior_step_scale(PathKind.OBS_SEASONAL, t, hyper, s))
        obs_mean = state.b0[t] + state.b1[t] * x[t]
        if seasonal and t >= s:
            obs_mean += state.bs[t] * x[t - s]
        yield GaussianFactor("obs", t, y[t] - obs_mean, hyper.c_y)


def count_gaussian_factors(T: int, period: int, kind: ModelKind) -> int:
    """Number of Gaussian factors in the joint, counted from the factor list."""
    dummy = _zero_state(T, period, kind)
    data = TimeSeriesData(np.zeros(T), period=period, label="count")
    return sum(1 for _ in gaussian_factors(dummy, data, Hyperparameters(xi0=0.0), kind))


def _zero_state(T: int, period: int, kind: ModelKind) -> SamplerState:
    # All-zero residual state (anchors propagated), used for structural counting.
    z = np.zeros(T + 1)
    slope = np.full(T + 1, SLOPE_ANCHOR)
    seas = np.zeros(T + 1)
    if kind is ModelKind.SEASONAL:
        seas[period - 1:] = SEASONAL_ANCHOR
    x = np.zeros(T + 1)
    y = np.zeros(T + 1)
    for t in range(1, T + 1):
        m = slope[t] * x[t - 1]
        if kind is ModelKind.SEASONAL and t >= period:
            m += seas[t] * x[t - period]
        x[t] = m
        y[t] = slope[t] * x[t]
        if kind is ModelKind.SEASONAL and t >= period:
            y[t] += seas[t] * x[t - period]
    y[0] = np.nan
    return SamplerState(
        tau=1.0, mu0=0.0, x=x, bt0=z.copy(), bt1=slope.copy(),
        bts=seas.copy(), b0=z.copy(), b1=slope.copy(), bs=seas.copy(),
        y=y, missing_t=np.empty(0, dtype=np.int64), period=period,
        kind=kind, xi0=0.0,
    )


def log_joint(
    state: SamplerState,
    data: TimeSeriesData,
    hyper: Hyperparameters,
    kind: ModelKind,
) -> float:
    """Unnormalized log joint density of the state given the data.

    Convention: the Gamma prior on tau enters with its full log-density;
    every Gaussian factor enters with its log-density plus ``log(2*pi)/2``
    (i.e. only the 2*pi constants are dropped).  All tau-dependent
    normalizers are kept exactly, so slices of this function normalize to
    the true full conditionals.  Missing observations contribute through
    their current imputed values in ``state.y``.
    """
    state.check_consistent(data)
    return float(_kernels.log_joint_kernel(
        state.tau, state.mu0, state.x, state.bt0, state.bt1, state.bts,
        state.b0, state.b1, state.bs, state.y,
        data.period, kind is ModelKind.SEASONAL,
        hyper.as_array(state.xi0),
    ))
