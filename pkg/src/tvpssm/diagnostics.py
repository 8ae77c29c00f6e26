"""Verification instruments and chain summaries.

Two instruments certify the sampler:

* The conditional grid oracle evaluates the joint log-density along a
  fine grid over one scalar coordinate, normalizes the slice numerically,
  and compares it with the closed-form conditional the sampler draws
  from.  Agreement ties every update to the joint.
* The joint-distribution test compares moments from exact forward
  simulation against a successive-conditional sampler (sweep, then
  re-simulate data).  Any wrong conditional shifts some moment.

Plus plain trace export to CSV and posterior summary statistics.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.special import logsumexp

from . import _kernels
from .gibbs import PosteriorDraws, conditional_params, tau_conditional
from .model import (
    Hyperparameters,
    ModelKind,
    SamplerState,
    TimeSeriesData,
    log_joint,
)

__all__ = [
    "OracleReport",
    "GewekeReport",
    "GEWEKE_STATISTICS",
    "geweke_test_hyper",
    "conditional_oracle_check",
    "oracle_targets",
    "run_oracle_suite",
    "geweke_joint_test",
    "trace_export",
    "summary_stats",
    "parse_quantity",
    "valid_quantities",
]

GRID_POINTS = 20_001
GRID_SPAN_SDS = 10.0

GEWEKE_STATISTICS = ("tau", "mu0", "x_mean", "bt1_mid", "b1_last", "y_period")

_NAME_RE = re.compile(r"^([a-z0-9_]+?)(?:\[(\d+)\])?$")


def parse_quantity(name: str) -> tuple[str, int | None]:
    """Split a quantity name like ``x[120]`` into (family, index)."""
    m = _NAME_RE.match(name.strip())
    if not m:
        raise ValueError(f"cannot parse quantity name {name!r}")
    base, idx = m.group(1), m.group(2)
    return base, (int(idx) if idx is not None else None)


def valid_quantities(draws: PosteriorDraws) -> list[str]:
    """Every selectable quantity name for a set of retained draws."""
    T = draws.n_time
    s = draws.period
    names = ["tau", "mu0"]
    names += [f"x[{t}]" for t in range(0, T + 1)]
    for fam in ("bt0", "bt1", "b0", "b1"):
        names += [f"{fam}[{t}]" for t in range(1, T + 1)]
    if draws.kind is ModelKind.SEASONAL:
        for fam in ("bts", "bs"):
            names += [f"{fam}[{t}]" for t in range(s, T + 1)]
    names += [f"ystar[{t}]" for t in draws.missing_t]
    return names


def _column(draws: PosteriorDraws, name: str) -> np.ndarray:
    base, idx = parse_quantity(name)
    T = draws.n_time
    s = draws.period
    if base == "tau" and idx is None:
        return draws.tau
    if base == "mu0" and idx is None:
        return draws.mu0
    if base == "x" and idx is not None and 0 <= idx <= T:
        return draws.x[:, idx]
    if base in ("bt0", "bt1", "b0", "b1") and idx is not None and 1 <= idx <= T:
        return getattr(draws, base)[:, idx]
    if (base in ("bts", "bs") and idx is not None and s <= idx <= T
            and draws.kind is ModelKind.SEASONAL):
        return getattr(draws, base)[:, idx]
    if base == "ystar" and idx is not None and idx in draws.missing_t:
        col = int(np.searchsorted(draws.missing_t, idx))
        return draws.ystar[:, col]
    raise KeyError(name)


@dataclass
class OracleReport:
    """Result of one grid-vs-analytic conditional comparison."""

    target: str
    t: int | None
    grid_lo: float
    grid_hi: float
    n_points: int
    max_abs_error: float
    mass_covered: float

    @property
    def ok(self) -> bool:
        return math.isfinite(self.max_abs_error) and self.max_abs_error < 1e-4


def conditional_oracle_check(
    state: SamplerState,
    data: TimeSeriesData,
    hyper: Hyperparameters,
    kind: ModelKind,
    target: str,
) -> OracleReport:
    """Compare one conditional against the grid-normalized joint slice.

    ``target`` names a scalar coordinate (``tau``, ``mu0``, ``x[t]``,
    ``bt0[t]``, ..., ``ystar[t]``).  Normal targets use a uniform grid of
    20,001 points spanning +-10 conditional standard deviations; tau uses
    a log-spaced grid over [mode/10, mode*10] against its Gamma form.
    The reported error is the max absolute log-density difference over
    grid points where the analytic density exceeds 1e-12.
    """
    base, t = parse_quantity(target)
    if base == "tau":
        return _oracle_tau(state, data, hyper, kind)
    if base == "x" and t == 0:
        base = "x0"

    work = state.copy()
    if base == "mu0":
        def setter(v):
            work.mu0 = v
    elif base == "x0":
        def setter(v):
            work.x[0] = v
    elif base in ("x", "bt0", "bt1", "bts", "b0", "b1", "bs"):
        arr = getattr(work, base)

        def setter(v):
            arr[t] = v
    elif base == "ystar":
        if t not in state.missing_t:
            raise ValueError(f"t = {t} is not a missing index")

        def setter(v):
            work.y[t] = v
    else:
        raise ValueError(f"unknown oracle target {target!r}")

    mean, var = conditional_params(state, data, hyper, kind,
                                   "x0" if base == "x0" else base, t)
    sd = math.sqrt(var)
    grid = np.linspace(mean - GRID_SPAN_SDS * sd, mean + GRID_SPAN_SDS * sd,
                       GRID_POINTS)
    logdens = np.empty(GRID_POINTS)
    for i in range(GRID_POINTS):
        setter(grid[i])
        logdens[i] = log_joint(work, data, hyper, kind)
    weights = np.full(GRID_POINTS, grid[1] - grid[0])
    weights[0] *= 0.5
    weights[-1] *= 0.5
    norm_log = logdens - logsumexp(logdens, b=weights)
    analytic = stats.norm.logpdf(grid, mean, sd)
    mask = np.exp(analytic) > 1e-12
    err = float(np.max(np.abs(norm_log[mask] - analytic[mask])))
    mass = float(stats.norm.cdf(GRID_SPAN_SDS) - stats.norm.cdf(-GRID_SPAN_SDS))
    return OracleReport(base, t, float(grid[0]), float(grid[-1]),
                        GRID_POINTS, err, mass)


def _oracle_tau(state, data, hyper, kind) -> OracleReport:
    shape, rate = tau_conditional(state, data, hyper, kind)
    mode = (shape - 1.0) / rate if shape > 1.0 else shape / rate
    grid = np.exp(np.linspace(math.log(mode / 10.0), math.log(mode * 10.0),
                              GRID_POINTS))
    work = state.copy()
    logdens = np.empty(GRID_POINTS)
    for i in range(GRID_POINTS):
        work.tau = grid[i]
        logdens[i] = log_joint(work, data, hyper, kind)
    weights = np.empty(GRID_POINTS)
    weights[1:-1] = (grid[2:] - grid[:-2]) / 2.0
    weights[0] = (grid[1] - grid[0]) / 2.0
    weights[-1] = (grid[-1] - grid[-2]) / 2.0
    norm_log = logdens - logsumexp(logdens, b=weights)
    analytic = stats.gamma.logpdf(grid, a=shape, scale=1.0 / rate)
    mask = np.exp(analytic) > 1e-12
    err = float(np.max(np.abs(norm_log[mask] - analytic[mask])))
    mass = float(stats.gamma.cdf(grid[-1], a=shape, scale=1.0 / rate)
                 - stats.gamma.cdf(grid[0], a=shape, scale=1.0 / rate))
    return OracleReport("tau", None, float(grid[0]), float(grid[-1]),
                        GRID_POINTS, err, mass)


@dataclass
class GewekeReport:
    """Z-scores comparing forward and successive-conditional moments."""

    statistics: tuple[str, ...]
    mean_forward: np.ndarray
    mean_successive: np.ndarray
    se: np.ndarray
    z: np.ndarray
    n_samples: int

    @property
    def max_abs_z(self) -> float:
        return float(np.max(np.abs(self.z)))

    @property
    def ok(self) -> bool:
        return bool(np.isfinite(self.z).all()) and self.max_abs_z < 4.0


def geweke_test_hyper() -> Hyperparameters:
    """Well-conditioned hyperparameters for the joint-distribution test.

    The test's algebra is identical at any hyperparameter values; these
    keep the forward-simulated paths tame (the production defaults put
    the slope anchors at 0.5 + 0.5, so wide coefficient walks produce
    explosive latent paths whose moments converge far too slowly for a
    5e4-sample moment comparison).
    """
    return Hyperparameters(
        a=20.0, b=20.0, c_mu=1.0, c_0=1.0,
        c_bt0=0.09, c_bt1=0.01, c_bts=0.01,
        c_b0=0.09, c_b1=0.01, c_bs=0.01,
        c_x=1.0, c_y=1.0, xi0=0.0,
    )


def _batch_mean_se(samples: np.ndarray, n_batches: int = 20) -> float:
    # Spectral-free SE for a correlated chain: variance of batch means.
    n = samples.shape[0]
    m = n // n_batches
    bm = samples[: n_batches * m].reshape(n_batches, m).mean(axis=1)
    return float(np.sqrt(bm.var(ddof=1) / n_batches))


def geweke_joint_test(
    hyper: Hyperparameters,
    kind: ModelKind,
    T_small: int,
    n_samples: int = 50_000,
    n_sweeps_per_sample: int = 15,
    seed: int = 0,
    period: int | None = None,
    _fault: int = _kernels.FAULT_NONE,
) -> GewekeReport:
    """Joint-distribution test of the full sweep against forward simulation.

    Arm A draws (parameters, latents, data) from the model n_samples
    times.  Arm B forward-simulates once, then alternates
    n_sweeps_per_sample Gibbs sweeps with a re-simulation of the data
    given the current parameters, recording after each cycle.  Reports a
    z-score per statistic (tau, the level, the latent-path mean, the
    state slope at the middle index, the observation slope at T, and the
    observation at t = period), with batch-mean standard errors for the
    correlated arm.  Requires a fixed xi0.

    ``_fault`` injects a deliberate corruption into the sweep (see
    ``_kernels.FAULT_B0_VARIANCE``); it exists so the harness's own
    sensitivity can be demonstrated.
    """
    if hyper.xi0 is None:
        raise ValueError("xi0 must be fixed for forward simulation")
    seasonal = kind is ModelKind.SEASONAL
    if period is None:
        period = 12 if seasonal else 2
    if seasonal and T_small < 2 * period + 2:
        raise ValueError(
            f"T_small must be at least 2*period+2 = {2 * period + 2}")
    if not seasonal and T_small < period + 2:
        raise ValueError(f"T_small must be at least {period + 2}")
    if n_samples < 1000:
        raise ValueError("n_samples must be at least 1000")

    hyp = hyper.as_array(hyper.xi0)
    ss_a, ss_b = np.random.SeedSequence(seed).spawn(2)
    stats_a = _kernels.geweke_forward_stats(
        n_samples, T_small, period, seasonal, hyp, np.random.default_rng(ss_a))
    stats_b = _kernels.geweke_successive_stats(
        n_samples, T_small, period, seasonal, hyp,
        np.random.default_rng(ss_b), n_sweeps_per_sample, _fault)

    mean_a = stats_a.mean(axis=0)
    mean_b = stats_b.mean(axis=0)
    se = np.empty(6)
    for j in range(6):
        se_a2 = stats_a[:, j].var(ddof=1) / n_samples
        se[j] = math.sqrt(se_a2 + _batch_mean_se(stats_b[:, j]) ** 2)
    z = (mean_a - mean_b) / se
    return GewekeReport(
        statistics=GEWEKE_STATISTICS, mean_forward=mean_a,
        mean_successive=mean_b, se=se, z=z, n_samples=n_samples,
    )


def _randomized_check_state(
    T: int,
    period: int,
    kind: ModelKind,
    hyper: Hyperparameters,
    seed: int,
    n_missing: int = 2,
) -> tuple[SamplerState, TimeSeriesData]:
    # A generic perturbed configuration: synthetic-ish data, the
    # deterministic start, then moderate noise on every coordinate so no
    # conditional sits at a special point.
    from .gibbs import init_chain

    rng = np.random.default_rng(np.random.SeedSequence(seed))
    values = 25.0 + rng.normal(0.0, 3.0, T)
    if n_missing > 0:
        miss = rng.choice(np.arange(period, T), size=n_missing, replace=False)
        values[miss] = np.nan
    data = TimeSeriesData(values, period=period, label=f"check-{seed}")
    state = init_chain(data, hyper, kind)
    state.tau = float(rng.gamma(5.0, 0.2))
    state.mu0 += rng.normal(0.0, 2.0)
    state.x += rng.normal(0.0, 2.0, T + 1)
    state.bt0[1:] += rng.normal(0.0, 0.5, T)
    state.bt1[1:] += rng.normal(0.0, 0.3, T)
    state.b0[1:] += rng.normal(0.0, 0.5, T)
    state.b1[1:] += rng.normal(0.0, 0.3, T)
    if kind is ModelKind.SEASONAL:
        state.bts[period:] += rng.normal(0.0, 0.3, T - period + 1)
        state.bs[period:] += rng.normal(0.0, 0.3, T - period + 1)
    state.y[state.missing_t] += rng.normal(0.0, 2.0, len(state.missing_t))
    return state, data


def oracle_targets(
    T: int,
    period: int,
    kind: ModelKind,
    missing_t,
    rng: np.random.Generator,
    boundary: bool = False,
) -> list[str]:
    """One target per conditional family, with randomized indices.

    The latent coordinate appears once per index regime (t < s,
    s <= t <= T-s, T-s < t < T, t = T).  With ``boundary`` the
    coefficient targets sit at t = T, exercising the truncated successor
    rule; otherwise their indices are random interior ones.
    """
    s = period
    targets = ["tau", "mu0", "x[0]"]
    targets.append(f"x[{rng.integers(1, s)}]")
    targets.append(f"x[{rng.integers(s, T - s + 1)}]")
    targets.append(f"x[{rng.integers(T - s + 1, T)}]")
    targets.append(f"x[{T}]")
    coeff_t = T if boundary else int(rng.integers(1, T))
    seas_t = T if boundary else int(rng.integers(s, T))
    for fam in ("bt0", "bt1", "b0", "b1"):
        targets.append(f"{fam}[{coeff_t}]")
    if kind is ModelKind.SEASONAL:
        targets.append(f"bts[{seas_t}]")
        targets.append(f"bs[{seas_t}]")
    if len(missing_t) > 0:
        pick = int(rng.choice(np.asarray(missing_t)))
        targets.append(f"ystar[{pick}]")
    return targets


def run_oracle_suite(
    n_states: int = 20,
    T: int = 26,
    period: int = 12,
    kind: ModelKind = ModelKind.SEASONAL,
    hyper: Hyperparameters | None = None,
    seed: int = 0,
) -> list[OracleReport]:
    """Grid-check every conditional family at n_states randomized states.

    Each state exercises every family once; the first state pins the
    coefficient targets at t = T so the boundary rule is always covered.
    """
    if hyper is None:
        hyper = Hyperparameters(xi0=25.0)
    reports = []
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    for rep in range(n_states):
        state, data = _randomized_check_state(
            T, period, kind, hyper, seed=seed + 1000 + rep)
        for target in oracle_targets(T, period, kind, state.missing_t, rng,
                                     boundary=(rep == 0)):
            reports.append(
                conditional_oracle_check(state, data, hyper, kind, target))
    return reports


def trace_export(draws: PosteriorDraws, selection, destination) -> None:
    """Write selected quantities to CSV, one row per retained draw.

    Values are written with 17 significant digits so a read-back
    reproduces the float64 values exactly.  Unknown names raise with the
    list of valid names; an empty selection is an error.
    """
    selection = list(selection)
    if not selection:
        raise ValueError("empty trace selection: nothing to write")
    cols = []
    for name in selection:
        try:
            cols.append(_column(draws, name))
        except (KeyError, ValueError):
            valid = valid_quantities(draws)
            preview = ", ".join(valid[:8])
            raise ValueError(
                f"unknown quantity {name!r}; valid names are e.g. {preview}, "
                f"... ({len(valid)} total)"
            ) from None
    with open(destination, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(selection) + "\n")
        for i in range(draws.n_draws):
            fh.write(",".join(f"{col[i]:.17g}" for col in cols) + "\n")


class SummaryStats:
    """Mean, sd, and (0.025, 0.5, 0.975) quantiles of one retained quantity."""

    def __init__(self, mean, sd, q025, median, q975):
        self.mean = mean
        self.sd = sd
        self.q025 = q025
        self.median = median
        self.q975 = q975

    def __repr__(self):
        return (f"SummaryStats(mean={self.mean:.6g}, sd={self.sd:.6g}, "
                f"q025={self.q025:.6g}, median={self.median:.6g}, "
                f"q975={self.q975:.6g})")


def summary_stats(draws: PosteriorDraws, quantity: str) -> SummaryStats:
    """Posterior summary of one retained quantity (trace-name grammar)."""
    try:
        col = _column(draws, quantity)
    except (KeyError, ValueError):
        raise ValueError(f"unknown quantity {quantity!r}") from None
    q = np.quantile(col, [0.025, 0.5, 0.975])
    return SummaryStats(float(col.mean()), float(col.std(ddof=0)),
                        float(q[0]), float(q[1]), float(q[2]))
