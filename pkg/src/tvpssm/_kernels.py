"""Compiled kernels for the Gibbs sampler and the joint log-density.

Everything here operates on plain float64 arrays indexed by time t
directly: path arrays have length T+1 with t=0 holding the anchors (or
X_0), and y[0] is an unused sentinel.  ``hyp`` is the flat hyperparameter
layout produced by ``Hyperparameters.as_array``:

    0 a, 1 b, 2 c_mu, 3 c_0, 4 c_bt0, 5 c_bt1, 6 c_bts,
    7 c_b0, 8 c_b1, 9 c_bs, 10 c_x, 11 c_y, 12 xi0

``seasonal`` selects between the seasonal model and the non-seasonal
baseline; baseline code paths never touch the bts/bs arrays.  Conditional
variances are assembled as reciprocals of accumulated precisions, all in
float64 (the random-walk weights stay below (T+1)**2 ~ 1e5, far from any
precision cliff).
"""

import math

import numpy as np
from numba import njit

A, B, CMU, C0, CBT0, CBT1, CBTS, CB0, CB1, CBS, CX, CY, XI0 = range(13)

# Non-finite scan codes returned by sweep_kernel.
OK, ERR_TAU, ERR_MU0, ERR_X, ERR_BT0, ERR_BT1, ERR_BTS, ERR_B0, ERR_B1, \
    ERR_BS, ERR_YSTAR = range(11)

ERR_NAMES = {
    ERR_TAU: "update_tau", ERR_MU0: "update_mu0", ERR_X: "update_latent",
    ERR_BT0: "update_state_coeff[intercept]",
    ERR_BT1: "update_state_coeff[slope]",
    ERR_BTS: "update_state_coeff[seasonal]",
    ERR_B0: "update_obs_coeff[intercept]",
    ERR_B1: "update_obs_coeff[slope]",
    ERR_BS: "update_obs_coeff[seasonal]",
    ERR_YSTAR: "impute_missing",
}

# Fault-injection switch for the sampler self-test harness: 1 doubles the
# variance of every obs-intercept draw.  Production callers pass 0.
FAULT_NONE = 0
FAULT_B0_VARIANCE = 1


@njit(cache=True)
def n_gaussian(T, s, seasonal):
    """Number of Gaussian factors in the joint density."""
    if seasonal:
        return 8 * T - 2 * s + 4
    return 6 * T + 2


@njit(cache=True)
def weighted_quad(mu0, x, bt0, bt1, bts, b0, b1, bs, y, s, seasonal, hyp):
    """Sum of squared residuals over variance multipliers, all factors."""
    T = x.shape[0] - 1
    q = (mu0 - hyp[XI0]) ** 2 / hyp[CMU]
    q += (x[0] - mu0) ** 2 / hyp[C0]
    for t in range(1, T + 1):
        w = float(t * t)
        q += w * (bt0[t] - bt0[t - 1]) ** 2 / hyp[CBT0]
        q += w * (bt1[t] - bt1[t - 1]) ** 2 / hyp[CBT1]
        q += w * (b0[t] - b0[t - 1]) ** 2 / hyp[CB0]
        q += w * (b1[t] - b1[t - 1]) ** 2 / hyp[CB1]
        tm = bt0[t] + bt1[t] * x[t - 1]
        om = b0[t] + b1[t] * x[t]
        if seasonal and t >= s:
            u = float(t - s + 1)
            wu = u * u
            q += wu * (bts[t] - bts[t - 1]) ** 2 / hyp[CBTS]
            q += wu * (bs[t] - bs[t - 1]) ** 2 / hyp[CBS]
            tm += bts[t] * x[t - s]
            om += bs[t] * x[t - s]
        q += (x[t] - tm) ** 2 / hyp[CX]
        q += (y[t] - om) ** 2 / hyp[CY]
    return q


@njit(cache=True)
def log_var_const(T, s, seasonal, hyp):
    """Sum of log variance multipliers over all Gaussian factors."""
    total = math.log(hyp[CMU]) + math.log(hyp[C0])
    total += T * (math.log(hyp[CBT0]) + math.log(hyp[CBT1])
                  + math.log(hyp[CB0]) + math.log(hyp[CB1])
                  + math.log(hyp[CX]) + math.log(hyp[CY]))
    for t in range(1, T + 1):
        total -= 4.0 * math.log(float(t * t))  # the four t^-2 walks
    if seasonal:
        n_seas = T - s + 1
        total += n_seas * (math.log(hyp[CBTS]) + math.log(hyp[CBS]))
        for t in range(s, T + 1):
            u = float(t - s + 1)
            total -= 2.0 * math.log(u * u)
    return total


@njit(cache=True)
def log_joint_kernel(tau, mu0, x, bt0, bt1, bts, b0, b1, bs, y, s, seasonal, hyp):
    """Unnormalized log joint; only 2*pi constants are dropped."""
    T = x.shape[0] - 1
    nq = n_gaussian(T, s, seasonal)
    quad = weighted_quad(mu0, x, bt0, bt1, bts, b0, b1, bs, y, s, seasonal, hyp)
    lj = hyp[A] * math.log(hyp[B]) - math.lgamma(hyp[A])
    lj += (hyp[A] - 1.0) * math.log(tau) - hyp[B] * tau
    lj += 0.5 * nq * math.log(tau)
    lj -= 0.5 * log_var_const(T, s, seasonal, hyp)
    lj -= 0.5 * tau * quad
    return lj


@njit(cache=True)
def tau_shape_rate(mu0, x, bt0, bt1, bts, b0, b1, bs, y, s, seasonal, hyp):
    T = x.shape[0] - 1
    shape = hyp[A] + 0.5 * n_gaussian(T, s, seasonal)
    rate = hyp[B] + 0.5 * weighted_quad(
        mu0, x, bt0, bt1, bts, b0, b1, bs, y, s, seasonal, hyp)
    return shape, rate


@njit(cache=True)
def cond_mu0(x0, tau, hyp):
    p = 1.0 / hyp[CMU] + 1.0 / hyp[C0]
    m = (hyp[XI0] / hyp[CMU] + x0 / hyp[C0]) / p
    return m, 1.0 / (p * tau)


@njit(cache=True)
def cond_x0(tau, mu0, x, bt0, bt1, bts, b0, b1, bs, y, s, seasonal, hyp):
    # X_0 couples to X_1 through the first transition, and (seasonal only)
    # to X_s and Y_s as their lag-s regressor.
    p = 1.0 / hyp[C0]
    num = mu0 / hyp[C0]
    p += bt1[1] * bt1[1] / hyp[CX]
    num += bt1[1] * (x[1] - bt0[1]) / hyp[CX]
    if seasonal:
        p += bts[s] * bts[s] / hyp[CX] + bs[s] * bs[s] / hyp[CY]
        num += bts[s] * (x[s] - bt0[s] - bt1[s] * x[s - 1]) / hyp[CX]
        num += bs[s] * (y[s] - b0[s] - b1[s] * x[s]) / hyp[CY]
    return num / p, 1.0 / (p * tau)


@njit(cache=True)
def cond_x(t, tau, x, bt0, bt1, bts, b0, b1, bs, y, s, seasonal, hyp):
    # X_t appears in: its own transition, the t+1 and t+s transitions,
    # its own observation, and the t+s observation.  Terms indexed past T
    # do not exist in the joint and are dropped.
    T = x.shape[0] - 1
    own = bt0[t] + bt1[t] * x[t - 1]
    if seasonal and t >= s:
        own += bts[t] * x[t - s]
    p = 1.0 / hyp[CX]
    num = own / hyp[CX]
    if t + 1 <= T:
        r = x[t + 1] - bt0[t + 1]
        if seasonal and t + 1 >= s:
            r -= bts[t + 1] * x[t + 1 - s]
        p += bt1[t + 1] * bt1[t + 1] / hyp[CX]
        num += bt1[t + 1] * r / hyp[CX]
    r = y[t] - b0[t]
    if seasonal and t >= s:
        r -= bs[t] * x[t - s]
    p += b1[t] * b1[t] / hyp[CY]
    num += b1[t] * r / hyp[CY]
    if seasonal and t + s <= T:
        r = x[t + s] - bt0[t + s] - bt1[t + s] * x[t + s - 1]
        p += bts[t + s] * bts[t + s] / hyp[CX]
        num += bts[t + s] * r / hyp[CX]
        r = y[t + s] - b0[t + s] - b1[t + s] * x[t + s]
        p += bs[t + s] * bs[t + s] / hyp[CY]
        num += bs[t + s] * r / hyp[CY]
    return num / p, 1.0 / (p * tau)


@njit(cache=True)
def _cond_walk(c, w_own, w_succ, prev, succ, reg, resid, c_noise, tau):
    # Shared form of all six coefficient conditionals: two smoothing
    # terms from the random-walk increments (the successor weight is 0 at
    # t = T, where that factor does not exist) plus one likelihood term
    # with regressor `reg` against the partial residual `resid`.
    p = (w_own + w_succ) / c + reg * reg / c_noise
    num = (w_own * prev + w_succ * succ) / c + reg * resid / c_noise
    return num / p, 1.0 / (p * tau)


@njit(cache=True)
def cond_state_coeff(which, t, tau, x, bt0, bt1, bts, b0, b1, bs, y,
                     s, seasonal, hyp):
    """Conditional of bt0/bt1/bts at t; which: 0 intercept, 1 slope, 2 seasonal."""
    T = x.shape[0] - 1
    seas_term = bts[t] * x[t - s] if (seasonal and t >= s) else 0.0
    if which == 0:
        w_own = float(t * t)
        w_succ = float((t + 1) * (t + 1)) if t < T else 0.0
        succ = bt0[t + 1] if t < T else 0.0
        resid = x[t] - bt1[t] * x[t - 1] - seas_term
        return _cond_walk(hyp[CBT0], w_own, w_succ, bt0[t - 1], succ,
                          1.0, resid, hyp[CX], tau)
    if which == 1:
        w_own = float(t * t)
        w_succ = float((t + 1) * (t + 1)) if t < T else 0.0
        succ = bt1[t + 1] if t < T else 0.0
        resid = x[t] - bt0[t] - seas_term
        return _cond_walk(hyp[CBT1], w_own, w_succ, bt1[t - 1], succ,
                          x[t - 1], resid, hyp[CX], tau)
    u = float(t - s + 1)
    w_own = u * u
    w_succ = (u + 1.0) * (u + 1.0) if t < T else 0.0
    succ = bts[t + 1] if t < T else 0.0
    resid = x[t] - bt0[t] - bt1[t] * x[t - 1]
    return _cond_walk(hyp[CBTS], w_own, w_succ, bts[t - 1], succ,
                      x[t - s], resid, hyp[CX], tau)


@njit(cache=True)
def cond_obs_coeff(which, t, tau, x, bt0, bt1, bts, b0, b1, bs, y,
                   s, seasonal, hyp):
    """Conditional of b0/b1/bs at t; which: 0 intercept, 1 slope, 2 seasonal."""
    T = x.shape[0] - 1
    seas_term = bs[t] * x[t - s] if (seasonal and t >= s) else 0.0
    if which == 0:
        w_own = float(t * t)
        w_succ = float((t + 1) * (t + 1)) if t < T else 0.0
        succ = b0[t + 1] if t < T else 0.0
        resid = y[t] - b1[t] * x[t] - seas_term
        return _cond_walk(hyp[CB0], w_own, w_succ, b0[t - 1], succ,
                          1.0, resid, hyp[CY], tau)
    if which == 1:
        w_own = float(t * t)
        w_succ = float((t + 1) * (t + 1)) if t < T else 0.0
        succ = b1[t + 1] if t < T else 0.0
        resid = y[t] - b0[t] - seas_term
        return _cond_walk(hyp[CB1], w_own, w_succ, b1[t - 1], succ,
                          x[t], resid, hyp[CY], tau)
    u = float(t - s + 1)
    w_own = u * u
    w_succ = (u + 1.0) * (u + 1.0) if t < T else 0.0
    succ = bs[t + 1] if t < T else 0.0
    resid = y[t] - b0[t] - b1[t] * x[t]
    return _cond_walk(hyp[CBS], w_own, w_succ, bs[t - 1], succ,
                      x[t - s], resid, hyp[CY], tau)


@njit(cache=True)
def cond_ystar(t, tau, x, b0, b1, bs, s, seasonal, hyp):
    m = b0[t] + b1[t] * x[t]
    if seasonal and t >= s:
        m += bs[t] * x[t - s]
    return m, hyp[CY] / tau


@njit(cache=True)
def _scan_nonfinite(tau, mu0, x, bt0, bt1, bts, b0, b1, bs, y, missing_t,
                    s, seasonal):
    T = x.shape[0] - 1
    if not math.isfinite(tau):
        return ERR_TAU, -1
    if not math.isfinite(mu0):
        return ERR_MU0, -1
    for t in range(0, T + 1):
        if not math.isfinite(x[t]):
            return ERR_X, t
    for t in range(1, T + 1):
        if not math.isfinite(bt0[t]):
            return ERR_BT0, t
        if not math.isfinite(bt1[t]):
            return ERR_BT1, t
        if not math.isfinite(b0[t]):
            return ERR_B0, t
        if not math.isfinite(b1[t]):
            return ERR_B1, t
    if seasonal:
        for t in range(s, T + 1):
            if not math.isfinite(bts[t]):
                return ERR_BTS, t
            if not math.isfinite(bs[t]):
                return ERR_BS, t
    for i in range(missing_t.shape[0]):
        if not math.isfinite(y[missing_t[i]]):
            return ERR_YSTAR, missing_t[i]
    return OK, -1


@njit(cache=True)
def sweep_kernel(tau, mu0, x, bt0, bt1, bts, b0, b1, bs, y, missing_t,
                 s, seasonal, hyp, rng, fault):
    """One deterministic Gibbs scan; mutates arrays in place.

    Update order: tau; mu0; X_0; X_t for t=1..T; (bt0_t, bt1_t) for
    t=1..T; bts_t for t=s..T; (b0_t, b1_t) for t=1..T; bs_t for t=s..T;
    imputed Y at each missing index.  Returns (tau, mu0, code, idx) where
    code identifies the first non-finite coordinate, if any.
    """
    T = x.shape[0] - 1
    shape, rate = tau_shape_rate(mu0, x, bt0, bt1, bts, b0, b1, bs, y,
                                 s, seasonal, hyp)
    if not (rate > 0.0 and math.isfinite(rate)):
        return tau, mu0, ERR_TAU, -1
    tau = rng.gamma(shape, 1.0 / rate)

    m, v = cond_mu0(x[0], tau, hyp)
    mu0 = rng.normal(m, math.sqrt(v))

    m, v = cond_x0(tau, mu0, x, bt0, bt1, bts, b0, b1, bs, y, s, seasonal, hyp)
    x[0] = rng.normal(m, math.sqrt(v))

    for t in range(1, T + 1):
        m, v = cond_x(t, tau, x, bt0, bt1, bts, b0, b1, bs, y, s, seasonal, hyp)
        x[t] = rng.normal(m, math.sqrt(v))

    for t in range(1, T + 1):
        m, v = cond_state_coeff(0, t, tau, x, bt0, bt1, bts, b0, b1, bs, y,
                                s, seasonal, hyp)
        bt0[t] = rng.normal(m, math.sqrt(v))
        m, v = cond_state_coeff(1, t, tau, x, bt0, bt1, bts, b0, b1, bs, y,
                                s, seasonal, hyp)
        bt1[t] = rng.normal(m, math.sqrt(v))
    if seasonal:
        for t in range(s, T + 1):
            m, v = cond_state_coeff(2, t, tau, x, bt0, bt1, bts, b0, b1, bs, y,
                                    s, seasonal, hyp)
            bts[t] = rng.normal(m, math.sqrt(v))

    for t in range(1, T + 1):
        m, v = cond_obs_coeff(0, t, tau, x, bt0, bt1, bts, b0, b1, bs, y,
                              s, seasonal, hyp)
        if fault == FAULT_B0_VARIANCE:
            v *= 2.0
        b0[t] = rng.normal(m, math.sqrt(v))
        m, v = cond_obs_coeff(1, t, tau, x, bt0, bt1, bts, b0, b1, bs, y,
                              s, seasonal, hyp)
        b1[t] = rng.normal(m, math.sqrt(v))
    if seasonal:
        for t in range(s, T + 1):
            m, v = cond_obs_coeff(2, t, tau, x, bt0, bt1, bts, b0, b1, bs, y,
                                  s, seasonal, hyp)
            bs[t] = rng.normal(m, math.sqrt(v))

    for i in range(missing_t.shape[0]):
        t = missing_t[i]
        m, v = cond_ystar(t, tau, x, b0, b1, bs, s, seasonal, hyp)
        y[t] = rng.normal(m, math.sqrt(v))

    code, idx = _scan_nonfinite(tau, mu0, x, bt0, bt1, bts, b0, b1, bs, y,
                                missing_t, s, seasonal)
    return tau, mu0, code, idx


@njit(cache=True)
def forward_sim_kernel(T, s, seasonal, hyp, rng):
    """One exact draw of (parameters, latent path, data) from the model."""
    tau = rng.gamma(hyp[A], 1.0 / hyp[B])
    sd = 1.0 / math.sqrt(tau)
    mu0 = rng.normal(hyp[XI0], math.sqrt(hyp[CMU]) * sd)

    bt0 = np.zeros(T + 1)
    bt1 = np.zeros(T + 1)
    bts = np.zeros(T + 1)
    b0 = np.zeros(T + 1)
    b1 = np.zeros(T + 1)
    bs = np.zeros(T + 1)
    bt1[0] = 0.5
    b1[0] = 0.5
    if seasonal:
        bts[s - 1] = 0.5
        bs[s - 1] = 0.5
    for t in range(1, T + 1):
        step = sd / float(t)
        bt0[t] = rng.normal(bt0[t - 1], math.sqrt(hyp[CBT0]) * step)
        bt1[t] = rng.normal(bt1[t - 1], math.sqrt(hyp[CBT1]) * step)
        b0[t] = rng.normal(b0[t - 1], math.sqrt(hyp[CB0]) * step)
        b1[t] = rng.normal(b1[t - 1], math.sqrt(hyp[CB1]) * step)
    if seasonal:
        for t in range(s, T + 1):
            step = sd / float(t - s + 1)
            bts[t] = rng.normal(bts[t - 1], math.sqrt(hyp[CBTS]) * step)
            bs[t] = rng.normal(bs[t - 1], math.sqrt(hyp[CBS]) * step)

    x = np.empty(T + 1)
    y = np.empty(T + 1)
    y[0] = np.nan
    x[0] = rng.normal(mu0, math.sqrt(hyp[C0]) * sd)
    sx = math.sqrt(hyp[CX]) * sd
    sy = math.sqrt(hyp[CY]) * sd
    for t in range(1, T + 1):
        tm = bt0[t] + bt1[t] * x[t - 1]
        if seasonal and t >= s:
            tm += bts[t] * x[t - s]
        x[t] = rng.normal(tm, sx)
        om = b0[t] + b1[t] * x[t]
        if seasonal and t >= s:
            om += bs[t] * x[t - s]
        y[t] = rng.normal(om, sy)
    return tau, mu0, x, bt0, bt1, bts, b0, b1, bs, y


@njit(cache=True)
def resim_obs_kernel(tau, x, b0, b1, bs, y, s, seasonal, hyp, rng):
    """Redraw every observation from the observation equation, in place."""
    T = x.shape[0] - 1
    sy = math.sqrt(hyp[CY] / tau)
    for t in range(1, T + 1):
        om = b0[t] + b1[t] * x[t]
        if seasonal and t >= s:
            om += bs[t] * x[t - s]
        y[t] = rng.normal(om, sy)


@njit(cache=True)
def _geweke_row(out, i, tau, mu0, x, bt1, b1, y, s):
    T = x.shape[0] - 1
    xbar = 0.0
    for t in range(1, T + 1):
        xbar += x[t]
    out[i, 0] = tau
    out[i, 1] = mu0
    out[i, 2] = xbar / T
    out[i, 3] = bt1[(T + 1) // 2]
    out[i, 4] = b1[T]
    out[i, 5] = y[s]


@njit(cache=True)
def geweke_forward_stats(n, T, s, seasonal, hyp, rng):
    """Marginal-conditional arm: n independent forward simulations."""
    out = np.empty((n, 6))
    for i in range(n):
        tau, mu0, x, bt0, bt1, bts, b0, b1, bs, y = forward_sim_kernel(
            T, s, seasonal, hyp, rng)
        _geweke_row(out, i, tau, mu0, x, bt1, b1, y, s)
    return out


@njit(cache=True)
def geweke_successive_stats(n, T, s, seasonal, hyp, rng, sweeps_per_cycle,
                            fault):
    """Successive-conditional arm: sweep, re-simulate data, record."""
    tau, mu0, x, bt0, bt1, bts, b0, b1, bs, y = forward_sim_kernel(
        T, s, seasonal, hyp, rng)
    missing_t = np.empty(0, dtype=np.int64)
    out = np.empty((n, 6))
    for i in range(n):
        for _ in range(sweeps_per_cycle):
            tau, mu0, code, idx = sweep_kernel(
                tau, mu0, x, bt0, bt1, bts, b0, b1, bs, y, missing_t,
                s, seasonal, hyp, rng, fault)
            if code != OK:
                out[i:, :] = np.nan
                return out
        resim_obs_kernel(tau, x, b0, b1, bs, y, s, seasonal, hyp, rng)
        _geweke_row(out, i, tau, mu0, x, bt1, b1, y, s)
    return out
