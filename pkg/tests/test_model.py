import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from tvpssm import (
    Hyperparameters,
    McmcConfig,
    ModelKind,
    PathKind,
    TimeSeriesData,
    count_gaussian_factors,
    empirical_bayes_xi0,
    gaussian_factors,
    log_joint,
    prior_step_scale,
)
from tvpssm.model import LOG_2PI, _zero_state
from tvpssm.synthetic import SyntheticSpec, generate_seasonal_series

from conftest import make_series, perturbed_state


def term_by_term_log_joint(state, data, hyper, kind):
    """Independent reference: scipy logpdf per factor, 2*pi constants restored."""
    total = stats.gamma.logpdf(state.tau, a=hyper.a, scale=1.0 / hyper.b)
    nq = 0
    for f in gaussian_factors(state, data, hyper, kind):
        total += stats.norm.logpdf(
            f.residual, 0.0, math.sqrt(f.var_multiplier / state.tau))
        nq += 1
    return total + 0.5 * nq * LOG_2PI, nq


class TestTimeSeriesData:
    def test_too_short(self):
        with pytest.raises(ValueError, match="too short"):
            TimeSeriesData(np.zeros(25), period=12)

    def test_period_lower_bound(self):
        with pytest.raises(ValueError, match="period"):
            TimeSeriesData(np.zeros(30), period=1)

    def test_all_missing(self):
        with pytest.raises(ValueError, match="missing"):
            TimeSeriesData(np.full(30, np.nan), period=12)

    def test_missing_bookkeeping(self):
        v = np.arange(30.0)
        v[[5, 17]] = np.nan
        data = TimeSeriesData(v, period=12)
        assert data.n == 30
        assert data.n_missing == 2
        assert list(data.missing_t) == [6, 18]  # 1-based


class TestHyperparameters:
    def test_defaults_are_reference_values(self):
        h = Hyperparameters()
        assert (h.a, h.b) == (0.01, 0.01)
        assert (h.c_mu, h.c_0) == (100.0, 100.0)
        assert (h.c_bt0, h.c_bt1, h.c_bts) == (100.0, 1.0, 1.0)
        assert (h.c_b0, h.c_b1, h.c_bs) == (100.0, 1.0, 1.0)
        assert (h.c_x, h.c_y) == (200.0, 200.0)
        assert h.xi0 is None

    @pytest.mark.parametrize("field", ["a", "b", "c_mu", "c_x", "c_y"])
    def test_positivity(self, field):
        with pytest.raises(ValueError):
            Hyperparameters(**{field: 0.0})

    def test_resolve_xi0(self):
        data = make_series(n_missing=0, seed=9)
        assert Hyperparameters(xi0=7.5).resolve_xi0(data) == 7.5
        assert Hyperparameters().resolve_xi0(data) == pytest.approx(
            data.values.mean())


class TestMcmcConfig:
    def test_burn_in_bound(self):
        with pytest.raises(ValueError, match="burn_in"):
            McmcConfig(n_iter=100, burn_in=100)

    def test_retained_count(self):
        cfg = McmcConfig(n_iter=50_000, burn_in=30_000, thin=1)
        assert cfg.n_retained == 20_000
        cfg = McmcConfig(n_iter=50_000, burn_in=30_000, thin=7)
        assert cfg.n_retained == 20_000 // 7

    def test_small_retention_warns(self):
        with pytest.warns(UserWarning, match="retained"):
            McmcConfig(n_iter=101, burn_in=100)


class TestEmpiricalXi0:
    def test_mean_skips_missing(self):
        # [25, 27, missing, 28] tiled to a valid length; the mean of the
        # non-missing values is (25+27+28)/3 = 26.666667.
        v = np.tile([25.0, 27.0, np.nan, 28.0], 7)
        data = TimeSeriesData(v, period=12)
        assert empirical_bayes_xi0(data) == pytest.approx(26.666667, abs=1e-6)

    def test_constant_series(self):
        data = TimeSeriesData(np.full(30, 30.0), period=12)
        assert empirical_bayes_xi0(data) == 30.0

    def test_all_missing_errors(self):
        data = make_series()
        data.values = np.full(data.n, np.nan)
        with pytest.raises(ValueError, match="empty series"):
            empirical_bayes_xi0(data)

    def test_plausible_monthly_temperature_range(self):
        # A tropical-style monthly series should give a level in a sane band.
        series = generate_seasonal_series(SyntheticSpec(), seed=0)
        assert 20.0 <= empirical_bayes_xi0(series) <= 35.0


class TestPriorStepScale:
    def test_reference_values(self):
        h = Hyperparameters()
        assert prior_step_scale(PathKind.OBS_INTERCEPT, 1, h) == 100.0
        assert prior_step_scale(PathKind.OBS_SEASONAL, 12, h, period=12) == 1.0
        assert prior_step_scale(PathKind.STATE_SLOPE, 10, h) == pytest.approx(0.01)

    def test_first_seasonal_step_has_unit_weight(self):
        h = Hyperparameters()
        for s in (4, 12, 17):
            assert prior_step_scale("state_seasonal", s, h, period=s) == h.c_bts

    def test_range_errors(self):
        h = Hyperparameters()
        with pytest.raises(ValueError):
            prior_step_scale(PathKind.STATE_INTERCEPT, 0, h)
        with pytest.raises(ValueError):
            prior_step_scale(PathKind.OBS_SEASONAL, 11, h, period=12)

    @given(t=st.integers(min_value=1, max_value=10_000))
    @settings(max_examples=50, deadline=None)
    def test_decay_and_positivity(self, t):
        h = Hyperparameters()
        v = prior_step_scale(PathKind.OBS_SLOPE, t, h)
        assert v > 0
        assert v <= h.c_b1

    def test_marginal_variance_bound(self):
        # The cumulative step variances stay below c * pi^2/6 for any t.
        t = np.arange(1, 1_000_001, dtype=np.float64)
        partial = np.cumsum(1.0 / t**2)
        assert partial[-1] < math.pi**2 / 6
        assert (partial < math.pi**2 / 6).all()


class TestLogJoint:
    def test_zero_residual_state(self):
        # With every residual 0 and tau = 1, only the Gamma prior and the
        # Gaussian normalizers remain.
        T, s = 26, 12
        hyper = Hyperparameters(xi0=0.0)
        for kind in ModelKind:
            state = _zero_state(T, s, kind)
            data = TimeSeriesData(state.y[1:].copy(), period=s)
            factors = list(gaussian_factors(state, data, hyper, kind))
            assert all(f.residual == 0.0 for f in factors)
            expected = (hyper.a * math.log(hyper.b) - math.lgamma(hyper.a)
                        - hyper.b)
            expected -= 0.5 * sum(math.log(f.var_multiplier) for f in factors)
            assert log_joint(state, data, hyper, kind) == pytest.approx(
                expected, abs=1e-9)

    @pytest.mark.parametrize("kind", list(ModelKind))
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_matches_term_by_term_oracle(self, kind, seed):
        data = make_series(T=26, seed=seed)
        hyper = Hyperparameters()
        state = perturbed_state(data, hyper, kind, seed=seed + 10)
        expected, _ = term_by_term_log_joint(state, data, hyper, kind)
        assert log_joint(state, data, hyper, kind) == pytest.approx(
            expected, abs=1e-9)

    def test_accumulation_order_invariance(self, small_case):
        state, data, hyper = small_case
        terms = []
        for f in gaussian_factors(state, data, hyper, ModelKind.SEASONAL):
            terms.append(stats.norm.logpdf(
                f.residual, 0.0, math.sqrt(f.var_multiplier / state.tau))
                + 0.5 * LOG_2PI)
        terms.append(stats.gamma.logpdf(state.tau, a=hyper.a, scale=1 / hyper.b))
        rng = np.random.default_rng(0)
        terms = np.array(terms)
        reference = log_joint(state, data, hyper, ModelKind.SEASONAL)
        for _ in range(5):
            rng.shuffle(terms)
            assert abs(terms.sum() - reference) < 1e-9

    def test_baseline_equals_zeroed_seasonal_minus_prior_terms(self, small_case):
        state, data, hyper = small_case
        zeroed = state.copy()
        zeroed.bts[:] = 0.0
        zeroed.bs[:] = 0.0
        lj_seasonal = log_joint(zeroed, data, hyper, ModelKind.SEASONAL)
        lj_baseline = log_joint(zeroed, data, hyper, ModelKind.BASELINE)
        seas_prior = 0.0
        for f in gaussian_factors(zeroed, data, hyper, ModelKind.SEASONAL):
            if f.name in ("bts", "bs"):
                seas_prior += (0.5 * math.log(zeroed.tau / f.var_multiplier)
                               - 0.5 * zeroed.tau * f.residual**2
                               / f.var_multiplier)
        assert lj_seasonal - lj_baseline == pytest.approx(seas_prior, abs=1e-9)

    def test_baseline_never_reads_seasonal_arrays(self, small_case):
        state, data, hyper = small_case
        poisoned = state.copy()
        poisoned.bts[:] = np.nan
        poisoned.bs[:] = np.nan
        assert math.isfinite(log_joint(poisoned, data, hyper, ModelKind.BASELINE))
        assert not math.isfinite(
            log_joint(poisoned, data, hyper, ModelKind.SEASONAL))

    def test_dimension_mismatch(self, small_case):
        state, data, hyper = small_case
        bad = state.copy()
        bad.x = bad.x[:-1]
        with pytest.raises(ValueError, match="shape"):
            log_joint(bad, data, hyper, ModelKind.SEASONAL)


class TestFactorCount:
    @pytest.mark.parametrize("T", [26, 50, 288])
    def test_counts_match_closed_forms(self, T):
        s = 12
        assert count_gaussian_factors(T, s, ModelKind.SEASONAL) == 8 * T - 2 * s + 4
        assert count_gaussian_factors(T, s, ModelKind.BASELINE) == 6 * T + 2

    def test_general_period(self):
        for s in (4, 7):
            T = 3 * s + 2
            assert count_gaussian_factors(T, s, ModelKind.SEASONAL) == 8 * T - 2 * s + 4
