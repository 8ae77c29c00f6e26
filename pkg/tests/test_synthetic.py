import numpy as np
import pytest

from tvpssm import (
    Hyperparameters,
    ModelKind,
    SyntheticSpec,
    count_gaussian_factors,
    gaussian_factors,
    generate_seasonal_series,
    log_joint,
    simulate_from_prior,
    tau_conditional,
)
from tvpssm.io import write_series
from tvpssm import _kernels


class TestSyntheticSpec:
    def test_length_bound(self):
        with pytest.raises(ValueError):
            SyntheticSpec(n=25, period=12)

    def test_noise_positive(self):
        with pytest.raises(ValueError):
            SyntheticSpec(noise_sd=0.0)

    def test_missing_fraction_range(self):
        with pytest.raises(ValueError):
            SyntheticSpec(missing_fraction=1.0)


class TestGenerateSeasonalSeries:
    def test_degenerate_spec_is_flat(self):
        spec = SyntheticSpec(trend_slope=0.0, seasonal_amplitude=0.0,
                             noise_sd=1e-9, base_level=26.0)
        series = generate_seasonal_series(spec, seed=0)
        assert np.max(np.abs(series.values - 26.0)) < 1e-6

    def test_exact_annual_structure(self):
        # The noise-free component repeats exactly at the seasonal lag.
        spec = SyntheticSpec(noise_sd=1e-12)
        series = generate_seasonal_series(spec, seed=1)
        t = np.arange(1, spec.n + 1)
        seasonal_part = series.values - spec.base_level - spec.trend_slope * t
        a = seasonal_part[:-12]
        b = seasonal_part[12:]
        corr = np.corrcoef(a, b)[0, 1]
        assert corr > 0.999999

    def test_deterministic_bytes(self, tmp_path):
        spec = SyntheticSpec(missing_fraction=0.05)
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_series(generate_seasonal_series(spec, seed=7), p1)
        write_series(generate_seasonal_series(spec, seed=7), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_masking_rules(self):
        spec = SyntheticSpec(n=200, missing_fraction=0.1)
        series = generate_seasonal_series(spec, seed=3)
        assert series.n_missing == 20
        # never the first `period` points (t = 1..12)
        assert (series.missing_t > spec.period).all()


class TestSimulateFromPrior:
    def test_requires_fixed_xi0(self):
        with pytest.raises(ValueError, match="xi0 must be fixed"):
            simulate_from_prior(Hyperparameters(), ModelKind.SEASONAL, 30, 0)

    def test_anchors_hold_in_every_simulation(self):
        hyper = Hyperparameters(xi0=25.0)
        for seed in range(10):
            state, _ = simulate_from_prior(hyper, ModelKind.SEASONAL, 26, seed)
            assert state.bt1[0] == 0.5
            assert state.b1[0] == 0.5
            assert state.bt0[0] == 0.0
            assert state.b0[0] == 0.0
            assert (state.bts[:11] == 0.0).all()
            assert state.bts[11] == 0.5
            assert state.bs[11] == 0.5

    def test_deterministic(self):
        hyper = Hyperparameters(xi0=25.0)
        a, da = simulate_from_prior(hyper, ModelKind.SEASONAL, 26, 5)
        b, db = simulate_from_prior(hyper, ModelKind.SEASONAL, 26, 5)
        assert a.tau == b.tau
        assert np.array_equal(a.x, b.x)
        assert np.array_equal(da.values, db.values)

    def test_log_joint_finite(self):
        hyper = Hyperparameters(xi0=25.0, a=5.0, b=5.0)
        for kind in ModelKind:
            state, data = simulate_from_prior(hyper, kind, 26, 11)
            assert np.isfinite(log_joint(state, data, hyper, kind))

    @pytest.mark.parametrize("kind", list(ModelKind))
    def test_generative_self_consistency(self, kind):
        # Every standardized residual is N(0,1) by construction, so the
        # mean of squared standardized residuals over many simulations
        # must sit at 1 within Monte Carlo error, factor group by group.
        hyper = Hyperparameters(
            a=5.0, b=5.0, c_mu=1.0, c_0=1.0, c_bt0=0.5, c_bt1=0.1,
            c_bts=0.1, c_b0=0.5, c_b1=0.1, c_bs=0.1, c_x=1.0, c_y=1.0,
            xi0=0.0)
        n_sims = 10_000
        totals: dict[str, list[float]] = {}
        for seed in range(n_sims):
            state, data = simulate_from_prior(hyper, kind, 26, seed)
            for f in gaussian_factors(state, data, hyper, kind):
                z2 = state.tau * f.residual**2 / f.var_multiplier
                totals.setdefault(f.name, []).append(z2)
        for name, vals in totals.items():
            mean = float(np.mean(vals))
            assert abs(mean - 1.0) < 0.05, (name, mean)

    def test_factor_list_matches_shape_identity(self):
        # The generative factor list, the joint's factor count, and the
        # tau-conditional shape all agree.
        hyper = Hyperparameters(xi0=25.0)
        for kind, offset in ((ModelKind.SEASONAL, 0), (ModelKind.BASELINE, 1)):
            state, data = simulate_from_prior(hyper, kind, 30, 13 + offset)
            n_enumerated = sum(
                1 for _ in gaussian_factors(state, data, hyper, kind))
            assert n_enumerated == count_gaussian_factors(30, 12, kind)
            shape, _ = tau_conditional(state, data, hyper, kind)
            assert shape == hyper.a + n_enumerated / 2
            assert n_enumerated == _kernels.n_gaussian(
                30, 12, kind is ModelKind.SEASONAL)
