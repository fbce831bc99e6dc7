import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sbcpmu.characterize import (
    GroupedSamples,
    SweepRecord,
    delay_statistics,
    edge_separation,
    ols_fit,
    one_counter_estimate,
    read_counter_csv,
    read_delay_csv,
    read_sweep_csv,
    sweep_plan,
    variance_decomposition,
)
from sbcpmu.errors import ConfigError


class TestOls:
    def test_exact_line(self):
        r = ols_fit(SweepRecord(v_in=[0, 1, 2, 3, 4], v_out=[1, 3, 5, 7, 9]))
        assert r.gain == pytest.approx(2.0, abs=1e-12)
        assert r.offset == pytest.approx(1.0, abs=1e-12)
        assert r.rss == pytest.approx(0.0, abs=1e-20)
        assert r.dof == 3

    def test_against_normal_equations(self):
        rng = np.random.default_rng(3)
        x = np.linspace(-10, 10, 10_000)
        y = (1 - 4459e-6) * x - 269e-6 + rng.normal(0, 100e-6, x.size)
        fit = ols_fit(SweepRecord(v_in=x, v_out=y))
        # independent closed-form oracle
        design = np.column_stack([np.ones_like(x), x])
        beta = np.linalg.solve(design.T @ design, design.T @ y)
        assert fit.offset == pytest.approx(beta[0], abs=1e-9)
        assert fit.gain == pytest.approx(beta[1], abs=1e-9)
        # recovery within 3 estimated stds and analytic variance agreement
        assert abs(fit.gain - (1 - 4459e-6)) < 3 * fit.gain_std
        assert abs(fit.offset + 269e-6) < 3 * fit.offset_std
        sigma2 = (100e-6) ** 2
        analytic = sigma2 * np.linalg.inv(design.T @ design)
        assert fit.gain_std == pytest.approx(math.sqrt(analytic[1, 1]), rel=0.2)
        assert fit.offset_std == pytest.approx(math.sqrt(analytic[0, 0]), rel=0.2)

    def test_residual_orthogonality(self):
        rng = np.random.default_rng(4)
        x = rng.uniform(-5, 5, 200)
        y = 0.7 * x + 0.1 + rng.normal(0, 0.05, 200)
        fit = ols_fit(SweepRecord(v_in=x, v_out=y))
        resid = y - (fit.gain * x + fit.offset)
        design = np.column_stack([np.ones_like(x), x])
        assert np.max(np.abs(design.T @ resid)) < 1e-9 * np.linalg.norm(y)

    def test_constant_input_rejected(self):
        with pytest.raises(ValueError):
            ols_fit(SweepRecord(v_in=[1, 1, 1], v_out=[0, 1, 2]))

    @given(
        st.lists(st.floats(-10, 10), min_size=4, max_size=30, unique=True),
        st.floats(-2, 2),
        st.floats(-1, 1),
    )
    @settings(max_examples=50)
    def test_oracle_property(self, xs, g, b):
        x = np.asarray(xs)
        y = g * x + b
        fit = ols_fit(SweepRecord(v_in=x, v_out=y))
        assert fit.gain == pytest.approx(g, abs=1e-7)
        assert fit.offset == pytest.approx(b, abs=1e-7)


class TestSweepPlan:
    def test_paper_values(self):
        p = sweep_plan(full_scale=20.0, filter_tau=32e-6, duration=3.2)
        assert p.slew_rate == pytest.approx(6.25)
        assert p.gain_error == pytest.approx(-5e-11, rel=0.1)
        assert p.offset_error == pytest.approx(-200e-6, rel=0.02)

    def test_zero_tau(self):
        p = sweep_plan(20.0, 0.0, 3.2)
        assert p.gain_error == 0.0 and p.offset_error == 0.0

    def test_duration_scaling(self):
        a = sweep_plan(20.0, 32e-6, 3.2)
        b = sweep_plan(20.0, 32e-6, 1.6)
        assert b.slew_rate == pytest.approx(2 * a.slew_rate)
        assert b.offset_error == pytest.approx(2 * a.offset_error)
        assert b.gain_error == pytest.approx(4 * a.gain_error, rel=1e-6)


class TestOneCounter:
    def test_required_averages(self):
        r = one_counter_estimate([2000], known_base=100e6, nominal_period=1 / 50e3)
        assert r.per_measurement_error == pytest.approx(5e-4)
        assert r.required_averages == 250_000

    def test_exact_counts(self):
        r = one_counter_estimate([2000, 2000], 100e6, 2e-5)
        assert r.r_mean == 1.0

    def test_biased_counts(self):
        # -16 ppm deviation over many quantized counts
        rng = np.random.default_rng(5)
        true = 2000 * (1 - 16e-6)
        counts = np.floor(true + rng.uniform(0, 1, 300_000))
        r = one_counter_estimate(counts, 100e6, 2e-5)
        assert (r.r_mean - 1) * 1e6 == pytest.approx(-16.0, abs=1.0)

    def test_error_scales_inverse_sqrt(self):
        rng = np.random.default_rng(6)
        true = 2000.37
        errs = []
        for n in (100, 1000, 10_000):
            trials = [
                abs(one_counter_estimate(
                    np.floor(true + rng.uniform(0, 1, n)), 100e6, 2e-5
                ).r_mean - true / 2000)
                for _ in range(40)
            ]
            errs.append(np.mean(trials))
        slope = np.polyfit(np.log10([100, 1000, 10_000]), np.log10(errs), 1)[0]
        assert slope == pytest.approx(-0.5, abs=0.1)

    def test_rejects_bad_counts(self):
        with pytest.raises(ValueError):
            one_counter_estimate([], 100e6, 2e-5)
        with pytest.raises(ValueError):
            one_counter_estimate([0], 100e6, 2e-5)


class TestEdgeSeparation:
    def test_values(self):
        assert edge_separation(659, 100e6) == (6.59e-6, 1e-8)
        assert edge_separation(0, 100e6)[0] == 0.0
        assert edge_separation(2094, 100e6)[0] == pytest.approx(20.94e-6)


class TestDelayStatistics:
    def test_constant(self):
        s = delay_statistics([5e-6] * 10)
        assert s.std == 0.0
        assert s.mode == s.mean == s.minimum == s.maximum == 5e-6

    def test_idle_profile_draws(self):
        from sbcpmu.blocks import PllDelayModel, pll_sample

        m = PllDelayModel(min=4.55e-6, max=14.65e-6, mean=6.59e-6, std=1.07e-6)
        draws = pll_sample(m, np.random.default_rng(7), size=1000)
        s = delay_statistics(draws)
        assert s.mean == pytest.approx(6.59e-6, abs=3 * 1.07e-6 / math.sqrt(1000))
        assert s.minimum >= 4.55e-6
        # mode below the mean for a right-skewed sample
        assert s.mode < s.mean

    def test_mode_std_definition(self):
        s = delay_statistics([1.0, 1.0, 1.0, 2.0])
        assert s.mode == pytest.approx(1.0, abs=0.3)
        assert s.mode_std == pytest.approx(
            math.sqrt(np.mean((np.array([1, 1, 1, 2.0]) - s.mode) ** 2)), rel=0.5
        )

    def test_qq_deviation_small_for_normal(self):
        rng = np.random.default_rng(8)
        s = delay_statistics(rng.normal(5e-6, 1e-6, 5000))
        assert s.qq_deviation < 0.3e-6

    def test_json_units(self):
        s = delay_statistics([4e-6, 5e-6, 6e-6])
        d = s.to_json()
        assert d["mean_us"] == pytest.approx(5.0)
        assert d["n"] == 3


class TestVarianceDecomposition:
    def test_identical_constants(self):
        d = variance_decomposition(GroupedSamples({"a": [3.0, 3.0], "b": [3.0, 3.0]}))
        assert d.grand_mean == 3.0
        assert d.within_std == 0.0 and d.total_std == 0.0

    def test_hand_computable(self):
        d = variance_decomposition(GroupedSamples({"a": [0.0, 0.0], "b": [2.0, 2.0]}))
        assert d.within_std == 0.0
        assert d.total_std == pytest.approx(1.0)
        assert d.grand_mean == pytest.approx(1.0)

    def test_law_of_total_variance_identity(self):
        rng = np.random.default_rng(9)
        groups = {f"g{i}": rng.normal(i, 1.0, 50) for i in range(4)}
        d = variance_decomposition(GroupedSamples(groups))
        pooled = np.concatenate(list(groups.values()))
        assert d.total_std**2 == pytest.approx(pooled.var(ddof=0), rel=1e-12)
        assert d.within_std**2 + d.between_std**2 == pytest.approx(
            d.total_std**2, rel=1e-12
        )

    def test_ordering_on_nested_data(self):
        rng = np.random.default_rng(10)
        groups = {}
        for i in range(6):
            center = rng.normal(0, 2.0)
            groups[f"g{i}"] = center + rng.normal(0, 1.0, 100)
        d = variance_decomposition(
            GroupedSamples(groups, estimator_stds={k: [0.1] * 100 for k in groups})
        )
        assert d.ordering_ok
        assert d.estimator_std <= d.within_std <= d.total_std

    def test_single_group_rejected(self):
        with pytest.raises(ValueError):
            variance_decomposition(GroupedSamples({"only": [1.0, 2.0]}))

    def test_table_i_components_recovered(self):
        # nested data at the within/between scale of the ADC gain statistics
        rng = np.random.default_rng(11)
        within, between = 66.0, 116.6
        reps = []
        for _ in range(100)            :
            groups = {
                f"dev{d}": rng.normal(0, between) + rng.normal(-4459, within, 8)
                for d in range(3)
            }
            dec = variance_decomposition(GroupedSamples(groups), ddof=1)
            reps.append((dec.within_std, dec.total_std))
        reps = np.array(reps)
        total = math.hypot(within, between)
        assert np.sqrt(np.mean(reps[:, 0] ** 2)) == pytest.approx(within, rel=0.15)
        assert np.sqrt(np.mean(reps[:, 1] ** 2)) == pytest.approx(total, rel=0.15)


class TestCsvReaders:
    def test_sweep_missing_columns(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("v_in,v_out\n1,1\n")
        with pytest.raises(ConfigError, match="channel"):
            read_sweep_csv(p)

    def test_sweep_round_trip(self, tmp_path):
        p = tmp_path / "sweep.csv"
        p.write_text(
            "v_in,v_out,channel,device\n0,0.1,ch0,dev0\n1,1.1,ch0,dev0\n2,2.1,ch0,dev0\n"
        )
        records = read_sweep_csv(p)
        fit = ols_fit(records[("dev0", "ch0")])
        assert fit.gain == pytest.approx(1.0)
        assert fit.offset == pytest.approx(0.1)

    def test_counter_optional_temperature(self, tmp_path):
        p = tmp_path / "counts.csv"
        p.write_text("count,device,temperature_c\n2000,dev0,20\n1999,dev0,\n")
        rows = read_counter_csv(p)
        assert rows[0]["temperature_c"] == 20.0
        assert rows[1]["temperature_c"] is None

    def test_delay_count_or_us(self, tmp_path):
        p = tmp_path / "delay.csv"
        p.write_text("count,profile\n659,idle\n")
        assert read_delay_csv(p)["idle"][0] == pytest.approx(6.59e-6)
        q = tmp_path / "delay2.csv"
        q.write_text("delay_us,profile\n6.59,idle\n")
        assert read_delay_csv(q)["idle"][0] == pytest.approx(6.59e-6)
        r = tmp_path / "delay3.csv"
        r.write_text("profile\nidle\n")
        with pytest.raises(ConfigError):
            read_delay_csv(r)
