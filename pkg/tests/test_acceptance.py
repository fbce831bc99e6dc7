"""End-to-end acceptance checks against the published chain characterization.

Each test prints exactly one pass/fail line for its criterion, with the
measured values, then asserts.  Criteria 6 and 7 share two 240-trial Monte
Carlo runs provided as module-scoped fixtures.
"""

import math

import numpy as np
import pytest

from sbcpmu.blocks import (
    aaf_cutoff_model,
    aaf_response,
    paper_profile,
    pll_response,
    pll_sample,
    timebase_response,
)
from sbcpmu.characterize import (
    GroupedSamples,
    SweepRecord,
    delay_statistics,
    ols_fit,
    one_counter_estimate,
    read_counter_csv,
    sweep_plan,
    variance_decomposition,
)
from sbcpmu.estimate import compensate, fe, fourier_phasor, tve, EstimationWindow
from sbcpmu.blocks import BlockResponse
from sbcpmu.mc import McScenario, model_curve, monte_carlo
from sbcpmu.signals import Phasor, Waveform

OMEGA_50 = 2 * math.pi * 50
MC_SEED = 12345


def check(criterion, description, ok, detail):
    line = f"criterion {criterion} [{'PASS' if ok else 'FAIL'}] {description}: {detail}"
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def mc_uncompensated():
    return monte_carlo(
        McScenario(
            chain=paper_profile(),
            phasor=Phasor(10.0, 0.0, 50.0),
            trials=240,
            base_seed=MC_SEED,
        )
    )


@pytest.fixture(scope="module")
def mc_compensated():
    return monte_carlo(
        McScenario(
            chain=paper_profile(),
            phasor=Phasor(10.0, 0.0, 50.0),
            trials=240,
            base_seed=MC_SEED,
            compensate=True,
        )
    )


def test_criterion_1_aaf_response():
    model = aaf_cutoff_model(5000.0, resistor_tolerance=0.01, capacitor_tolerance=0.10)
    resp = aaf_response(model, OMEGA_50)
    atten = 1 - resp.magnitude
    ok = (
        abs(atten / 50e-6 - 1) < 0.02
        and abs(resp.phase / -10.0e-3 - 1) < 0.001
        and abs(resp.rel_magnitude_std / 5.8e-6 - 1) < 0.02
        and abs(resp.phase_std / 0.58e-3 - 1) < 0.02
    )
    check(
        1,
        "AAF attenuation/phase and tolerance uncertainties",
        ok,
        f"attenuation {atten * 1e6:.2f} ppm, phase {resp.phase * 1e3:.3f} mrad, "
        f"u_H {resp.rel_magnitude_std * 1e6:.2f} ppm, u_phi {resp.phase_std * 1e3:.3f} mrad",
    )


def test_criterion_2_aaf_residual_after_phase_compensation():
    def residual(r_tol, c_tol):
        resp = aaf_response(
            aaf_cutoff_model(5000.0, resistor_tolerance=r_tol, capacitor_tolerance=c_tol),
            OMEGA_50,
        )
        # phase compensated with the nominal value, magnitude left in place:
        # the residual is the worst-case uncertainty factor e^{u_r + j*u_phi}
        return abs(np.exp(resp.rel_magnitude_std + 1j * resp.phase_std) - 1)

    standard = residual(0.01, 0.10)
    improved = residual(0.001, 0.01)
    ok = abs(standard / 0.058e-2 - 1) < 0.05 and abs(improved / 0.0058e-2 - 1) < 0.05
    check(
        2,
        "residual TVE after phase-only AAF compensation",
        ok,
        f"standard components {standard * 100:.4f} %, improved {improved * 100:.4f} %",
    )


def test_criterion_3_sweep_planning():
    plan = sweep_plan(full_scale=20.0, filter_tau=32e-6, duration=3.2)
    ok = abs(plan.gain_error / -5e-11 - 1) < 0.10 and abs(plan.offset_error / -200e-6 - 1) < 0.02
    check(
        3,
        "static-sweep slew-rate error budget",
        ok,
        f"SR {plan.slew_rate:.3f} V/s, gain error {plan.gain_error * 1e9:.3f} ppb, "
        f"offset error {plan.offset_error * 1e6:.1f} uV",
    )


def test_criterion_4_pwm_block():
    chain = paper_profile()
    fe_hz = fe(50.0, chain.timebase.deviation_ratio())
    resp = timebase_response(chain.timebase, OMEGA_50, 1.0)
    uncomp = tve(np.exp(1j * resp.phase), 1.0)
    band = tve(np.exp(1j * resp.phase_std), 1.0)
    ok = (
        abs(fe_hz - 801e-6) < 1e-6
        and abs(uncomp - 0.50e-2) < 1e-4
        and abs(band - 0.115e-2) < 5e-5
    )
    check(
        4,
        "PWM frequency error and TVE at 1 s",
        ok,
        f"FE {fe_hz * 1e6:.1f} uHz, uncompensated TVE {uncomp * 100:.4f} %, "
        f"compensated band {band * 100:.4f} %",
    )


def test_criterion_5_pll_block():
    worst = tve(np.exp(1j * pll_response(20e-6, OMEGA_50).phase), 1.0)
    minimum = tve(np.exp(1j * pll_response(3.1e-6, OMEGA_50).phase), 1.0)
    # the 0.097% value is checked against the derivation; the source text
    # prints "10 %" for this case, treated as a typo for 0.1%
    ok = abs(worst - 0.628e-2) < 1e-4 and abs(minimum - 0.097e-2) < 1e-5
    check(
        5,
        "PLL delay TVE at 20 us and 3.1 us",
        ok,
        f"worst {worst * 100:.4f} %, minimum {minimum * 100:.4f} %",
    )


def test_criterion_6_model_curve_and_monte_carlo(mc_uncompensated):
    curve = model_curve(paper_profile(), OMEGA_50, [0.0, 1.0])
    r = mc_uncompensated
    se = r.trial_tve.std(axis=0, ddof=1) / math.sqrt(r.trials)
    diff = np.abs(r.mean_tve - r.model_tve)
    violations = int(np.sum(diff > 2 * se))
    ok = (
        abs(curve.expected[0] - 0.82e-2) < 2e-4
        and abs(curve.expected[1] - 1.28e-2) < 2e-4
        and violations == 0
    )
    check(
        6,
        "end-to-end model curve vs 240-trial Monte Carlo",
        ok,
        f"TVE(0) {curve.expected[0] * 100:.4f} %, TVE(1s) {curve.expected[1] * 100:.4f} %, "
        f"mean-vs-model 2SE violations {violations}/{diff.size}",
    )


def test_criterion_7_compensated_run(mc_compensated):
    r = mc_compensated
    grand = r.grand_mean_tve
    mag_ppm = r.grand_mean_mag_err * 1e6
    angle_deg = math.degrees(r.grand_mean_phase_err)
    ok = (
        abs(grand - 0.056e-2) < 1e-4
        and 24.0 <= mag_ppm <= 72.0  # 48 ppm +/- 50%
        and 0.015 <= angle_deg <= 0.045  # 0.03 deg +/- 50%
    )
    check(
        7,
        "compensated grand-mean TVE and magnitude/angle decomposition",
        ok,
        f"grand TVE {grand * 100:.4f} %, magnitude {mag_ppm:.1f} ppm, angle {angle_deg:.4f} deg",
    )


def test_criterion_8_property_suite():
    rng = np.random.default_rng(MC_SEED)
    failures = []

    # OLS vs normal equations
    x = rng.uniform(-10, 10, 500)
    y = 0.9955 * x - 269e-6 + rng.normal(0, 1e-4, 500)
    fit = ols_fit(SweepRecord(v_in=x, v_out=y))
    design = np.column_stack([np.ones_like(x), x])
    beta = np.linalg.solve(design.T @ design, design.T @ y)
    if abs(fit.offset - beta[0]) > 1e-9 or abs(fit.gain - beta[1]) > 1e-9:
        failures.append("ols-oracle")

    # law of total variance identity
    groups = {f"g{i}": rng.normal(i, 1.0, 40) for i in range(3)}
    dec = variance_decomposition(GroupedSamples(groups))
    pooled = np.concatenate(list(groups.values()))
    if abs(dec.total_std**2 - pooled.var(ddof=0)) > 1e-12 * pooled.var(ddof=0):
        failures.append("total-variance")
    if not dec.ordering_ok:
        failures.append("variance-ordering")

    # compensation exactness
    lam = BlockResponse(magnitude=0.9955, phase=-6.9e-3)
    xref = 10 * np.exp(1j * 0.3)
    out = compensate(lam.factor * xref, lam, reference=xref)
    if abs(out.value - xref) / abs(xref) > 1e-12:
        failures.append("compensation-exactness")

    # TVE small-error decomposition bound
    for e_r, e_p in [(1e-2, -1e-2), (-5e-3, 5e-3), (1e-4, 1e-2)]:
        t = tve(np.exp(complex(e_r, e_p)), 1 + 0j)
        if abs(t - math.hypot(e_r, e_p)) > 1e-4:
            failures.append("tve-bound")
            break

    # DC rejection of the one-cycle estimator
    t = np.arange(5000) / 5000.0
    clean = Waveform(times=t, values=10 * np.cos(OMEGA_50 * t))
    offset = Waveform(times=t, values=10 * np.cos(OMEGA_50 * t) + 1.0)
    a = fourier_phasor(clean, EstimationWindow(50.0))
    b = fourier_phasor(offset, EstimationWindow(50.0))
    if np.max(np.abs(a.values - b.values)) / 10 > 1e-9:
        failures.append("dc-rejection")

    # Monte Carlo determinism
    scenario = McScenario(
        chain=paper_profile(), phasor=Phasor(10, 0, 50), trials=3, base_seed=MC_SEED
    )
    if not np.array_equal(monte_carlo(scenario).trial_tve, monte_carlo(scenario).trial_tve):
        failures.append("mc-determinism")

    check(8, "property suite", not failures, f"failed: {failures or 'none'}")


def test_criterion_9_table_round_trips(tmp_path):
    rng = np.random.default_rng(MC_SEED)
    failures = []

    # ADC gain statistics: 3 devices x 8 channels, components 66 ppm within
    # device and 116.6 ppm between (total 134); estimator noise ~3 ppm
    within, between = 66.0, 116.6
    total = math.hypot(within, between)
    x = np.linspace(-10, 10, 101)
    ssx = math.sqrt(np.sum((x - x.mean()) ** 2))
    noise_v = 3e-6 * ssx  # puts the OLS gain std near 3 ppm
    recovered = []
    grand_means = []
    for _ in range(100):
        groups = {}
        for d in range(3):
            dev = rng.normal(0.0, between)
            gains = []
            for _c in range(8):
                g = 1e-6 * (-4459.0 + dev + rng.normal(0.0, within))
                y = (1 + g) * x + rng.normal(0, noise_v, x.size)
                gains.append((ols_fit(SweepRecord(v_in=x, v_out=y)).gain - 1) * 1e6)
            groups[f"dev{d}"] = gains
        dec = variance_decomposition(GroupedSamples(groups), ddof=1)
        recovered.append((dec.within_std, dec.total_std))
        grand_means.append(dec.grand_mean)
    recovered = np.array(recovered)
    got_within = float(np.sqrt(np.mean(recovered[:, 0] ** 2)))
    got_total = float(np.sqrt(np.mean(recovered[:, 1] ** 2)))
    mean_tol = 3 * total / math.sqrt(24 * 100)
    if abs(got_within / within - 1) > 0.15:
        failures.append(f"adc-within {got_within:.1f}")
    if abs(got_total / total - 1) > 0.15:
        failures.append(f"adc-total {got_total:.1f}")
    if abs(np.mean(grand_means) + 4459.0) > mean_tol:
        failures.append(f"adc-mean {np.mean(grand_means):.1f}")

    # time-base statistics: counter CSV over 6 temperatures x 3 boards
    table_ii = [
        (0.0, -19.9, 2.72),
        (10.0, -19.0, 2.68),
        (20.0, -17.3, 2.47),
        (30.0, -14.2, 1.93),
        (40.0, -13.2, 1.42),
        (50.0, -12.5, 1.40),
    ]
    known_base, rate = 1e10, 50e3
    reps = 30
    got_totals, got_grand = [], []
    for _ in range(reps):
        rows = ["count,device,temperature_c"]
        for temp, mean_ppm, board_std in table_ii:
            for b in range(3):
                e_r = 1e-6 * rng.normal(mean_ppm, board_std)
                true_count = known_base / rate * (1 + e_r)
                for c in np.floor(true_count + rng.uniform(0, 1, 100)):
                    rows.append(f"{int(c)},board{b},{temp}")
        path = tmp_path / "counter.csv"
        path.write_text("\n".join(rows) + "\n")
        cells = {}
        for row in read_counter_csv(path):
            cells.setdefault((row["temperature_c"], row["device"]), []).append(row["count"])
        groups = {}
        for (temp, _b), counts in cells.items():
            est = one_counter_estimate(counts, known_base, 1 / rate)
            groups.setdefault(str(temp), []).append((est.r_mean - 1) * 1e6)
        dec = variance_decomposition(GroupedSamples(groups), ddof=0)
        got_totals.append(dec.total_std)
        got_grand.append(dec.grand_mean)
    sigma_r_t = float(np.sqrt(np.mean(np.array(got_totals) ** 2)))
    # expected total from the synthesized components (law of total variance,
    # frequency weighted): within 2.18 ppm, between-temperature 2.86 ppm
    expect_total = math.sqrt(
        np.mean([s**2 for _, _, s in table_ii])
        + np.var([m for _, m, _ in table_ii])
    )
    if abs(sigma_r_t / expect_total - 1) > 0.15:
        failures.append(f"pwm-total {sigma_r_t:.2f} vs {expect_total:.2f}")
    if abs(sigma_r_t / 3.67 - 1) > 0.15:
        failures.append(f"pwm-total-vs-table {sigma_r_t:.2f}")
    if abs(np.mean(got_grand) + 16.02) > 3 * 3.67 / math.sqrt(18 * reps):
        failures.append(f"pwm-mean {np.mean(got_grand):.2f}")

    # PLL delay statistics: 1000 draws per profile through delay_statistics
    chain = paper_profile()
    for idx, (name, model) in enumerate(sorted(chain.pll_profiles.items())):
        draws = pll_sample(model, np.random.default_rng([MC_SEED, idx]), 1000)
        stats = delay_statistics(draws)
        if abs(stats.mean - model.mean) > 3 * model.std / math.sqrt(1000):
            failures.append(f"pll-{name}-mean {stats.mean * 1e6:.2f}")
        if abs(stats.std / model.std - 1) > 0.15:
            failures.append(f"pll-{name}-std {stats.std * 1e6:.2f}")
        if stats.minimum < model.min:
            failures.append(f"pll-{name}-min")

    check(9, "table round-trips from synthesized CSVs", not failures, f"failed: {failures or 'none'}")
