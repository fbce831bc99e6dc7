"""Uncertainty propagation and the Monte Carlo validation engine.

Analytic propagation of block uncertainties to the output phasor, the
expected system-response curve with its worst-case band over one PPS
interval, and the seeded Monte Carlo that replays the error chain trial by
trial and compares the measured TVE statistics against the model.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .blocks import BlockResponse, ChainModel, GaussianTerm, acquire, pll_sample
from .errors import ScheduleGuardError
from .estimate import EstimationWindow, fourier_phasor, tve, fe
from .signals import Phasor, build_schedule

DEFAULT_COVERAGE_FACTOR = 3.3


def propagate_output(response: BlockResponse, reference: Phasor):
    """Standard uncertainty of output amplitude and phase for a given reference."""
    if reference.amplitude <= 0:
        raise ValueError("reference amplitude must be > 0")
    u_amp = response.rel_magnitude_std * reference.amplitude
    return u_amp, response.phase_std


def expanded(u: float, k: float) -> float:
    """Expanded uncertainty k*u."""
    if u < 0 or k <= 0:
        raise ValueError("need u >= 0 and k > 0")
    return k * u


@dataclass(frozen=True)
class UncertaintyBudget:
    """Per-block uncertainty contributions with combined totals."""

    contributions: tuple  # (name, rel_magnitude_std, phase_std)
    coverage_factor: float = DEFAULT_COVERAGE_FACTOR

    @property
    def worst_case(self):
        rel = sum(c[1] for c in self.contributions)
        ph = sum(c[2] for c in self.contributions)
        return rel, ph

    @property
    def quadrature(self):
        rel = math.hypot(*(c[1] for c in self.contributions))
        ph = math.hypot(*(c[2] for c in self.contributions))
        return rel, ph

    def to_json(self) -> dict:
        wc, quad = self.worst_case, self.quadrature
        return {
            "contributions": [
                {"block": n, "rel_magnitude_std": r, "phase_std_rad": p}
                for n, r, p in self.contributions
            ],
            "worst_case": {"rel_magnitude_std": wc[0], "phase_std_rad": wc[1]},
            "quadrature": {"rel_magnitude_std": quad[0], "phase_std_rad": quad[1]},
            "coverage_factor": self.coverage_factor,
        }


def budget(
    blocks: Sequence, k: float = DEFAULT_COVERAGE_FACTOR
) -> UncertaintyBudget:
    """Assemble a budget from (name, BlockResponse) pairs."""
    contributions = tuple(
        (name, resp.rel_magnitude_std, resp.phase_std) for name, resp in blocks
    )
    return UncertaintyBudget(contributions=contributions, coverage_factor=k)


# ---------------------------------------------------------------------------
# Analytic model curve
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelCurve:
    times: np.ndarray
    expected: np.ndarray
    band_hi: np.ndarray
    band_lo: np.ndarray


def _tve_of_exponent(r, p):
    return np.abs(np.exp(r + 1j * np.asarray(p)) - 1.0)


def model_curve(
    chain: ChainModel,
    omega: float,
    t_grid,
    compensated: bool = False,
    temperature: Optional[float] = None,
) -> ModelCurve:
    """Expected TVE over one PPS interval plus the worst-case uncertainty band.

    The worst-case band takes all uncertainty terms with the same sign; with
    ``compensated=True`` the means are removed (ideal compensation) and only
    the uncertainty band remains.
    """
    t = np.asarray(t_grid, dtype=float)
    m_r = 1e-6 * (chain.aaf_gain_ppm.mean + chain.adc_gain_ppm.mean)
    e_r = 1e-6 * chain.timebase.mean_ppm(temperature)
    m_p = 1e-6 * chain.aaf_phase_urad.mean + omega * t * e_r + omega * chain.pll.mean
    if compensated:
        m_r, m_p = 0.0, np.zeros_like(t)
    u_r = 1e-6 * (chain.aaf_gain_ppm.std + chain.adc_gain_ppm.std)
    u_p = (
        1e-6 * chain.aaf_phase_urad.std
        + omega * t * 1e-6 * chain.timebase.overall_std_ppm
        + omega * chain.pll.std
    )
    expected = _tve_of_exponent(m_r, m_p)
    corners = [
        _tve_of_exponent(m_r + sr * u_r, m_p + sp * u_p)
        for sr in (-1.0, 1.0)
        for sp in (-1.0, 1.0)
    ]
    return ModelCurve(
        times=t,
        expected=expected,
        band_hi=np.max(corners, axis=0),
        band_lo=np.min(corners, axis=0),
    )


# ---------------------------------------------------------------------------
# Monte Carlo engine
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class McScenario:
    """One seeded Monte Carlo experiment.

    A trial is one PPS-interval sub-sequence; ``trials`` should equal
    ``channels * duration / pps_period`` when mirroring a parallel-channel
    test session.
    """

    chain: ChainModel
    phasor: Phasor
    nominal_rate: float = 5000.0
    pps_period: float = 1.0
    trials: int = 240
    base_seed: int = 0
    duration: float = 30.0
    channels: int = 8
    compensate: bool = False
    temperature_c: Optional[float] = None
    coverage_factor: float = DEFAULT_COVERAGE_FACTOR

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.duration < self.pps_period:
            raise ValueError("duration must cover at least one PPS period")


@dataclass(frozen=True)
class TrialDraw:
    """The per-trial parameter realization (natural units)."""

    aaf_gain_ppm: float
    aaf_phase_urad: float
    adc_gain_ppm: float
    adc_offset_uv: float
    e_r_ppm: float
    delay_s: float

    def to_json(self) -> dict:
        return {
            "aaf_gain_ppm": self.aaf_gain_ppm,
            "aaf_phase_urad": self.aaf_phase_urad,
            "adc_gain_ppm": self.adc_gain_ppm,
            "adc_offset_uv": self.adc_offset_uv,
            "e_r_ppm": self.e_r_ppm,
            "delay_us": self.delay_s * 1e6,
        }


@dataclass(frozen=True)
class McResult:
    """Per-trial TVE traces sliced over one PPS interval plus model overlay."""

    t_in_pps: np.ndarray
    trial_tve: np.ndarray  # trials x len(t_in_pps)
    mean_tve: np.ndarray
    band_lo: np.ndarray
    band_hi: np.ndarray
    model_tve: np.ndarray
    model_band: np.ndarray
    coverage_factor: float
    compensated: bool
    fe_hz: float
    grand_mean_tve: float
    grand_mean_mag_err: float  # mean |relative magnitude error|
    grand_mean_phase_err: float  # mean |phase error|, rad
    window_gap_s: float  # unestimated tail of each PPS interval

    @property
    def trials(self) -> int:
        return self.trial_tve.shape[0]


def _draw_trial(scenario: McScenario, rng: np.random.Generator) -> TrialDraw:
    chain = scenario.chain
    if scenario.temperature_c is None:
        e_r = GaussianTerm(chain.timebase.overall_mean_ppm, chain.timebase.overall_std_ppm)
    else:
        e_r = GaussianTerm(
            chain.timebase.mean_ppm(scenario.temperature_c),
            chain.timebase.std_ppm(scenario.temperature_c),
        )
    return TrialDraw(
        aaf_gain_ppm=rng.normal(chain.aaf_gain_ppm.mean, chain.aaf_gain_ppm.std),
        aaf_phase_urad=rng.normal(chain.aaf_phase_urad.mean, chain.aaf_phase_urad.std),
        adc_gain_ppm=rng.normal(chain.adc_gain_ppm.mean, chain.sequence_gain_std_ppm()),
        adc_offset_uv=rng.normal(chain.adc_offset_uv.mean, chain.adc_offset_uv.std),
        e_r_ppm=rng.normal(e_r.mean, e_r.std),
        delay_s=float(pll_sample(chain.pll, rng)),
    )


def _trial_chain(chain: ChainModel, draw: TrialDraw) -> ChainModel:
    return replace(
        chain,
        aaf_gain_ppm=GaussianTerm(draw.aaf_gain_ppm),
        aaf_phase_urad=GaussianTerm(draw.aaf_phase_urad),
        adc_gain_ppm=GaussianTerm(draw.adc_gain_ppm),
        adc_offset_uv=GaussianTerm(draw.adc_offset_uv),
    )


def _mean_response_factor(
    chain: ChainModel, omega: float, times: np.ndarray, temperature: Optional[float]
) -> np.ndarray:
    """Expected complex system response at each elapsed time within the interval."""
    e_r = 1e-6 * chain.timebase.mean_ppm(temperature)
    m_p = 1e-6 * chain.aaf_phase_urad.mean + omega * times * e_r + omega * chain.pll.mean
    m_r = math.exp(1e-6 * (chain.aaf_gain_ppm.mean + chain.adc_gain_ppm.mean))
    return m_r * np.exp(1j * m_p)


def run_trial(scenario: McScenario, trial_index: int):
    """Run one seeded trial; returns (t_in_pps, tve_trace, envelope_values, draw).

    Seeding depends only on (base_seed, trial_index) so results are invariant
    under any execution order.
    """
    rng = np.random.default_rng([scenario.base_seed, trial_index])
    draw = _draw_trial(scenario, rng)
    ratio = 1.0 + 1e-6 * draw.e_r_ppm
    try:
        schedule = build_schedule(
            scenario.nominal_rate, ratio, [draw.delay_s], scenario.pps_period
        )
    except ScheduleGuardError as exc:
        raise ScheduleGuardError(
            f"trial {trial_index} aborted: {exc}; draw = {draw.to_json()}"
        ) from exc
    chain = _trial_chain(scenario.chain, draw)
    waveform = acquire(scenario.phasor, chain, schedule, rng)
    window = EstimationWindow(scenario.phasor.frequency)
    env = fourier_phasor(waveform, window, timestamp="center")
    trace = tve(env.values, scenario.phasor.value)
    return env.times, trace, env.values, draw


def monte_carlo(scenario: McScenario) -> McResult:
    """Run all trials, aggregate the TVE statistics and overlay the model curve."""
    omega = scenario.phasor.omega
    ref = scenario.phasor.value
    chain = scenario.chain

    t_in_pps = None
    traces = []
    envelopes = []
    for i in range(scenario.trials):
        times, trace, env, _ = run_trial(scenario, i)
        if t_in_pps is None:
            t_in_pps = times
        traces.append(trace)
        envelopes.append(env)
    trial_env = np.vstack(envelopes)
    trial_tve = np.vstack(traces)

    if scenario.compensate:
        comp = _mean_response_factor(chain, omega, t_in_pps, scenario.temperature_c)
        trial_env = trial_env / comp[None, :]
        trial_tve = np.abs(trial_env - ref) / abs(ref)

    mean_tve = trial_tve.mean(axis=0)
    k = scenario.coverage_factor
    spread = trial_tve.std(axis=0, ddof=1) if scenario.trials > 1 else np.zeros_like(mean_tve)
    curve = model_curve(
        chain, omega, t_in_pps, compensated=scenario.compensate,
        temperature=scenario.temperature_c,
    )

    rel_mag = np.abs(np.abs(trial_env) / abs(ref) - 1.0)
    phase_err = np.abs(np.angle(trial_env / ref))

    fe_hz = fe(
        scenario.phasor.frequency,
        chain.timebase.deviation_ratio(scenario.temperature_c),
    )
    return McResult(
        t_in_pps=t_in_pps,
        trial_tve=trial_tve,
        mean_tve=mean_tve,
        band_lo=np.maximum(mean_tve - k * spread, 0.0),
        band_hi=mean_tve + k * spread,
        model_tve=curve.expected,
        model_band=curve.band_hi,
        coverage_factor=k,
        compensated=scenario.compensate,
        fe_hz=fe_hz,
        grand_mean_tve=float(trial_tve.mean()),
        grand_mean_mag_err=float(rel_mag.mean()),
        grand_mean_phase_err=float(phase_err.mean()),
        window_gap_s=float(scenario.pps_period - t_in_pps[-1]),
    )


# ---------------------------------------------------------------------------
# Run artifacts
# ---------------------------------------------------------------------------


def write_run(result: McResult, outdir, manifest: dict) -> None:
    """Emit trials.csv, summary.csv and manifest.json into a run directory."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)

    with open(out / "trials.csv", "w", newline="") as fh:
        fh.write("t_in_pps_s,trial_id,tve\n")
        for trial in range(result.trial_tve.shape[0]):
            row = result.trial_tve[trial]
            for t, v in zip(result.t_in_pps, row):
                fh.write(f"{float(t)!r},{trial},{float(v)!r}\n")

    with open(out / "summary.csv", "w", newline="") as fh:
        fh.write("t_in_pps_s,mean_tve,band_lo,band_hi,model_tve,model_band\n")
        for i, t in enumerate(result.t_in_pps):
            fh.write(
                f"{float(t)!r},{float(result.mean_tve[i])!r},{float(result.band_lo[i])!r},"
                f"{float(result.band_hi[i])!r},{float(result.model_tve[i])!r},"
                f"{float(result.model_band[i])!r}\n"
            )

    payload = dict(manifest)
    payload.update(
        {
            "compensated": result.compensated,
            "coverage_factor": result.coverage_factor,
            "fe_hz": result.fe_hz,
            "grand_mean_tve": result.grand_mean_tve,
            "grand_mean_mag_err": result.grand_mean_mag_err,
            "grand_mean_phase_err_rad": result.grand_mean_phase_err,
            "window_gap_s": result.window_gap_s,
            "trials": result.trials,
        }
    )
    with open(out / "manifest.json", "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


__all__ = [
    "DEFAULT_COVERAGE_FACTOR",
    "McResult",
    "McScenario",
    "ModelCurve",
    "TrialDraw",
    "UncertaintyBudget",
    "budget",
    "expanded",
    "model_curve",
    "monte_carlo",
    "propagate_output",
    "run_trial",
    "write_run",
]
