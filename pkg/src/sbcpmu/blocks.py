"""The four parametric error blocks and the forward acquisition operator.

Each block contributes one complex factor to the combined system response:
the anti-aliasing filter (static magnitude/phase), the ADC static transfer
(pure gain), the PWM time base (phase ramp within each PPS interval) and the
software-PLL synchronization delay (pure phase).  ``acquire`` runs a phasor
through all four blocks in the time domain.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy import stats

from .errors import ModelParameterError
from .signals import Phasor, SamplingSchedule, Waveform

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class BlockResponse:
    """One factor of the combined system response.

    ``magnitude``/``phase`` are the expected complex factor; the ``*_std``
    fields carry the standard uncertainty of the relative magnitude and of
    the phase.  ``time_slope_phase`` (rad/s) captures phase terms that grow
    linearly inside a PPS interval (the time-base block); it is zero for
    static blocks.
    """

    magnitude: float
    phase: float
    rel_magnitude_std: float = 0.0
    phase_std: float = 0.0
    time_slope_phase: float = 0.0

    def __post_init__(self):
        if self.magnitude <= 0:
            raise ValueError("magnitude must be > 0")
        if self.rel_magnitude_std < 0 or self.phase_std < 0:
            raise ValueError("standard uncertainties must be >= 0")

    @property
    def factor(self) -> complex:
        return self.magnitude * complex(math.cos(self.phase), math.sin(self.phase))

    def phase_at(self, t: float) -> float:
        return self.phase + self.time_slope_phase * t


IDENTITY_RESPONSE = BlockResponse(magnitude=1.0, phase=0.0)


# ---------------------------------------------------------------------------
# AAF
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AafModel:
    """First-order RC anti-aliasing filter with component tolerances."""

    resistance: float
    capacitance: float
    resistor_tolerance: float = 0.0
    capacitor_tolerance: float = 0.0

    def __post_init__(self):
        if self.resistance <= 0 or self.capacitance <= 0:
            raise ValueError("R and C must be strictly positive")
        if not (0 <= self.resistor_tolerance < 1 and 0 <= self.capacitor_tolerance < 1):
            raise ValueError("tolerances must lie in [0, 1)")

    @property
    def tau(self) -> float:
        return self.resistance * self.capacitance

    @property
    def tau_std(self) -> float:
        """Standard uncertainty of tau, tolerances taken as uniform half-widths."""
        u_r = self.resistance * self.resistor_tolerance / SQRT3
        u_c = self.capacitance * self.capacitor_tolerance / SQRT3
        return math.hypot(self.resistance * u_c, self.capacitance * u_r)


def aaf_cutoff_model(
    cutoff_hz: float,
    resistor_tolerance: float = 0.0,
    capacitor_tolerance: float = 0.0,
    resistance: float = 1.0e3,
) -> AafModel:
    """Convenience constructor from the -3 dB cutoff frequency."""
    tau = 1.0 / (2.0 * math.pi * cutoff_hz)
    return AafModel(
        resistance=resistance,
        capacitance=tau / resistance,
        resistor_tolerance=resistor_tolerance,
        capacitor_tolerance=capacitor_tolerance,
    )


def aaf_response(model: AafModel, omega: float) -> BlockResponse:
    """Magnitude/phase response of the RC filter with propagated uncertainty."""
    if omega <= 0:
        raise ValueError("omega must be > 0")
    tau = model.tau
    wt = omega * tau
    h = 1.0 / math.sqrt(1.0 + wt * wt)
    phase = -math.atan(wt)
    u_tau = model.tau_std
    # u_H = u_tau * H^3 * omega^2 * tau, reported relative to H
    rel_mag_std = (u_tau / tau) * wt * wt * h * h if tau > 0 else 0.0
    phase_std = u_tau * h * h * omega
    return BlockResponse(
        magnitude=h,
        phase=phase,
        rel_magnitude_std=rel_mag_std,
        phase_std=phase_std,
    )


# ---------------------------------------------------------------------------
# ADC
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AdcModel:
    """Static ADC transfer: gain, offset, bipolar quantizer and system noise."""

    gain: float = 1.0
    offset: float = 0.0
    bits: int = 16
    vref: float = 10.0
    noise_rms: float = 0.0
    gain_rel_std: float = 0.0

    def __post_init__(self):
        if self.bits < 1:
            raise ValueError("bits must be >= 1")
        if self.vref <= 0:
            raise ValueError("vref must be > 0")
        if self.noise_rms < 0:
            raise ValueError("noise_rms must be >= 0")

    @property
    def quantum(self) -> float:
        """LSB size over the bipolar full scale [-vref, +vref)."""
        return 2.0 * self.vref / (1 << self.bits)


def adc_convert(model: AdcModel, v_in, noise_draw=0.0):
    """Apply gain/offset/noise, quantize, and report end-code saturation.

    Returns ``(v_out, saturated)`` where ``saturated`` is a boolean mask.
    """
    v = model.gain * np.asarray(v_in, dtype=float) + model.offset + noise_draw
    q = model.quantum
    code = np.rint(v / q)
    code_min = -(1 << (model.bits - 1))
    code_max = (1 << (model.bits - 1)) - 1
    saturated = (code < code_min) | (code > code_max)
    code = np.clip(code, code_min, code_max)
    return code * q, saturated


def adc_transfer(model: AdcModel, v_in, noise_draw=0.0):
    """Quantized output voltage for a given input (saturating at end codes)."""
    out, _ = adc_convert(model, v_in, noise_draw)
    if np.ndim(v_in) == 0:
        return float(out)
    return out


def adc_response(model: AdcModel) -> BlockResponse:
    """Phasor-domain response of the converter: a pure real gain.

    The offset has no phasor-domain meaning and is excluded; the one-cycle
    Fourier estimator rejects it exactly.
    """
    return BlockResponse(
        magnitude=model.gain,
        phase=0.0,
        rel_magnitude_std=model.gain_rel_std,
    )


# ---------------------------------------------------------------------------
# PWM time base
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TimebaseModel:
    """Time-base deviation statistics over the operating temperature range.

    ``e_r_by_temperature`` holds (temperature_c, mean_ppm, std_ppm) rows on a
    strictly increasing temperature grid.  ``overall_mean_ppm`` and
    ``overall_std_ppm`` are the all-conditions statistics used when no
    temperature is supplied.
    """

    overall_mean_ppm: float
    overall_std_ppm: float
    e_r_by_temperature: tuple = ()
    estimator_std_ppm: float = 0.0
    board_std_ppm: float = 0.0

    def __post_init__(self):
        rows = tuple((float(t), float(m), float(s)) for t, m, s in self.e_r_by_temperature)
        temps = [r[0] for r in rows]
        if temps != sorted(temps) or len(set(temps)) != len(temps):
            raise ModelParameterError("temperature grid must be strictly increasing")
        if any(r[2] < 0 for r in rows) or self.overall_std_ppm < 0:
            raise ModelParameterError("stds must be >= 0")
        object.__setattr__(self, "e_r_by_temperature", rows)

    def _interp(self, temperature: float, column: int) -> float:
        grid = np.array([r[0] for r in self.e_r_by_temperature])
        vals = np.array([r[column] for r in self.e_r_by_temperature])
        return float(np.interp(temperature, grid, vals))

    def mean_ppm(self, temperature: Optional[float] = None) -> float:
        if temperature is None or not self.e_r_by_temperature:
            return self.overall_mean_ppm
        return self._interp(temperature, 1)

    def std_ppm(self, temperature: Optional[float] = None) -> float:
        if temperature is None or not self.e_r_by_temperature:
            return self.overall_std_ppm
        return self._interp(temperature, 2)

    def deviation_ratio(self, temperature: Optional[float] = None) -> float:
        return 1.0 + 1e-6 * self.mean_ppm(temperature)


def timebase_response(
    model: TimebaseModel,
    omega: float,
    t: float,
    temperature: Optional[float] = None,
    per_temperature_std: bool = False,
) -> BlockResponse:
    """Phase-ramp response of the PWM block at elapsed time t within a PPS interval."""
    if t < 0:
        raise ValueError("t must be >= 0 (elapsed time since the PPS reset)")
    e_r = 1e-6 * model.mean_ppm(temperature)
    u_r = 1e-6 * (model.std_ppm(temperature) if per_temperature_std else model.overall_std_ppm)
    return BlockResponse(
        magnitude=1.0,
        phase=omega * e_r * t,
        phase_std=omega * u_r * t,
        time_slope_phase=omega * e_r,
    )


# ---------------------------------------------------------------------------
# PLL delay
# ---------------------------------------------------------------------------

_PLL_FAMILIES = ("shifted-gamma", "truncated-normal", "empirical-histogram")


@dataclass(frozen=True)
class PllDelayModel:
    """Random synchronization delay of the software PLL.

    All times are seconds.  ``min`` is a hard lower bound of the support.
    The default shifted-gamma family matches the hard lower bound and the
    positive skew seen in the delay histograms; truncated-normal and an
    empirical histogram are available for sensitivity studies.
    """

    family: str = "shifted-gamma"
    min: float = 0.0
    max: float = math.inf
    mean: float = 0.0
    std: float = 0.0
    mode: Optional[float] = None
    mode_std: Optional[float] = None
    histogram: Optional[tuple] = None  # (bin_edges, counts)

    def __post_init__(self):
        if self.family not in _PLL_FAMILIES:
            raise ModelParameterError(f"unknown delay family {self.family!r}")
        if self.std < 0:
            raise ModelParameterError("std must be >= 0")
        if self.family == "empirical-histogram":
            if self.histogram is None:
                raise ModelParameterError("empirical-histogram requires bin data")
            edges, counts = self.histogram
            edges = tuple(float(e) for e in edges)
            counts = tuple(int(c) for c in counts)
            if len(edges) != len(counts) + 1 or sum(counts) <= 0:
                raise ModelParameterError("malformed histogram")
            object.__setattr__(self, "histogram", (edges, counts))
            return
        if not (self.min <= self.mean <= self.max):
            raise ModelParameterError(
                f"need min <= mean <= max, got {self.min} / {self.mean} / {self.max}"
            )
        if self.mode is not None and not (self.min <= self.mode <= self.mean):
            raise ModelParameterError("need min <= mode <= mean")
        if self.family == "shifted-gamma" and self.std > 0 and self.mean <= self.min:
            raise ModelParameterError("shifted-gamma needs mean > min when std > 0")

    @property
    def degenerate(self) -> bool:
        return self.std == 0.0


def pll_sample(model: PllDelayModel, rng: np.random.Generator, size=None):
    """Draw synchronization delays from the model (seconds)."""
    if model.family == "empirical-histogram":
        edges, counts = model.histogram
        edges = np.asarray(edges)
        p = np.asarray(counts, dtype=float)
        p /= p.sum()
        idx = rng.choice(len(counts), size=size, p=p)
        lo, hi = edges[idx], edges[idx + 1]
        return lo + rng.uniform(0.0, 1.0, size=size) * (hi - lo)
    if model.degenerate:
        if size is None:
            return model.mean
        return np.full(size, model.mean)
    if model.family == "shifted-gamma":
        span = model.mean - model.min
        shape = (span / model.std) ** 2
        scale = model.std**2 / span
        draws = model.min + rng.gamma(shape, scale, size=size)
        return np.minimum(draws, model.max) if math.isfinite(model.max) else draws
    # truncated-normal: mean/std parameterize the underlying normal
    a = (model.min - model.mean) / model.std
    b = (model.max - model.mean) / model.std if math.isfinite(model.max) else math.inf
    return stats.truncnorm.rvs(a, b, loc=model.mean, scale=model.std, size=size, random_state=rng)


def pll_response(delay: float, omega: float, delay_std: float = 0.0) -> BlockResponse:
    """Pure phase factor exp(j*omega*delay) of one synchronization delay."""
    return BlockResponse(
        magnitude=1.0,
        phase=omega * delay,
        phase_std=omega * delay_std,
    )


# ---------------------------------------------------------------------------
# Combination and the forward operator
# ---------------------------------------------------------------------------


def combined_response(
    blocks: Sequence[BlockResponse], mode: str = "worst-case"
) -> BlockResponse:
    """Combine block factors into one system response.

    Magnitudes multiply, phases and time slopes add.  Uncertainties combine
    as same-sign (worst-case) sums by default, or in quadrature for
    standard-uncertainty reporting.
    """
    if not blocks:
        raise ValueError("need at least one block")
    if mode not in ("worst-case", "quadrature"):
        raise ValueError(f"unknown combination mode {mode!r}")
    magnitude = math.prod(b.magnitude for b in blocks)
    phase = sum(b.phase for b in blocks)
    slope = sum(b.time_slope_phase for b in blocks)
    if mode == "worst-case":
        rel_std = sum(b.rel_magnitude_std for b in blocks)
        phase_std = sum(b.phase_std for b in blocks)
    else:
        rel_std = math.hypot(*(b.rel_magnitude_std for b in blocks))
        phase_std = math.hypot(*(b.phase_std for b in blocks))
    return BlockResponse(
        magnitude=magnitude,
        phase=phase,
        rel_magnitude_std=rel_std,
        phase_std=phase_std,
        time_slope_phase=slope,
    )


@dataclass(frozen=True)
class GaussianTerm:
    """Mean and standard deviation of one scalar error parameter."""

    mean: float
    std: float = 0.0

    def __post_init__(self):
        if self.std < 0:
            raise ValueError("std must be >= 0")


@dataclass(frozen=True)
class ChainModel:
    """The four parameterized error blocks plus noise terms.

    Field names carry explicit units.  The ADC carries two gain dispersions:
    ``adc_gain_ppm.std`` is the full state-of-knowledge uncertainty
    (board-to-board included) used for model bands, while
    ``adc_gain_within_device_ppm`` is the channel-to-channel dispersion of a
    single board, which is what uncorrelated sub-sequences acquired on one
    device actually exhibit.
    """

    aaf_gain_ppm: GaussianTerm = GaussianTerm(0.0)
    aaf_phase_urad: GaussianTerm = GaussianTerm(0.0)
    adc_gain_ppm: GaussianTerm = GaussianTerm(0.0)
    adc_gain_within_device_ppm: Optional[float] = None
    adc_offset_uv: GaussianTerm = GaussianTerm(0.0)
    adc_bits: Optional[int] = None  # None: ideal converter (no quantization)
    adc_vref_v: float = 10.0
    adc_noise_rms_uv: float = 0.0
    timebase: TimebaseModel = TimebaseModel(0.0, 0.0)
    pll: PllDelayModel = PllDelayModel(std=0.0)
    pll_profiles: Mapping[str, PllDelayModel] = field(default_factory=dict)
    name: str = "chain"

    @property
    def aaf_factor(self) -> complex:
        g = 1.0 + 1e-6 * self.aaf_gain_ppm.mean
        p = 1e-6 * self.aaf_phase_urad.mean
        return g * complex(math.cos(p), math.sin(p))

    @property
    def adc_gain(self) -> float:
        return 1.0 + 1e-6 * self.adc_gain_ppm.mean

    @property
    def adc_offset_v(self) -> float:
        return 1e-6 * self.adc_offset_uv.mean

    def adc_model(self) -> AdcModel:
        return AdcModel(
            gain=self.adc_gain,
            offset=self.adc_offset_v,
            bits=self.adc_bits if self.adc_bits is not None else 24,
            vref=self.adc_vref_v,
            noise_rms=1e-6 * self.adc_noise_rms_uv,
            gain_rel_std=1e-6 * self.adc_gain_ppm.std,
        )

    def sequence_gain_std_ppm(self) -> float:
        """Gain dispersion across uncorrelated sub-sequences of one device."""
        if self.adc_gain_within_device_ppm is not None:
            return self.adc_gain_within_device_ppm
        return self.adc_gain_ppm.std

    def response(
        self,
        omega: float,
        t: float = 0.0,
        delay: Optional[float] = None,
        temperature: Optional[float] = None,
        mode: str = "worst-case",
    ) -> BlockResponse:
        """Expected combined system response at elapsed time t within a PPS interval."""
        tau = self.pll.mean if delay is None else delay
        blocks = [
            BlockResponse(
                magnitude=1.0 + 1e-6 * self.aaf_gain_ppm.mean,
                phase=1e-6 * self.aaf_phase_urad.mean,
                rel_magnitude_std=1e-6 * self.aaf_gain_ppm.std,
                phase_std=1e-6 * self.aaf_phase_urad.std,
            ),
            BlockResponse(
                magnitude=self.adc_gain,
                phase=0.0,
                rel_magnitude_std=1e-6 * self.adc_gain_ppm.std,
            ),
            timebase_response(self.timebase, omega, t, temperature=temperature),
            pll_response(tau, omega, delay_std=self.pll.std),
        ]
        return combined_response(blocks, mode=mode)


def acquire(
    phasor: Phasor,
    chain: ChainModel,
    schedule: SamplingSchedule,
    rng: Optional[np.random.Generator] = None,
    temperature: Optional[float] = None,
) -> Waveform:
    """Run a phasor through the full error chain.

    The sinusoid is AAF-filtered analytically (steady-state complex scaling),
    sampled at the schedule's realized instants and converted by the ADC.
    The returned waveform carries the device-apparent (nominal) timestamps,
    which is what the downstream phasor estimator sees; the acquisition
    errors therefore show up in the recovered envelope.

    If the schedule was built with ``delays=None`` semantics (all-NaN is not
    supported; pass explicit delays), per-interval delays must already be in
    the schedule.  ``rng`` is only needed when the chain has nonzero ADC
    noise.
    """
    t_real = schedule.realized_instants()
    aaf = chain.aaf_factor
    # steady-state filtering: scale the envelope, shift the phase
    amp = phasor.amplitude * abs(aaf)
    ph = phasor.phase + math.atan2(aaf.imag, aaf.real)
    y = amp * np.cos(phasor.omega * t_real + ph)

    noise = 0.0
    noise_rms = 1e-6 * chain.adc_noise_rms_uv
    if noise_rms > 0:
        if rng is None:
            raise ValueError("rng required for nonzero ADC noise")
        noise = rng.normal(0.0, noise_rms, size=y.shape)

    if chain.adc_bits is None:
        v = chain.adc_gain * y + chain.adc_offset_v + noise
        saturated = 0
    else:
        model = AdcModel(
            gain=chain.adc_gain,
            offset=chain.adc_offset_v,
            bits=chain.adc_bits,
            vref=chain.adc_vref_v,
        )
        v, sat = adc_convert(model, y, noise)
        saturated = int(np.count_nonzero(sat))

    return Waveform(
        times=schedule.nominal_instants(),
        values=v,
        metadata={"saturated_samples": saturated},
    )


# ---------------------------------------------------------------------------
# Profile (de)serialization
# ---------------------------------------------------------------------------


def _term_to_json(term: GaussianTerm) -> dict:
    return {"mean": term.mean, "std": term.std}


def _term_from_json(obj) -> GaussianTerm:
    if isinstance(obj, (int, float)):
        return GaussianTerm(float(obj))
    return GaussianTerm(float(obj["mean"]), float(obj.get("std", 0.0)))


def _pll_to_json(model: PllDelayModel) -> dict:
    out = {
        "family": model.family,
        "min_us": model.min * 1e6,
        "mean_us": model.mean * 1e6,
        "std_us": model.std * 1e6,
    }
    if math.isfinite(model.max):
        out["max_us"] = model.max * 1e6
    if model.mode is not None:
        out["mode_us"] = model.mode * 1e6
    if model.mode_std is not None:
        out["mode_std_us"] = model.mode_std * 1e6
    if model.histogram is not None:
        edges, counts = model.histogram
        out["histogram"] = {"bin_edges_us": [e * 1e6 for e in edges], "counts": list(counts)}
    return out


def _pll_from_json(obj: dict) -> PllDelayModel:
    hist = None
    if "histogram" in obj:
        hist = (
            tuple(e * 1e-6 for e in obj["histogram"]["bin_edges_us"]),
            tuple(obj["histogram"]["counts"]),
        )
    return PllDelayModel(
        family=obj.get("family", "shifted-gamma"),
        min=obj.get("min_us", 0.0) * 1e-6,
        max=obj.get("max_us", math.inf) * 1e-6 if "max_us" in obj else math.inf,
        mean=obj.get("mean_us", 0.0) * 1e-6,
        std=obj.get("std_us", 0.0) * 1e-6,
        mode=obj["mode_us"] * 1e-6 if "mode_us" in obj else None,
        mode_std=obj["mode_std_us"] * 1e-6 if "mode_std_us" in obj else None,
        histogram=hist,
    )


def chain_to_json(chain: ChainModel) -> dict:
    return {
        "name": chain.name,
        "aaf": {
            "gain_err_ppm": _term_to_json(chain.aaf_gain_ppm),
            "phase_err_urad": _term_to_json(chain.aaf_phase_urad),
        },
        "adc": {
            "gain_err_ppm": _term_to_json(chain.adc_gain_ppm),
            "gain_err_within_device_ppm": chain.adc_gain_within_device_ppm,
            "offset_uv": _term_to_json(chain.adc_offset_uv),
            "bits": chain.adc_bits,
            "vref_v": chain.adc_vref_v,
            "noise_rms_uv": chain.adc_noise_rms_uv,
        },
        "timebase": {
            "e_r_ppm": {
                "mean": chain.timebase.overall_mean_ppm,
                "std": chain.timebase.overall_std_ppm,
            },
            "estimator_std_ppm": chain.timebase.estimator_std_ppm,
            "board_std_ppm": chain.timebase.board_std_ppm,
            "by_temperature_c": [list(r) for r in chain.timebase.e_r_by_temperature],
        },
        "pll": {
            "delay": _pll_to_json(chain.pll),
            "profiles": {k: _pll_to_json(v) for k, v in chain.pll_profiles.items()},
        },
    }


def chain_from_json(obj: dict) -> ChainModel:
    aaf = obj.get("aaf", {})
    adc = obj.get("adc", {})
    tb = obj.get("timebase", {})
    pll = obj.get("pll", {})
    e_r = _term_from_json(tb.get("e_r_ppm", 0.0))
    timebase = TimebaseModel(
        overall_mean_ppm=e_r.mean,
        overall_std_ppm=e_r.std,
        e_r_by_temperature=tuple(tuple(r) for r in tb.get("by_temperature_c", [])),
        estimator_std_ppm=tb.get("estimator_std_ppm", 0.0),
        board_std_ppm=tb.get("board_std_ppm", 0.0),
    )
    return ChainModel(
        aaf_gain_ppm=_term_from_json(aaf.get("gain_err_ppm", 0.0)),
        aaf_phase_urad=_term_from_json(aaf.get("phase_err_urad", 0.0)),
        adc_gain_ppm=_term_from_json(adc.get("gain_err_ppm", 0.0)),
        adc_gain_within_device_ppm=adc.get("gain_err_within_device_ppm"),
        adc_offset_uv=_term_from_json(adc.get("offset_uv", 0.0)),
        adc_bits=adc.get("bits"),
        adc_vref_v=adc.get("vref_v", 10.0),
        adc_noise_rms_uv=adc.get("noise_rms_uv", 0.0),
        timebase=timebase,
        pll=_pll_from_json(pll.get("delay", {})) if pll.get("delay") else PllDelayModel(),
        pll_profiles={k: _pll_from_json(v) for k, v in pll.get("profiles", {}).items()},
        name=obj.get("name", "chain"),
    )


def load_profile(path) -> ChainModel:
    with open(path) as fh:
        return chain_from_json(json.load(fh))


def save_profile(chain: ChainModel, path) -> None:
    with open(path, "w") as fh:
        json.dump(chain_to_json(chain), fh, indent=2)
        fh.write("\n")


def paper_profile() -> ChainModel:
    """The bundled characterization of the reference single-board PMU."""
    text = resources.files("sbcpmu.data").joinpath("sbc-pmu-paper.json").read_text()
    return chain_from_json(json.loads(text))


def identity_chain(bits: Optional[int] = None) -> ChainModel:
    """A chain that passes the signal through unchanged (no quantization by default)."""
    return ChainModel(adc_bits=bits, name="identity")


__all__ = [
    "AafModel",
    "AdcModel",
    "BlockResponse",
    "ChainModel",
    "GaussianTerm",
    "IDENTITY_RESPONSE",
    "PllDelayModel",
    "TimebaseModel",
    "aaf_cutoff_model",
    "aaf_response",
    "acquire",
    "adc_convert",
    "adc_response",
    "adc_transfer",
    "chain_from_json",
    "chain_to_json",
    "combined_response",
    "identity_chain",
    "load_profile",
    "paper_profile",
    "pll_response",
    "pll_sample",
    "save_profile",
    "timebase_response",
]
