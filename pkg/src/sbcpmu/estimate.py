"""Dynamic phasor extraction, standard error metrics and compensation.

The estimator is the one-cycle Fourier coefficient of the fundamental,
evaluated over a window sliding one sample at a time.  It operates on the
timestamps the device believes in, so acquisition errors appear in the
recovered envelope rather than being silently corrected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .blocks import BlockResponse
from .errors import EstimationError
from .signals import ComplexEnvelope, Waveform, wrap_phase

MIN_WINDOW_SAMPLES = 10


@dataclass(frozen=True)
class EstimationWindow:
    """One-cycle estimation window at the nominal line frequency."""

    nominal_frequency: float
    harmonic_order: int = 1

    def __post_init__(self):
        if self.nominal_frequency <= 0:
            raise ValueError("nominal_frequency must be > 0")
        if self.harmonic_order < 1:
            raise ValueError("harmonic_order must be >= 1")

    @property
    def window_length(self) -> float:
        return 1.0 / self.nominal_frequency


@dataclass(frozen=True)
class CompensatedPhasor:
    """Compensated phasor with residual errors against a reference, if known."""

    value: complex
    magnitude_error: float = 0.0
    phase_error: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.magnitude_error) and math.isfinite(self.phase_error)):
            raise ValueError("residual errors must be finite")


def fourier_phasor(
    waveform: Waveform,
    window: EstimationWindow,
    rule: str = "left",
    timestamp: str = "center",
) -> ComplexEnvelope:
    """Sliding one-cycle Fourier coefficient of harmonic n.

    c_n(t) = (2/T_p) * sum s(t_i) * exp(-j*2*pi*n*f*t_i) * dt over one
    window, a rectangular-rule approximation of the integral; ``rule`` may
    be "trapezoid" for sensitivity checks.  ``timestamp`` selects whether
    envelope samples are attributed to the window start or center.
    """
    if rule not in ("left", "trapezoid"):
        raise ValueError(f"unknown integration rule {rule!r}")
    if timestamp not in ("start", "center"):
        raise ValueError(f"unknown timestamp convention {timestamp!r}")

    t = waveform.times
    s = waveform.values
    if t.size < 2:
        raise EstimationError("waveform too short to estimate a phasor")
    dt = np.diff(t)
    step = float(np.median(dt))
    t_p = window.window_length
    n_win = round(t_p / step)
    if n_win < MIN_WINDOW_SAMPLES:
        raise EstimationError(
            f"unresolvable window: {n_win} samples per cycle (need >= {MIN_WINDOW_SAMPLES})"
        )
    if t.size < n_win:
        raise EstimationError("waveform spans less than one estimation window")

    omega_n = 2.0 * math.pi * window.harmonic_order * window.nominal_frequency
    demod = s * np.exp(-1j * omega_n * t)
    if rule == "left":
        terms = demod[:-1] * dt
    else:
        terms = 0.5 * (demod[:-1] + demod[1:]) * dt
    csum = np.concatenate(([0.0 + 0.0j], np.cumsum(terms)))
    # window j integrates the n_win sample intervals starting at sample j
    n_windows = t.size - n_win
    coeffs = (2.0 / t_p) * (csum[n_win : n_windows + n_win] - csum[:n_windows])
    starts = t[:n_windows]
    times = starts + (0.5 * t_p if timestamp == "center" else 0.0)
    return ComplexEnvelope(times=times, values=coeffs)


def tve(measured, reference):
    """Total Vector Error |measured - reference| / |reference| (fraction)."""
    ref = np.asarray(reference, dtype=complex)
    if np.any(np.abs(ref) == 0):
        raise ValueError("reference phasor must be nonzero")
    out = np.abs(np.asarray(measured, dtype=complex) - ref) / np.abs(ref)
    if np.ndim(measured) == 0 and np.ndim(reference) == 0:
        return float(out)
    return out


def fe(nominal: float, deviation_ratio: float) -> float:
    """Frequency Error f*|1 - R| of a time base with deviation ratio R."""
    if nominal <= 0:
        raise ValueError("nominal frequency must be > 0")
    return nominal * abs(1.0 - deviation_ratio)


def compensate(
    measured: complex,
    observed_response: BlockResponse,
    reference: Optional[complex] = None,
    t: float = 0.0,
) -> CompensatedPhasor:
    """Divide out the observed system response (K = 1/Lambda).

    ``t`` is the elapsed time within the PPS interval at which the
    time-dependent part of the response phase is evaluated.  Residual errors
    are computed against ``reference`` when it is supplied.
    """
    if observed_response.magnitude <= 0:
        raise ValueError("observed response magnitude must be > 0")
    phase = observed_response.phase_at(t)
    factor = observed_response.magnitude * complex(math.cos(phase), math.sin(phase))
    z = complex(measured) / factor
    if reference is None:
        return CompensatedPhasor(value=z)
    ref = complex(reference)
    mag_err = abs(z) - abs(ref)
    phase_err = wrap_phase(np.angle(z) - np.angle(ref))
    return CompensatedPhasor(value=z, magnitude_error=mag_err, phase_error=float(phase_err))


__all__ = [
    "CompensatedPhasor",
    "EstimationWindow",
    "compensate",
    "fe",
    "fourier_phasor",
    "tve",
]
