"""Error model of a single-board-computer PMU acquisition chain.

Forward simulation of the four error blocks (anti-aliasing filter, ADC
static transfer, PWM time base, software-PLL synchronization delay), a
sliding one-cycle phasor estimator, compensation, analytic uncertainty
propagation, seeded Monte Carlo validation, and the offline
characterization procedures that produce the model parameters.
"""

__version__ = "0.1.0"

from .blocks import (
    AafModel,
    AdcModel,
    BlockResponse,
    ChainModel,
    GaussianTerm,
    PllDelayModel,
    TimebaseModel,
    aaf_response,
    acquire,
    combined_response,
    identity_chain,
    load_profile,
    paper_profile,
    pll_response,
    save_profile,
    timebase_response,
)
from .characterize import (
    delay_statistics,
    ols_fit,
    one_counter_estimate,
    sweep_plan,
    variance_decomposition,
)
from .errors import (
    ConfigError,
    EstimationError,
    ModelParameterError,
    SbcPmuError,
    ScheduleGuardError,
)
from .estimate import EstimationWindow, compensate, fe, fourier_phasor, tve
from .mc import McScenario, budget, model_curve, monte_carlo, write_run
from .signals import (
    ComplexEnvelope,
    Phasor,
    SamplingSchedule,
    Waveform,
    build_schedule,
    ideal_envelope,
    synthesize,
    wrap_phase,
)

__all__ = [
    "AafModel",
    "AdcModel",
    "BlockResponse",
    "ChainModel",
    "ComplexEnvelope",
    "ConfigError",
    "EstimationError",
    "EstimationWindow",
    "GaussianTerm",
    "McScenario",
    "ModelParameterError",
    "Phasor",
    "PllDelayModel",
    "SamplingSchedule",
    "SbcPmuError",
    "ScheduleGuardError",
    "TimebaseModel",
    "Waveform",
    "aaf_response",
    "acquire",
    "budget",
    "build_schedule",
    "combined_response",
    "compensate",
    "delay_statistics",
    "fe",
    "fourier_phasor",
    "ideal_envelope",
    "identity_chain",
    "load_profile",
    "model_curve",
    "monte_carlo",
    "ols_fit",
    "one_counter_estimate",
    "paper_profile",
    "pll_response",
    "save_profile",
    "sweep_plan",
    "synthesize",
    "timebase_response",
    "tve",
    "variance_decomposition",
    "wrap_phase",
    "write_run",
]
