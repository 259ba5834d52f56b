"""Simulation and analysis of interpolation artifacts in time-frequency
representations of non-uniformly sampled oscillatory signals."""

__version__ = "0.1.0"

from .sampling import (
    IdentifiabilityReport,
    InrReport,
    IsrEstimate,
    SampleSet,
    SamplingScheme,
    check_inr,
    check_isr_identifiability,
    estimate_isr,
    sample_signal,
    sampling_times,
)
from .signal_model import (
    IMTSignal,
    Scenario,
    ValidationReport,
    builtin_scenario,
    evaluate_imt,
    fig2_variant,
    validate_imt,
)
from .spline_interp import (
    KernelSpectrum,
    PchipInterpolant,
    SplineInterpolant,
    UniformSignal,
    cardinal_bspline,
    fundamental_spline_spectrum,
    interpolate_nonuniform,
    interpolate_pchip,
    nonuniform_bspline,
    nonuniform_bspline_truncated_power,
    resample_uniform,
)

__all__ = [name for name in dir() if not name.startswith("_")]
