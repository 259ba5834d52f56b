"""Countermeasures against interpolation image artifacts: hard-threshold
masking above the instantaneous Nyquist frequency and zero-phase low-pass
prefiltering.  The third countermeasure, raising the spline order, is just
``interpolate_nonuniform`` with a high order (12 by default elsewhere).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.signal import filtfilt, firwin, kaiserord

from .spline_interp import UniformSignal
from .tf_analysis import TFRepresentation

__all__ = ["MaskedTFR", "inf_hard_threshold", "lowpass_prefilter"]


@dataclass(frozen=True, eq=False)
class MaskedTFR(TFRepresentation):
    """TF representation with everything above the INF curve zeroed."""

    inf_curve: Callable[[np.ndarray], np.ndarray] = None


def inf_hard_threshold(tfr: TFRepresentation,
                       inf_curve: Callable[[np.ndarray], np.ndarray]) -> MaskedTFR:
    """Zero every cell strictly above the INF curve; keep the rest verbatim.

    The boundary cell at the INF itself is kept (frequencies <= INF pass).
    Idempotent, bitwise: masking a masked representation changes nothing.
    """
    inf_vals = np.asarray(inf_curve(tfr.time_axis), dtype=float)
    if inf_vals.shape != tfr.time_axis.shape:
        inf_vals = np.broadcast_to(inf_vals, tfr.time_axis.shape)
    keep = tfr.freq_axis[:, None] <= inf_vals[None, :]
    masked = np.where(keep, tfr.matrix, 0.0)
    masked.setflags(write=False)
    return MaskedTFR(
        matrix=masked,
        freq_axis=tfr.freq_axis,
        time_axis=tfr.time_axis,
        method=tfr.method,
        window_meta=tfr.window_meta,
        inf_curve=inf_curve,
    )


def lowpass_prefilter(sig: UniformSignal, cutoff_hz: float,
                      transition_hz: float) -> UniformSignal:
    """Zero-phase FIR low-pass: windowed-sinc (Kaiser), forward-backward.

    The passband extends to ``cutoff_hz`` (ripple well under 0.01 dB after
    the two passes) and the stopband starts at ``cutoff_hz +
    transition_hz`` with at least 60 dB net attenuation.  Known caveat:
    for signals that are not band-limited this perturbs rather than
    removes interpolation images, so it is not part of default pipelines.
    """
    if cutoff_hz <= 0.0 or transition_hz <= 0.0:
        raise ValueError("cutoff and transition must be positive")
    if cutoff_hz + transition_hz >= sig.rate / 2.0:
        raise ValueError(
            f"cutoff + transition ({cutoff_hz + transition_hz} Hz) must stay "
            f"below Nyquist ({sig.rate / 2.0} Hz)"
        )
    # single-pass design for 66 dB / half the net ripple; filtfilt squares
    # the magnitude response
    numtaps, beta = kaiserord(66.0, transition_hz / (sig.rate / 2.0))
    numtaps |= 1
    if len(sig) <= 3 * numtaps:
        raise ValueError(
            f"signal too short for the filter: needs > {3 * numtaps} samples"
        )
    taps = firwin(numtaps, cutoff_hz + transition_hz / 2.0,
                  window=("kaiser", beta), fs=sig.rate)
    filtered = filtfilt(taps, 1.0, sig.values)
    filtered.setflags(write=False)
    return UniformSignal(values=filtered, rate=sig.rate, t_start=sig.t_start)
