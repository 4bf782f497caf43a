"""EMG preprocessing chain: bandpass, 60 Hz notch, rectification, windowing,
per-epoch scaling, and SNR.

Filters are Butterworth designs applied forward-backward (zero phase) so
window labels never shift against the raw trace. At the minimum sampling rate
(500 Hz) the 250 Hz upper cutoff sits on Nyquist, where low-pass shaping is
vacuous; the bandpass degrades gracefully to its high-pass half there.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy.signal import butter, sosfiltfilt, sosfreqz

from .signals import EmgTrace, Muscle, MuscleClass, window_grid


@dataclass(frozen=True)
class FilterSpec:
    """Preprocessing cutoffs (Hz) and filter orders."""

    bandpass_lo: float = 10.0
    bandpass_hi: float = 250.0
    notch_lo: float = 59.0
    notch_hi: float = 61.0
    order: int = 4
    notch_order: int = 2

    def __post_init__(self):
        if not self.bandpass_lo < self.bandpass_hi:
            raise ValueError("bandpass_lo must be below bandpass_hi")
        if not (self.bandpass_lo < self.notch_lo < self.notch_hi < self.bandpass_hi):
            raise ValueError("notch band must lie strictly inside the passband")


@dataclass
class Epoch:
    """One fixed-length analysis window, min-max scaled to [0, 1]."""

    muscle: Muscle
    values: np.ndarray
    label: MuscleClass | None = None
    source_t0: float = 0.0  # ms, start of the window in trace time


def _bandpass_sos(spec: FilterSpec, fs: float):
    nyq = fs / 2.0
    if spec.bandpass_hi >= 0.99 * nyq:
        # Upper cutoff at/above Nyquist: only the high-pass half is realizable.
        return butter(spec.order, spec.bandpass_lo, btype="high", fs=fs, output="sos")
    return butter(
        spec.order,
        [spec.bandpass_lo, spec.bandpass_hi],
        btype="band",
        fs=fs,
        output="sos",
    )


def _notch_sos(spec: FilterSpec, fs: float):
    return butter(
        spec.notch_order,
        [spec.notch_lo, spec.notch_hi],
        btype="bandstop",
        fs=fs,
        output="sos",
    )


def _check_fs(trace: EmgTrace, spec: FilterSpec):
    if trace.fs < 2.0 * spec.bandpass_hi:
        raise ValueError(
            f"fs {trace.fs} Hz too low for a {spec.bandpass_hi} Hz cutoff"
        )


def bandpass(trace: EmgTrace, spec: FilterSpec = FilterSpec()) -> EmgTrace:
    """Zero-phase band-limit to [bandpass_lo, bandpass_hi]."""
    _check_fs(trace, spec)
    out = sosfiltfilt(_bandpass_sos(spec, trace.fs), trace.samples)
    return EmgTrace(muscle=trace.muscle, fs=trace.fs, samples=out, t0=trace.t0)


def notch(trace: EmgTrace, spec: FilterSpec = FilterSpec()) -> EmgTrace:
    """Zero-phase band-stop over [notch_lo, notch_hi] (powerline removal)."""
    _check_fs(trace, spec)
    out = sosfiltfilt(_notch_sos(spec, trace.fs), trace.samples)
    return EmgTrace(muscle=trace.muscle, fs=trace.fs, samples=out, t0=trace.t0)


def rectify(trace: EmgTrace) -> EmgTrace:
    """Elementwise absolute value."""
    return EmgTrace(
        muscle=trace.muscle, fs=trace.fs, samples=np.abs(trace.samples), t0=trace.t0
    )


def scale(values: np.ndarray) -> np.ndarray:
    """Min-max scale to [0, 1]; a constant window maps to all zeros."""
    values = np.asarray(values, dtype=float)
    lo = values.min()
    hi = values.max()
    if hi == lo:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)


def window(
    trace: EmgTrace, window_ms: float = 1000.0, stride_ms: float = 250.0
) -> list[Epoch]:
    """Slice into scaled epochs at stride offsets; trailing partials dropped.

    A trace shorter than one window yields an empty list.
    """
    starts, win_n = window_grid(len(trace.samples), trace.fs, window_ms, stride_ms)
    epochs = []
    for start in starts:
        vals = scale(trace.samples[start : start + win_n])
        epochs.append(
            Epoch(
                muscle=trace.muscle,
                values=vals,
                source_t0=trace.t0 + start * 1000.0 / trace.fs,
            )
        )
    return epochs


def preprocess(trace: EmgTrace, spec: FilterSpec = FilterSpec()) -> EmgTrace:
    """Full pre-windowing chain: bandpass -> notch -> rectify."""
    return rectify(notch(bandpass(trace, spec), spec))


def process_trace(
    trace: EmgTrace,
    spec: FilterSpec = FilterSpec(),
    window_ms: float = 1000.0,
    stride_ms: float = 250.0,
    labels: list[MuscleClass] | None = None,
) -> list[Epoch]:
    """Preprocess and window a trace, optionally attaching ground-truth labels."""
    epochs = window(preprocess(trace, spec), window_ms, stride_ms)
    if labels is not None:
        if len(labels) != len(epochs):
            raise ValueError(
                f"label count {len(labels)} != epoch count {len(epochs)}"
            )
        epochs = [replace(e, label=lab) for e, lab in zip(epochs, labels)]
    return epochs


def snr_db(signal_segment: np.ndarray, noise_segment: np.ndarray) -> float:
    """20*log10(A_signal / A_noise), A = peak rectified amplitude."""
    signal_segment = np.asarray(signal_segment, dtype=float)
    noise_segment = np.asarray(noise_segment, dtype=float)
    if signal_segment.size == 0 or noise_segment.size == 0:
        raise ValueError("segments must be non-empty")
    a_noise = float(np.max(np.abs(noise_segment)))
    if a_noise == 0:
        raise ValueError("noise amplitude is zero; SNR undefined")
    a_signal = float(np.max(np.abs(signal_segment)))
    return 20.0 * np.log10(a_signal / a_noise)


def frequency_response(
    spec: FilterSpec = FilterSpec(),
    fs: float = 500.0,
    n_points: int = 2048,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Magnitude response (dB) of the forward-backward bandpass and notch.

    Returns (freq_hz, bandpass_db, notch_db). Gains are doubled in dB to
    account for the two filtering passes.
    """
    w, h_bp = sosfreqz(_bandpass_sos(spec, fs), worN=n_points, fs=fs)
    _, h_n = sosfreqz(_notch_sos(spec, fs), worN=n_points, fs=fs)
    eps = 1e-300
    bp_db = 2.0 * 20.0 * np.log10(np.abs(h_bp) + eps)
    n_db = 2.0 * 20.0 * np.log10(np.abs(h_n) + eps)
    return w, bp_db, n_db


def dump_response_csv(
    path: str | Path, spec: FilterSpec = FilterSpec(), fs: float = 500.0
) -> Path:
    """Write the chain's frequency response as freq_hz vs gain_db CSV."""
    freq, bp_db, n_db = frequency_response(spec, fs)
    path = Path(path)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["freq_hz", "bandpass_db", "notch_db", "chain_db"])
        for row in zip(freq, bp_db, n_db, bp_db + n_db):
            writer.writerow([f"{v:.6f}" for v in row])
    return path
