"""Recording -> model-window preprocessing.

Pipeline: median-filter baseline removal at the native rate, linear
resampling to 500 Hz, 10 s window extraction, per-window z-scoring.
All functions are pure; recordings rejected here (too short, flat line)
raise typed errors carrying the recording id.
"""

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ecgflow.core import (
    MODEL_INPUT_LENGTH,
    MODEL_INPUT_RATE_HZ,
    DomainError,
    EcgRecording,
    EcgflowError,
    NormalizedWindow,
)

FLAT_SIGNAL_STD = 1e-12


class DspError(EcgflowError):
    code = "DspError"


class TooShort(DspError):
    code = "TooShort"


class BadWindow(DspError):
    code = "BadWindow"


class FlatSignal(DspError):
    code = "FlatSignal"


@dataclass(frozen=True)
class DspConfig:
    """Config keys: dsp.baseline_window_s, dsp.window_policy."""

    baseline_window_s: float = 0.6
    window_policy: str = "central"

    def __post_init__(self):
        if self.window_policy not in ("central", "first"):
            raise DomainError(f"unknown window policy {self.window_policy!r}")
        if self.baseline_window_s <= 0:
            raise DomainError("baseline_window_s must be positive")


def baseline_window_samples(rate_hz: int, window_s: float = 0.6) -> int:
    """Odd sample count nearest to window_s * rate; ties resolve upward."""
    w = int(round(window_s * rate_hz))
    if w % 2 == 0:
        w += 1
    return max(w, 3)


def resample_linear(samples, src_hz: int, dst_hz: int) -> np.ndarray:
    """Linear-interpolation resampling.

    Output length is round(n * dst/src); output[k] interpolates the input at
    position k*src/dst, clamping past the last sample. Identity (copy) when
    the rates match.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.size < 2:
        raise TooShort(f"resampling needs at least 2 samples, got {x.size}")
    if src_hz <= 0 or dst_hz <= 0:
        raise DomainError("sample rates must be positive")
    if src_hz == dst_hz:
        return x.copy()
    n_out = round(x.size * dst_hz / src_hz)
    positions = np.arange(n_out) * (src_hz / dst_hz)
    return np.interp(positions, np.arange(x.size), x)


def _running_median(x: np.ndarray, window: int) -> np.ndarray:
    """Median over the window centered at each index, truncated at the edges."""
    n = x.size
    half = window // 2
    med = np.empty(n, dtype=np.float64)
    if n >= window:
        med[half : n - half] = np.median(sliding_window_view(x, window), axis=1)
    for i in range(min(half, n)):
        med[i] = np.median(x[: i + half + 1])
    for i in range(max(n - half, 0), n):
        med[i] = np.median(x[i - half :])
    return med


def remove_baseline(samples, window_samples: int) -> np.ndarray:
    """Subtract the running median (baseline wander) from the signal."""
    x = np.asarray(samples, dtype=np.float64)
    if window_samples % 2 == 0 or window_samples < 1:
        raise BadWindow(f"window must be odd and positive, got {window_samples}")
    if window_samples > x.size:
        raise BadWindow(
            f"window {window_samples} exceeds signal length {x.size}"
        )
    return x - _running_median(x, window_samples)


def extract_window(samples_500hz, policy: str = "central") -> tuple[np.ndarray, float]:
    """Take the 5000-sample model window; returns (window, window_start_s)."""
    x = np.asarray(samples_500hz, dtype=np.float64)
    if x.size < MODEL_INPUT_LENGTH:
        raise TooShort(
            f"need {MODEL_INPUT_LENGTH} samples at {MODEL_INPUT_RATE_HZ} Hz, got {x.size}"
        )
    if policy == "central":
        start = (x.size - MODEL_INPUT_LENGTH) // 2
    elif policy == "first":
        start = 0
    else:
        raise DomainError(f"unknown window policy {policy!r}")
    window = x[start : start + MODEL_INPUT_LENGTH]
    return window, start / MODEL_INPUT_RATE_HZ


def zscore(x: np.ndarray) -> np.ndarray:
    """Subtract mean, divide by population standard deviation."""
    x = np.asarray(x, dtype=np.float64)
    std = float(x.std())
    if std < FLAT_SIGNAL_STD:
        raise FlatSignal("signal is constant (lead-off or disconnected)")
    return (x - x.mean()) / std


def standardize(
    window, *, source_recording_id: str, window_start_s: float
) -> NormalizedWindow:
    """Z-score a 5000-sample window into the model-ready form."""
    x = np.asarray(window, dtype=np.float64)
    if x.size != MODEL_INPUT_LENGTH:
        raise TooShort(f"standardize expects {MODEL_INPUT_LENGTH} samples, got {x.size}")
    return NormalizedWindow(
        values=zscore(x),
        source_recording_id=source_recording_id,
        window_start_s=window_start_s,
    )


def preprocess(recording: EcgRecording, config: DspConfig = DspConfig()) -> NormalizedWindow:
    """Full pipeline: baseline removal -> resample to 500 Hz -> window -> z-score.

    Deterministic; rejections re-raise with the recording id attached.
    """
    try:
        window_samples = baseline_window_samples(
            recording.sample_rate_hz, config.baseline_window_s
        )
        cleaned = remove_baseline(recording.samples, window_samples)
        at_500 = resample_linear(cleaned, recording.sample_rate_hz, MODEL_INPUT_RATE_HZ)
        window, start_s = extract_window(at_500, config.window_policy)
        return standardize(
            window,
            source_recording_id=recording.recording_id,
            window_start_s=start_s,
        )
    except DspError as exc:
        exc.recording_id = recording.recording_id
        raise
