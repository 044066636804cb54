"""ecgflow: desk-scale platform for single-lead wearable ECG ingestion,
storage, AI scoring, and timed result publication."""

from ecgflow.core import (
    DeviceKind,
    EcgRecording,
    NormalizedWindow,
    PredictionResult,
    StageTimings,
    StudyId,
    content_hash,
    sigmoid,
)

__all__ = [
    "DeviceKind",
    "EcgRecording",
    "NormalizedWindow",
    "PredictionResult",
    "StageTimings",
    "StudyId",
    "content_hash",
    "sigmoid",
]

__version__ = "0.1.0"
