"""Shared domain types and scalar primitives used by every other module.

All types here are immutable after construction and safe to share across
threads. Sample arrays are numpy float64 with the writeable flag cleared.
"""

import hashlib
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum

import numpy as np

MODEL_INPUT_LENGTH = 5000
MODEL_INPUT_RATE_HZ = 500
ACQUISITION_SECONDS = 30.0
DURATION_TOLERANCE_S = 0.5


class EcgflowError(Exception):
    """Base for all typed errors; `code` is the stable machine-readable name."""

    code = "Error"

    def __init__(self, message: str = "", *, recording_id: str | None = None):
        super().__init__(message or self.code)
        self.recording_id = recording_id


class DomainError(EcgflowError):
    code = "DomainError"


class BadRequest(EcgflowError):
    code = "BadRequest"


class DeviceKind(str, Enum):
    APPLE_WATCH = "apple_watch"
    KARDIA = "kardia"
    FITBIT = "fitbit"

    @classmethod
    def parse(cls, text: str) -> "DeviceKind":
        normalized = text.strip().lower().replace("-", "_").replace(" ", "_")
        aliases = {
            "apple_watch": cls.APPLE_WATCH,
            "applewatch": cls.APPLE_WATCH,
            "watch": cls.APPLE_WATCH,
            "kardia": cls.KARDIA,
            "kardiamobile": cls.KARDIA,
            "fitbit": cls.FITBIT,
        }
        kind = aliases.get(normalized)
        if kind is None:
            raise DomainError(f"unknown device kind: {text!r}")
        return kind

    # Expected sample rate per device; None means read from the record.
    @property
    def contract_rate_hz(self) -> int | None:
        return {DeviceKind.APPLE_WATCH: 500, DeviceKind.KARDIA: 100}.get(self)


STUDY_ID_HEX_LEN = 16


@dataclass(frozen=True)
class StudyId:
    """Opaque pseudonymous token standing in for an external identifier."""

    value: str

    def __post_init__(self):
        if len(self.value) != STUDY_ID_HEX_LEN or any(
            c not in "0123456789abcdef" for c in self.value
        ):
            raise DomainError(f"study id must be {STUDY_ID_HEX_LEN} lowercase hex chars")

    def __str__(self) -> str:
        return self.value


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=np.float64)
    # Always copy so callers cannot mutate us through an aliased view.
    if out is arr:
        out = out.copy()
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class EcgRecording:
    """Canonical single-lead recording in millivolts with device provenance."""

    recording_id: str
    device: DeviceKind
    study_id: StudyId
    sample_rate_hz: int
    samples: np.ndarray
    recorded_at: datetime
    received_at: datetime
    lead: str = "I"

    def __post_init__(self):
        object.__setattr__(self, "samples", _readonly(self.samples))
        if self.samples.size == 0:
            raise DomainError("recording has no samples")
        if self.sample_rate_hz <= 0:
            raise DomainError("sample_rate_hz must be positive")

    @property
    def duration_seconds(self) -> float:
        return len(self.samples) / self.sample_rate_hz


@dataclass(frozen=True, eq=False)
class NormalizedWindow:
    """Model-ready 10 s / 500 Hz / 5000-sample z-scored vector."""

    values: np.ndarray
    source_recording_id: str
    window_start_s: float

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(self.values))
        if len(self.values) != MODEL_INPUT_LENGTH:
            raise DomainError(
                f"normalized window must have {MODEL_INPUT_LENGTH} values, "
                f"got {len(self.values)}"
            )
        mean = float(self.values.mean())
        std = float(self.values.std())
        if abs(mean) > 1e-9 or abs(std - 1.0) > 1e-6:
            raise DomainError(
                f"window is not z-scored (mean {mean:.3e}, std {std:.6f})"
            )


@dataclass(frozen=True)
class StageTimings:
    """Five-stage latency decomposition of one end-to-end prediction.

    total_s is stored redundantly; construction and deserialization both
    check it against the sum of the parts to 1e-9.
    """

    acquisition_s: float
    upload_s: float
    pickup_s: float
    inference_s: float
    publish_s: float
    total_s: float

    _STAGES = ("acquisition_s", "upload_s", "pickup_s", "inference_s", "publish_s")

    def __post_init__(self):
        for name in self._STAGES:
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be nonnegative")
        if abs(self.total_s - self.stage_sum()) > 1e-9:
            raise DomainError(
                f"total_s {self.total_s} != sum of stages {self.stage_sum()}"
            )

    def stage_sum(self) -> float:
        return (
            self.acquisition_s
            + self.upload_s
            + self.pickup_s
            + self.inference_s
            + self.publish_s
        )

    @classmethod
    def from_stages(
        cls,
        acquisition_s: float,
        upload_s: float,
        pickup_s: float,
        inference_s: float,
        publish_s: float,
    ) -> "StageTimings":
        return cls(
            acquisition_s=acquisition_s,
            upload_s=upload_s,
            pickup_s=pickup_s,
            inference_s=inference_s,
            publish_s=publish_s,
            total_s=acquisition_s + upload_s + pickup_s + inference_s + publish_s,
        )

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in self._STAGES + ("total_s",)}

    @classmethod
    def from_dict(cls, data: dict) -> "StageTimings":
        return cls(**{k: float(data[k]) for k in cls._STAGES + ("total_s",)})


MODEL_IDS = ("lvsd", "hcm", "structural")


@dataclass(frozen=True)
class PredictionResult:
    """One model's probability for one recording plus the timings behind it."""

    recording_id: str
    model_id: str
    probability: float
    threshold: float
    label: bool
    timings: StageTimings
    produced_at: datetime

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise DomainError("probability must lie in [0, 1]")
        if not 0.0 < self.threshold < 1.0:
            raise DomainError("threshold must lie in (0, 1)")
        if self.label != (self.probability >= self.threshold):
            raise DomainError("label must equal probability >= threshold")

    @classmethod
    def from_probability(
        cls,
        recording_id: str,
        model_id: str,
        probability: float,
        threshold: float,
        timings: StageTimings,
        produced_at: datetime,
    ) -> "PredictionResult":
        return cls(
            recording_id=recording_id,
            model_id=model_id,
            probability=probability,
            threshold=threshold,
            label=probability >= threshold,
            timings=timings,
            produced_at=produced_at,
        )


def sigmoid(x: float) -> float:
    """Logistic function 1/(1+e^-x), numerically stable on both tails.

    Saturates to exactly 0.0/1.0 only beyond the float64 exponent range
    (|x| > ~745); everywhere else the result is strictly inside (0, 1).
    """
    if not math.isfinite(x):
        raise DomainError(f"sigmoid requires finite input, got {x!r}")
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def content_hash(data: bytes) -> str:
    """SHA-256 hex digest; recording ids and blob names derive from this."""
    return hashlib.sha256(data).hexdigest()


def format_utc_ms(dt: datetime) -> str:
    """RFC 3339 UTC timestamp with millisecond precision, e.g. 2026-01-02T03:04:05.678Z."""
    if dt.tzinfo is None:
        raise DomainError("naive datetimes are not allowed")
    dt = dt.astimezone(timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%S.") + f"{dt.microsecond // 1000:03d}Z"


def truncate_ms(dt: datetime) -> datetime:
    """Drop sub-millisecond precision so timestamps survive serialization."""
    return dt.replace(microsecond=(dt.microsecond // 1000) * 1000)


def parse_utc(text: str) -> datetime:
    """Parse an RFC 3339 timestamp; accepts both 'Z' and numeric offsets."""
    normalized = text.strip()
    if normalized.endswith(("Z", "z")):
        normalized = normalized[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(normalized)
    except ValueError as exc:
        raise DomainError(f"bad timestamp {text!r}: {exc}") from exc
    if dt.tzinfo is None:
        raise DomainError(f"timestamp {text!r} has no timezone")
    return dt.astimezone(timezone.utc)
