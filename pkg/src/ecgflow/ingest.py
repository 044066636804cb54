"""Shared ingest path: detect, pseudonymize, parse, store.

Used by the HTTP upload route, the feed collectors, and the bench harness
so every entry lands in the lake with identical semantics. The measured
upload duration covers detection through canonicalization (the final index
append's own syscall is excluded, since its cost is stamped inside the row
being written); bench mode can inject a fixed upload duration instead.
"""

import time
from dataclasses import dataclass

from ecgflow.adapters import (
    FITBIT_DEFAULT_RATES,
    RawDeviceRecord,
    detect_format,
    parse_apple_watch_export,
    parse_fitbit_record,
    parse_kardia_record,
)
from ecgflow.core import DeviceKind, EcgRecording, truncate_ms
from ecgflow.lake import AlreadyExists, DataLake, LakeEntry


@dataclass(frozen=True)
class IngestOutcome:
    entry: LakeEntry
    recording: EcgRecording | None
    duplicate: bool


def ingest_payload(
    lake: DataLake,
    payload: bytes,
    *,
    external_id: str,
    source_uri: str,
    clock,
    upload_s: float | None = None,
    fitbit_rates: tuple[int, ...] = FITBIT_DEFAULT_RATES,
) -> IngestOutcome:
    """Parse a device payload and store it; duplicates return the existing entry.

    Raises adapter errors (FormatUnknown/ParseError/RateMismatch/
    DurationOutOfRange) unstored, so bad payloads never reach the index.
    """
    started = time.perf_counter()
    kind = detect_format(payload)
    study_id = lake.register_study(external_id)
    received_at = truncate_ms(clock.now_utc())
    if kind is DeviceKind.APPLE_WATCH:
        recording = parse_apple_watch_export(
            payload, study_id=study_id, received_at=received_at
        )
    elif kind is DeviceKind.KARDIA:
        recording = parse_kardia_record(payload, study_id=study_id, received_at=received_at)
    else:
        recording = parse_fitbit_record(
            payload,
            study_id=study_id,
            received_at=received_at,
            allowed_rates=fitbit_rates,
        )
    raw = RawDeviceRecord(
        device=kind, payload=payload, source_uri=source_uri, fetched_at=received_at
    )
    measured_upload = time.perf_counter() - started
    try:
        entry = lake.put_recording(
            raw, recording, upload_s=upload_s if upload_s is not None else measured_upload
        )
    except AlreadyExists as exc:
        return IngestOutcome(entry=exc.entry, recording=recording, duplicate=True)
    return IngestOutcome(entry=entry, recording=recording, duplicate=False)
