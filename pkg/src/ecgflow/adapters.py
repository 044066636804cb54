"""Parsers for the three device wire/file formats.

Wire formats (fixed; the simulators are the reference writers):

* Watch export: UTF-8 XML, root ``ecgExport`` with attributes ``rateHz``,
  ``recordedAt`` (RFC 3339), ``lead``, and a ``samples`` child holding
  whitespace-separated integer microvolts. File extension ``.ecg.xml``.
* Kardia / Fitbit: one UTF-8 JSON object per record with fields ``device``,
  ``rate``, ``recordedAt``, ``samples_uV``; the ``device`` value is the
  format signature.

Device-native unit is microvolts; recordings are canonicalized to millivolts.
All parsers are pure functions and safe for unlimited concurrent calls.
"""

import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from datetime import datetime

import numpy as np

from ecgflow.core import (
    ACQUISITION_SECONDS,
    DURATION_TOLERANCE_S,
    DeviceKind,
    DomainError,
    EcgRecording,
    EcgflowError,
    StudyId,
    content_hash,
    parse_utc,
)

UV_PER_MV = 1000.0
FITBIT_DEFAULT_RATES = (250,)

JSON_RECORD_FIELDS = {"device", "rate", "recordedAt", "samples_uV"}


class AdapterError(EcgflowError):
    code = "AdapterError"


class FormatUnknown(AdapterError):
    code = "FormatUnknown"


class ParseError(AdapterError):
    code = "ParseError"


class RateMismatch(AdapterError):
    code = "RateMismatch"


class DurationOutOfRange(AdapterError):
    code = "DurationOutOfRange"


@dataclass(frozen=True)
class RawDeviceRecord:
    """A payload as fetched from a device source, before parsing."""

    device: DeviceKind
    payload: bytes
    source_uri: str
    fetched_at: datetime

    def __post_init__(self):
        if not self.payload:
            raise DomainError("raw device record has empty payload")


def detect_format(data: bytes) -> DeviceKind:
    """Classify a payload by structural signature; never guesses.

    Watch exports are recognized by the ``ecgExport`` XML root; Kardia and
    Fitbit records by the JSON field set plus the ``device`` value.
    """
    if not data:
        raise FormatUnknown("empty payload")
    try:
        text = data.decode("utf-8").lstrip("﻿ \t\r\n")
    except UnicodeDecodeError:
        raise FormatUnknown("payload is not UTF-8 text")
    if text.startswith("<"):
        try:
            root = ET.fromstring(text)
        except ET.ParseError:
            raise FormatUnknown("payload is not well-formed XML")
        if root.tag == "ecgExport":
            return DeviceKind.APPLE_WATCH
        raise FormatUnknown(f"unrecognized XML root element {root.tag!r}")
    if text.startswith("{"):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError:
            raise FormatUnknown("payload is not well-formed JSON")
        if isinstance(obj, dict) and JSON_RECORD_FIELDS.issubset(obj.keys()):
            device = obj.get("device")
            if device == "kardia":
                return DeviceKind.KARDIA
            if device == "fitbit":
                return DeviceKind.FITBIT
        raise FormatUnknown("JSON object does not match any device record shape")
    raise FormatUnknown("no structural signature matched")


def _check_duration(n_samples: int, rate_hz: int) -> None:
    duration = n_samples / rate_hz
    if abs(duration - ACQUISITION_SECONDS) > DURATION_TOLERANCE_S:
        raise DurationOutOfRange(
            f"duration {duration:.3f} s outside "
            f"{ACQUISITION_SECONDS} +- {DURATION_TOLERANCE_S} s"
        )


def _samples_uv_to_mv(values_uv: list) -> np.ndarray:
    return np.asarray(values_uv, dtype=np.float64) / UV_PER_MV


def parse_apple_watch_export(
    data: bytes, *, study_id: StudyId, received_at: datetime
) -> EcgRecording:
    """Parse a watch XML export into a canonical recording (500 Hz contract)."""
    try:
        text = data.decode("utf-8")
        root = ET.fromstring(text)
    except (UnicodeDecodeError, ET.ParseError) as exc:
        raise ParseError(f"malformed watch export: {exc}") from exc
    if root.tag != "ecgExport":
        raise ParseError(f"unexpected root element {root.tag!r}")

    rate_text = root.get("rateHz")
    if rate_text is None:
        raise ParseError("missing rateHz attribute")
    try:
        rate = int(rate_text)
    except ValueError as exc:
        raise ParseError(f"bad rateHz {rate_text!r}") from exc
    if rate != DeviceKind.APPLE_WATCH.contract_rate_hz:
        raise RateMismatch(f"watch exports must be 500 Hz, got {rate}")

    recorded_text = root.get("recordedAt")
    if recorded_text is None:
        raise ParseError("missing recordedAt attribute")
    try:
        recorded_at = parse_utc(recorded_text)
    except DomainError as exc:
        raise ParseError(str(exc)) from exc

    lead = root.get("lead", "I")
    samples_el = root.find("samples")
    if samples_el is None or samples_el.text is None:
        raise ParseError("missing samples element")
    try:
        values_uv = [int(tok) for tok in samples_el.text.split()]
    except ValueError as exc:
        raise ParseError(f"non-integer sample entry: {exc}") from exc
    if not values_uv:
        raise ParseError("samples element is empty")
    _check_duration(len(values_uv), rate)

    return EcgRecording(
        recording_id=content_hash(data),
        device=DeviceKind.APPLE_WATCH,
        study_id=study_id,
        sample_rate_hz=rate,
        samples=_samples_uv_to_mv(values_uv),
        recorded_at=recorded_at,
        received_at=received_at,
        lead=lead,
    )


def _parse_json_record(
    data: bytes,
    expected_device: DeviceKind,
) -> tuple[dict, int, datetime, np.ndarray]:
    try:
        obj = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"malformed record: {exc}") from exc
    if not isinstance(obj, dict):
        raise ParseError("record is not a JSON object")
    missing = JSON_RECORD_FIELDS - obj.keys()
    if missing:
        raise ParseError(f"record missing fields {sorted(missing)}")
    if obj["device"] != expected_device.value:
        raise ParseError(
            f"device field {obj['device']!r} does not match {expected_device.value!r}"
        )

    rate = obj["rate"]
    if isinstance(rate, bool) or not isinstance(rate, int) or rate <= 0:
        raise ParseError(f"bad rate {rate!r}")

    try:
        recorded_at = parse_utc(obj["recordedAt"])
    except (DomainError, TypeError, AttributeError) as exc:
        raise ParseError(f"bad recordedAt: {exc}") from exc

    raw_samples = obj["samples_uV"]
    if not isinstance(raw_samples, list) or not raw_samples:
        raise ParseError("samples_uV must be a non-empty array")
    for v in raw_samples:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ParseError(f"non-numeric sample entry {v!r}")
    return obj, rate, recorded_at, _samples_uv_to_mv(raw_samples)


def parse_kardia_record(
    data: bytes, *, study_id: StudyId, received_at: datetime
) -> EcgRecording:
    """Parse a Kardia record into a canonical recording (100 Hz contract)."""
    _, rate, recorded_at, samples_mv = _parse_json_record(data, DeviceKind.KARDIA)
    if rate != DeviceKind.KARDIA.contract_rate_hz:
        raise RateMismatch(f"kardia records must be 100 Hz, got {rate}")
    _check_duration(len(samples_mv), rate)
    return EcgRecording(
        recording_id=content_hash(data),
        device=DeviceKind.KARDIA,
        study_id=study_id,
        sample_rate_hz=rate,
        samples=samples_mv,
        recorded_at=recorded_at,
        received_at=received_at,
    )


def parse_fitbit_record(
    data: bytes,
    *,
    study_id: StudyId,
    received_at: datetime,
    allowed_rates: tuple[int, ...] = FITBIT_DEFAULT_RATES,
) -> EcgRecording:
    """Parse a Fitbit record; the rate comes from the record but must be
    one of the configured allowed rates (default: 250 Hz only)."""
    _, rate, recorded_at, samples_mv = _parse_json_record(data, DeviceKind.FITBIT)
    if rate not in allowed_rates:
        raise RateMismatch(f"fitbit rate {rate} not in allowed set {sorted(allowed_rates)}")
    _check_duration(len(samples_mv), rate)
    return EcgRecording(
        recording_id=content_hash(data),
        device=DeviceKind.FITBIT,
        study_id=study_id,
        sample_rate_hz=rate,
        samples=samples_mv,
        recorded_at=recorded_at,
        received_at=received_at,
    )


PARSERS = {
    DeviceKind.APPLE_WATCH: parse_apple_watch_export,
    DeviceKind.KARDIA: parse_kardia_record,
    DeviceKind.FITBIT: parse_fitbit_record,
}


def parse_payload(
    data: bytes, *, study_id: StudyId, received_at: datetime
) -> EcgRecording:
    """Detect the format and dispatch to the matching parser."""
    kind = detect_format(data)
    return PARSERS[kind](data, study_id=study_id, received_at=received_at)
