"""Device formats: synthesize one recording per vendor, render the wire
payload, auto-detect the format, and parse it back to canonical millivolts.

Run: python demos/01_device_formats.py
"""

from datetime import datetime, timezone

from ecgflow.adapters import detect_format, parse_payload
from ecgflow.core import DeviceKind, StudyId
from ecgflow.simulators import SyntheticEcgSpec, render_json_record, render_watch_export

RECORDED_AT = datetime(2026, 3, 4, 10, 0, tzinfo=timezone.utc)
STUDY = StudyId("ab" * 8)

spec = SyntheticEcgSpec(seed=42)
payloads = {
    DeviceKind.APPLE_WATCH: render_watch_export(spec.for_device(DeviceKind.APPLE_WATCH), RECORDED_AT),
    DeviceKind.KARDIA: render_json_record(DeviceKind.KARDIA, spec.for_device(DeviceKind.KARDIA), RECORDED_AT),
    DeviceKind.FITBIT: render_json_record(DeviceKind.FITBIT, spec.for_device(DeviceKind.FITBIT), RECORDED_AT),
}

for device, payload in payloads.items():
    detected = detect_format(payload)
    assert detected is device
    rec = parse_payload(payload, study_id=STUDY, received_at=RECORDED_AT)
    print(f"{device.value:12s} payload {len(payload):7d} B -> "
          f"{len(rec.samples)} samples @ {rec.sample_rate_hz} Hz "
          f"({rec.duration_seconds:.1f} s), lead {rec.lead}, "
          f"range [{rec.samples.min():+.3f}, {rec.samples.max():+.3f}] mV")
    print(f"{'':12s} recording_id {rec.recording_id[:16]}... (content hash = dedupe key)")

print("\nhead of the watch XML export:")
print(payloads[DeviceKind.APPLE_WATCH][:120].decode() + "...")

print("\nunknown payloads are quarantined, never stored:")
try:
    detect_format(b"\x00\x01\x02 not an ECG")
except Exception as exc:
    print(f"  detect_format -> {type(exc).__name__}: {exc}")
