"""Local stand-ins for the three vendor ecosystems.

Synthetic recordings are seeded sine-plus-harmonic traces with baseline
wander and noise so the preprocessing stages have realistic work; no
physiological fidelity is claimed. Everything is deterministic given a
seed and schedule: goldens regenerate bit-exact.

The Kardia- and Fitbit-like feeds serve ``GET /records?since=<cursor>``
returning records emitted at or before "now"; the watch path emits XML
export files or POSTs them to the ingest route.
"""

import json
from dataclasses import dataclass, replace
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

import httpx
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ecgflow.clock import SIM_EPOCH
from ecgflow.core import DeviceKind, DomainError, content_hash, format_utc_ms

DEFAULT_RATES = {DeviceKind.APPLE_WATCH: 500, DeviceKind.KARDIA: 100, DeviceKind.FITBIT: 250}


@dataclass(frozen=True)
class SyntheticEcgSpec:
    seed: int
    rate_hz: int = 100
    duration_s: float = 30.0
    amplitude_uv: float = 600.0
    heart_rate_bpm: float = 75.0
    wander_uv: float = 80.0
    noise_uv: float = 25.0
    flat: bool = False

    def for_device(self, device: DeviceKind) -> "SyntheticEcgSpec":
        return replace(self, rate_hz=DEFAULT_RATES[device])


def synthesize_ecg_uv(spec: SyntheticEcgSpec) -> np.ndarray:
    """Integer-microvolt trace: fundamental + harmonic + wander + noise."""
    n = int(round(spec.rate_hz * spec.duration_s))
    if spec.flat:
        return np.zeros(n, dtype=np.int64)
    rng = np.random.default_rng(spec.seed)
    t = np.arange(n) / spec.rate_hz
    f0 = spec.heart_rate_bpm / 60.0
    phase = rng.uniform(0, 2 * np.pi, size=3)
    signal = spec.amplitude_uv * np.sin(2 * np.pi * f0 * t + phase[0])
    signal += 0.35 * spec.amplitude_uv * np.sin(2 * np.pi * 2 * f0 * t + phase[1])
    signal += spec.wander_uv * np.sin(2 * np.pi * 0.15 * t + phase[2])
    signal += rng.normal(0.0, spec.noise_uv, size=n)
    return np.rint(signal).astype(np.int64)


def _canonical_record_bytes(record: dict) -> bytes:
    return json.dumps(record, sort_keys=True, separators=(",", ":")).encode("utf-8")


def render_json_record(device: DeviceKind, spec: SyntheticEcgSpec, recorded_at: datetime) -> bytes:
    if device not in (DeviceKind.KARDIA, DeviceKind.FITBIT):
        raise DomainError(f"{device.value} does not use the JSON record shape")
    samples = synthesize_ecg_uv(spec)
    record = {
        "device": device.value,
        "rate": spec.rate_hz,
        "recordedAt": format_utc_ms(recorded_at),
        "samples_uV": [int(v) for v in samples],
    }
    return _canonical_record_bytes(record)


def render_watch_export(spec: SyntheticEcgSpec, recorded_at: datetime) -> bytes:
    samples = synthesize_ecg_uv(spec)
    body = " ".join(str(int(v)) for v in samples)
    return (
        f'<ecgExport rateHz="{spec.rate_hz}" recordedAt="{format_utc_ms(recorded_at)}" '
        f'lead="I"><samples>{body}</samples></ecgExport>'
    ).encode("utf-8")


@dataclass(frozen=True)
class ScheduledRecord:
    emit_at_s: float
    spec: SyntheticEcgSpec


class ScheduledFeed:
    """In-process vendor feed: records become queryable once the clock
    passes their emit time. recorded_at = epoch + emit time - duration, so
    payload bytes depend only on seed + schedule."""

    def __init__(self, device: DeviceKind, schedule, clock, epoch: datetime = SIM_EPOCH):
        self.device = device
        self.clock = clock
        self.epoch = epoch
        self._started_s = clock.now_s()
        ordered = sorted(schedule, key=lambda r: r.emit_at_s)
        self._records = []
        for item in ordered:
            spec = item.spec.for_device(device)
            recorded_at = epoch + timedelta(seconds=item.emit_at_s - spec.duration_s)
            if device is DeviceKind.APPLE_WATCH:
                payload = render_watch_export(spec, recorded_at)
            else:
                payload = render_json_record(device, spec, recorded_at)
            self._records.append((item.emit_at_s, payload))

    def _now_rel_s(self) -> float:
        return self.clock.now_s() - self._started_s

    def available(self) -> list[bytes]:
        now = self._now_rel_s()
        return [payload for emit_at, payload in self._records if emit_at <= now]

    def fetch_since(self, cursor: int) -> tuple[list[bytes], int]:
        if cursor < 0:
            raise DomainError("cursor must be >= 0")
        ready = self.available()
        return ready[cursor:], len(ready)


def make_feed_app(feed: ScheduledFeed) -> FastAPI:
    """HTTP face of a feed; payload bytes survive the trip unchanged."""
    app = FastAPI(title=f"{feed.device.value}-sim", docs_url=None, redoc_url=None)

    @app.get("/records")
    def records(request: Request):
        raw_cursor = request.query_params.get("since", "0")
        try:
            cursor = int(raw_cursor)
            if cursor < 0:
                raise ValueError
        except ValueError:
            return JSONResponse(
                {"error": "BadRequest", "detail": f"bad cursor {raw_cursor!r}"},
                status_code=400,
            )
        payloads, new_cursor = feed.fetch_since(cursor)
        return {
            "cursor": new_cursor,
            "records": [json.loads(p) for p in payloads],
        }

    return app


class HttpFeedClient:
    """Feed client over HTTP; re-canonicalizes records to the exact bytes
    the simulator rendered (both sides share the canonical encoder)."""

    def __init__(self, base_url: str, client: httpx.Client | None = None):
        self.base_url = base_url.rstrip("/")
        self.client = client or httpx.Client(timeout=10.0)

    def fetch_since(self, cursor: int) -> tuple[list[bytes], int]:
        resp = self.client.get(f"{self.base_url}/records", params={"since": cursor})
        resp.raise_for_status()
        body = resp.json()
        return [_canonical_record_bytes(r) for r in body["records"]], int(body["cursor"])


def emit_watch_export(
    spec: SyntheticEcgSpec,
    recorded_at: datetime,
    out_dir: Path | None = None,
    post_url: str | None = None,
    external_id: str = "watch-owner-1",
    client: httpx.Client | None = None,
):
    """Produce one schema-valid watch export: write it into an inbox
    directory and/or POST it to the ingest route."""
    spec = spec.for_device(DeviceKind.APPLE_WATCH)
    payload = render_watch_export(spec, recorded_at)
    written = None
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        written = out_dir / f"watch-{spec.seed}-{content_hash(payload)[:8]}.ecg.xml"
        written.write_bytes(payload)
    response = None
    if post_url is not None:
        http = client or httpx.Client(timeout=10.0)
        response = http.post(
            post_url,
            content=payload,
            headers={
                "X-Device-Kind": DeviceKind.APPLE_WATCH.value,
                "X-External-Id": external_id,
                "Content-Type": "application/xml",
            },
        )
    return payload, written, response
