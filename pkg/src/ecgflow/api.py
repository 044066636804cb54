"""HTTP front door: ingest uploads, expose recordings, results, timelines,
and health for the dashboard and harness.

All handlers are stateless over the shared lake; writes go through the
lake's writer gate. External identifiers travel only in the ingest request
header and never appear in any response. Live updates are client polling:
results become visible exactly when they are durable in the lake.
"""

import logging

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ecgflow.adapters import AdapterError, detect_format
from ecgflow.clock import WallClock
from ecgflow.core import DeviceKind, DomainError, EcgRecording, StudyId, format_utc_ms
from ecgflow.ingest import ingest_payload
from ecgflow.lake import DataLake, LakeNotFound
from ecgflow.adapters import FITBIT_DEFAULT_RATES

logger = logging.getLogger(__name__)

MAX_BODY_BYTES = 8 * 1024 * 1024
IMMUTABLE_CACHE = "public, max-age=31536000, immutable"


def _error(status: int, code: str, detail: str = "") -> JSONResponse:
    body = {"error": code}
    if detail:
        body["detail"] = detail
    return JSONResponse(body, status_code=status)


def _entry_json(lake: DataLake, entry) -> dict:
    return {
        "index_seq": entry.index_seq,
        "recording_id": entry.recording_id,
        "device": entry.device.value,
        "study_id": entry.study_id.value,
        "received_at": format_utc_ms(entry.received_at),
        "status": lake.status_of(entry.recording_id),
    }


def _detail_json(lake: DataLake, entry, recording: EcgRecording) -> dict:
    base = _entry_json(lake, entry)
    base.update(
        {
            "recorded_at": format_utc_ms(recording.recorded_at),
            "sample_rate_hz": recording.sample_rate_hz,
            "lead": recording.lead,
            "duration_seconds": recording.duration_seconds,
            "n_samples": int(len(recording.samples)),
        }
    )
    return base


def _model_rows(lake: DataLake, recording_id: str) -> tuple[str, str | None, list[dict]]:
    """(status, rejection reason, model result rows) for a recording."""
    rows = lake.get_results(recording_id)
    status = lake.status_of(recording_id)
    reason = None
    models = []
    for row in rows:
        if row["type"] == "prediction":
            models.append(
                {
                    "model_id": row["model_id"],
                    "probability": row["probability"],
                    "label": row["label"],
                    "threshold": row["threshold"],
                    "timings": row["timings"],
                    "produced_at": row["produced_at"],
                }
            )
        elif row["type"] == "model_error":
            models.append(
                {
                    "model_id": row["model_id"],
                    "error": row["error"],
                    "detail": row.get("detail", ""),
                    "produced_at": row["produced_at"],
                }
            )
        elif row["type"] == "rejected":
            reason = row["reason"]
        elif row["type"] == "failed":
            reason = row.get("detail", "processing failed")
    return status, reason, models


def create_app(
    lake: DataLake,
    pipeline=None,
    clock=None,
    fitbit_rates: tuple[int, ...] = FITBIT_DEFAULT_RATES,
    max_body_bytes: int = MAX_BODY_BYTES,
) -> FastAPI:
    clock = clock if clock is not None else WallClock()
    app = FastAPI(title="ecgflow", docs_url=None, redoc_url=None)

    @app.post("/v1/recordings")
    async def post_recording(request: Request):
        declared = request.headers.get("content-length")
        if declared and int(declared) > max_body_bytes:
            return _error(413, "PayloadTooLarge", f"body exceeds {max_body_bytes} bytes")
        body = await request.body()
        if len(body) > max_body_bytes:
            return _error(413, "PayloadTooLarge", f"body exceeds {max_body_bytes} bytes")
        if not body:
            return _error(422, "EmptyBody", "request body is empty")
        external_id = request.headers.get("x-external-id")
        if not external_id:
            return _error(422, "MissingHeader", "X-External-Id header is required")
        device_header = request.headers.get("x-device-kind")
        if not device_header:
            return _error(422, "MissingHeader", "X-Device-Kind header is required")
        try:
            declared_kind = DeviceKind.parse(device_header)
        except DomainError as exc:
            return _error(422, "BadRequest", str(exc))
        try:
            detected = detect_format(body)
            if detected is not declared_kind:
                return _error(
                    422,
                    "DeviceMismatch",
                    f"payload is {detected.value}, header says {declared_kind.value}",
                )
            outcome = ingest_payload(
                lake,
                body,
                external_id=external_id,
                source_uri="api:/v1/recordings",
                clock=clock,
                fitbit_rates=fitbit_rates,
            )
        except AdapterError as exc:
            return _error(422, exc.code, str(exc))
        body_json = {
            "recording_id": outcome.entry.recording_id,
            "study_id": outcome.entry.study_id.value,
            "duplicate": outcome.duplicate,
        }
        return JSONResponse(body_json, status_code=200 if outcome.duplicate else 201)

    @app.get("/v1/recordings")
    def list_recordings(since: int = 0, device: str | None = None):
        if since < 0:
            return _error(422, "BadRequest", "since must be >= 0")
        device_filter = None
        if device is not None:
            try:
                device_filter = DeviceKind.parse(device)
            except DomainError as exc:
                return _error(422, "BadRequest", str(exc))
        entries = lake.list_since(since)
        if device_filter is not None:
            entries = [e for e in entries if e.device is device_filter]
        return {"entries": [_entry_json(lake, e) for e in entries]}

    @app.get("/v1/recordings/{recording_id}")
    def recording_detail(recording_id: str):
        try:
            entry = lake.get_entry(recording_id)
            recording, _ = lake.load_recording(recording_id)
        except LakeNotFound:
            return _error(404, "NotFound", f"recording {recording_id} not found")
        return JSONResponse(
            _detail_json(lake, entry, recording),
            headers={"Cache-Control": IMMUTABLE_CACHE},
        )

    @app.get("/v1/recordings/{recording_id}/waveform")
    def waveform(recording_id: str):
        try:
            entry = lake.get_entry(recording_id)
            recording, _ = lake.load_recording(recording_id)
        except LakeNotFound:
            return _error(404, "NotFound", f"recording {recording_id} not found")
        return JSONResponse(
            {
                "recording_id": recording_id,
                "device": entry.device.value,
                "sample_rate_hz": recording.sample_rate_hz,
                "unit": "mV",
                "samples": recording.samples.tolist(),
            },
            headers={"Cache-Control": IMMUTABLE_CACHE},
        )

    @app.get("/v1/results/{recording_id}")
    def results(recording_id: str):
        try:
            status, reason, models = _model_rows(lake, recording_id)
        except LakeNotFound:
            return _error(404, "NotFound", f"recording {recording_id} not found")
        body = {"recording_id": recording_id, "status": status, "models": models}
        if reason is not None:
            body["reason"] = reason
        return body

    @app.get("/v1/studies/{study_id}/timeline")
    def timeline(study_id: str):
        try:
            study = StudyId(study_id)
        except DomainError:
            return _error(404, "NotFound", f"study {study_id} not found")
        if not lake.is_known_study(study):
            return _error(404, "NotFound", f"study {study_id} not found")
        items = []
        for entry in lake.entries_for_study(study):
            recording, _ = lake.load_recording(entry.recording_id)
            status, _, models = _model_rows(lake, entry.recording_id)
            items.append(
                {
                    "recording": _detail_json(lake, entry, recording),
                    "status": status,
                    "models": models,
                    "_recorded_at": recording.recorded_at,
                }
            )
        items.sort(key=lambda item: item.pop("_recorded_at"))
        return {"study_id": study_id, "items": items}

    @app.get("/v1/health")
    def health():
        try:
            entries = lake.max_seq
            reachable = True
        except Exception:  # pragma: no cover - lake gone mid-flight
            entries, reachable = 0, False
        alive = False
        last_tick_at = None
        last_tick_age_s = None
        if pipeline is not None and pipeline.last_tick_at is not None:
            last_tick_at = format_utc_ms(pipeline.last_tick_at)
            last_tick_age_s = max(
                0.0, (clock.now_utc() - pipeline.last_tick_at).total_seconds()
            )
            alive = last_tick_age_s <= 2 * pipeline.config.poll_interval_s
        status = "ok" if reachable and (pipeline is None or alive) else "degraded"
        return {
            "status": status,
            "lake": {"reachable": reachable, "entries": entries},
            "poller": {
                "alive": alive,
                "last_tick_at": last_tick_at,
                "last_tick_age_s": last_tick_age_s,
            },
        }

    return app
