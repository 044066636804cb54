"""Shared builders for tests: device payloads and direct lake ingestion."""

import json

import numpy as np

from ecgflow.core import format_utc_ms
from ecgflow.ingest import ingest_payload


def kardia_payload(seed=0, recorded_at=None, n=3000, rate=100) -> bytes:
    rng = np.random.default_rng(seed)
    t = np.arange(n) / rate
    uv = 600 * np.sin(2 * np.pi * 1.3 * t) + rng.normal(0, 40, size=n)
    record = {
        "device": "kardia",
        "rate": rate,
        "recordedAt": recorded_at or "2026-03-04T10:00:00.000Z",
        "samples_uV": [int(v) for v in uv],
    }
    return json.dumps(record).encode()


def watch_payload(seed=0, recorded_at=None, n=15000, rate=500) -> bytes:
    rng = np.random.default_rng(seed)
    t = np.arange(n) / rate
    uv = 550 * np.sin(2 * np.pi * 1.1 * t) + rng.normal(0, 35, size=n)
    body = " ".join(str(int(v)) for v in uv)
    stamp = recorded_at or "2026-03-04T10:00:00.000Z"
    return (
        f'<ecgExport rateHz="{rate}" recordedAt="{stamp}" lead="I">'
        f"<samples>{body}</samples></ecgExport>"
    ).encode()


def flat_kardia_payload(recorded_at=None, n=3000) -> bytes:
    record = {
        "device": "kardia",
        "rate": 100,
        "recordedAt": recorded_at or "2026-03-04T10:00:00.000Z",
        "samples_uV": [0] * n,
    }
    return json.dumps(record).encode()


def ingest(lake, payload, clock, external_id="MRN-test", upload_s=None):
    """Direct-to-lake ingest stamping received_at from the given clock."""
    return ingest_payload(
        lake,
        payload,
        external_id=external_id,
        source_uri="test:direct",
        clock=clock,
        upload_s=upload_s,
    )
