"""Published JSON Schemas for every API response body.

These are part of the wire contract: the conformance suite validates every
2xx fixture response against them.
"""

RFC3339_MS = {"type": "string", "pattern": r"^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}\.\d{3}Z$"}
HEX_ID = {"type": "string", "pattern": r"^[0-9a-f]{64}$"}
STUDY = {"type": "string", "pattern": r"^[0-9a-f]{16}$"}
DEVICE = {"type": "string", "enum": ["apple_watch", "kardia", "fitbit"]}
STATUS = {"type": "string", "enum": ["pending", "done", "rejected", "failed"]}

TIMINGS = {
    "type": "object",
    "properties": {
        "acquisition_s": {"type": "number", "minimum": 0},
        "upload_s": {"type": "number", "minimum": 0},
        "pickup_s": {"type": "number", "minimum": 0},
        "inference_s": {"type": "number", "minimum": 0},
        "publish_s": {"type": "number", "minimum": 0},
        "total_s": {"type": "number", "minimum": 0},
    },
    "required": ["acquisition_s", "upload_s", "pickup_s", "inference_s", "publish_s", "total_s"],
    "additionalProperties": False,
}

MODEL_RESULT = {
    "oneOf": [
        {
            "type": "object",
            "properties": {
                "model_id": {"type": "string"},
                "probability": {"type": "number", "minimum": 0, "maximum": 1},
                "label": {"type": "boolean"},
                "threshold": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "timings": TIMINGS,
                "produced_at": RFC3339_MS,
            },
            "required": ["model_id", "probability", "label", "threshold", "timings", "produced_at"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "model_id": {"type": "string"},
                "error": {"type": "string"},
                "detail": {"type": "string"},
                "produced_at": RFC3339_MS,
            },
            "required": ["model_id", "error", "produced_at"],
            "additionalProperties": False,
        },
    ]
}

RECORDING_ENTRY = {
    "type": "object",
    "properties": {
        "index_seq": {"type": "integer", "minimum": 1},
        "recording_id": HEX_ID,
        "device": DEVICE,
        "study_id": STUDY,
        "received_at": RFC3339_MS,
        "status": STATUS,
    },
    "required": ["index_seq", "recording_id", "device", "study_id", "received_at", "status"],
    "additionalProperties": False,
}

RECORDING_DETAIL = {
    "type": "object",
    "properties": {
        **RECORDING_ENTRY["properties"],
        "recorded_at": RFC3339_MS,
        "sample_rate_hz": {"type": "integer", "minimum": 1},
        "lead": {"type": "string"},
        "duration_seconds": {"type": "number", "minimum": 0},
        "n_samples": {"type": "integer", "minimum": 1},
    },
    "required": RECORDING_ENTRY["required"]
    + ["recorded_at", "sample_rate_hz", "lead", "duration_seconds", "n_samples"],
    "additionalProperties": False,
}

INGEST_RESPONSE = {
    "type": "object",
    "properties": {
        "recording_id": HEX_ID,
        "study_id": STUDY,
        "duplicate": {"type": "boolean"},
    },
    "required": ["recording_id", "study_id", "duplicate"],
    "additionalProperties": False,
}

RECORDING_LIST = {
    "type": "object",
    "properties": {"entries": {"type": "array", "items": RECORDING_ENTRY}},
    "required": ["entries"],
    "additionalProperties": False,
}

WAVEFORM = {
    "type": "object",
    "properties": {
        "recording_id": HEX_ID,
        "device": DEVICE,
        "sample_rate_hz": {"type": "integer", "minimum": 1},
        "unit": {"type": "string", "enum": ["mV"]},
        "samples": {"type": "array", "items": {"type": "number"}, "minItems": 1},
    },
    "required": ["recording_id", "device", "sample_rate_hz", "unit", "samples"],
    "additionalProperties": False,
}

RESULTS_RESPONSE = {
    "type": "object",
    "properties": {
        "recording_id": HEX_ID,
        "status": STATUS,
        "reason": {"type": ["string", "null"]},
        "models": {"type": "array", "items": MODEL_RESULT},
    },
    "required": ["recording_id", "status", "models"],
    "additionalProperties": False,
}

TIMELINE = {
    "type": "object",
    "properties": {
        "study_id": STUDY,
        "items": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "recording": RECORDING_DETAIL,
                    "status": STATUS,
                    "models": {"type": "array", "items": MODEL_RESULT},
                },
                "required": ["recording", "status", "models"],
                "additionalProperties": False,
            },
        },
    },
    "required": ["study_id", "items"],
    "additionalProperties": False,
}

HEALTH = {
    "type": "object",
    "properties": {
        "status": {"type": "string", "enum": ["ok", "degraded"]},
        "lake": {
            "type": "object",
            "properties": {
                "reachable": {"type": "boolean"},
                "entries": {"type": "integer", "minimum": 0},
            },
            "required": ["reachable", "entries"],
            "additionalProperties": False,
        },
        "poller": {
            "type": "object",
            "properties": {
                "alive": {"type": "boolean"},
                "last_tick_at": {"anyOf": [RFC3339_MS, {"type": "null"}]},
                "last_tick_age_s": {"type": ["number", "null"]},
            },
            "required": ["alive", "last_tick_at", "last_tick_age_s"],
            "additionalProperties": False,
        },
    },
    "required": ["status", "lake", "poller"],
    "additionalProperties": False,
}

ERROR_RESPONSE = {
    "type": "object",
    "properties": {"error": {"type": "string"}, "detail": {"type": "string"}},
    "required": ["error"],
    "additionalProperties": False,
}

RESPONSE_SCHEMAS = {
    "ingest": INGEST_RESPONSE,
    "recording_list": RECORDING_LIST,
    "recording_detail": RECORDING_DETAIL,
    "waveform": WAVEFORM,
    "results": RESULTS_RESPONSE,
    "timeline": TIMELINE,
    "health": HEALTH,
    "error": ERROR_RESPONSE,
}
