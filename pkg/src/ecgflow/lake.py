"""Content-addressed local data lake with an append-only metadata index.

Layout under the lake root (stable on-disk format, golden-tested):

    blobs/<id[:2]>/<id>          raw payload bytes, named by content hash
    canonical/<id[:2]>/<id>.json canonical recording + ingest metadata
    results/<id[:2]>/<id>.jsonl  append-only result rows per recording
    index.jsonl                  one JSON object per line: index_seq,
                                 recording_id, device, study_id,
                                 received_at, blob_path
    registry/secret.key          instance-local pseudonym key
    registry/studies.jsonl       external id -> study id map (the only
                                 place external identifiers may appear)

Blobs are written temp-then-rename; index appends serialize through a
single writer lock and fsync, so a crash between blob write and index
append leaves an invisible orphan blob and a re-put succeeds.
"""

import hmac
import hashlib
import json
import os
import secrets
import threading
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

import numpy as np

from ecgflow.adapters import RawDeviceRecord
from ecgflow.core import (
    BadRequest,
    DeviceKind,
    DomainError,
    EcgRecording,
    EcgflowError,
    PredictionResult,
    StageTimings,
    StudyId,
    STUDY_ID_HEX_LEN,
    format_utc_ms,
    parse_utc,
)


class LakeError(EcgflowError):
    code = "LakeError"


class AlreadyExists(LakeError):
    code = "AlreadyExists"

    def __init__(self, entry: "LakeEntry"):
        super().__init__(f"recording {entry.recording_id} already indexed")
        self.entry = entry


class LakeIoError(LakeError):
    code = "IoError"


class LakeNotFound(LakeError):
    code = "NotFound"


def blob_relpath(recording_id: str) -> str:
    return f"blobs/{recording_id[:2]}/{recording_id}"


def _canonical_relpath(recording_id: str) -> str:
    return f"canonical/{recording_id[:2]}/{recording_id}.json"


def _results_relpath(recording_id: str) -> str:
    return f"results/{recording_id[:2]}/{recording_id}.jsonl"


@dataclass(frozen=True)
class LakeEntry:
    index_seq: int
    recording_id: str
    device: DeviceKind
    study_id: StudyId
    received_at: datetime
    blob_path: str

    def to_row(self) -> dict:
        return {
            "index_seq": self.index_seq,
            "recording_id": self.recording_id,
            "device": self.device.value,
            "study_id": self.study_id.value,
            "received_at": format_utc_ms(self.received_at),
            "blob_path": self.blob_path,
        }

    @classmethod
    def from_row(cls, row: dict) -> "LakeEntry":
        return cls(
            index_seq=int(row["index_seq"]),
            recording_id=row["recording_id"],
            device=DeviceKind(row["device"]),
            study_id=StudyId(row["study_id"]),
            received_at=parse_utc(row["received_at"]),
            blob_path=row["blob_path"],
        )


def _atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.tmp-{os.getpid()}-{secrets.token_hex(4)}")
    try:
        tmp.write_bytes(data)
        os.replace(tmp, path)
    except OSError as exc:
        tmp.unlink(missing_ok=True)
        raise LakeIoError(f"failed writing {path}: {exc}") from exc


def _append_line(path: Path, line: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(line + "\n")
            fh.flush()
            os.fsync(fh.fileno())
    except OSError as exc:
        raise LakeIoError(f"failed appending to {path}: {exc}") from exc


class DataLake:
    """Many concurrent readers; all appends serialize through one lock."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self._lock = threading.Lock()
        for sub in ("blobs", "canonical", "results", "registry"):
            (self.root / sub).mkdir(parents=True, exist_ok=True)
        self._index_path = self.root / "index.jsonl"
        self._entries: list[LakeEntry] = []
        self._by_id: dict[str, LakeEntry] = {}
        self._load_index()
        self._secret = self._load_or_create_secret()
        self._studies: dict[str, StudyId] = {}
        self._load_studies()

    # -- startup ---------------------------------------------------------

    def _load_index(self):
        if not self._index_path.exists():
            return
        data = self._index_path.read_bytes()
        offset = 0
        for chunk in data.split(b"\n"):
            stripped = chunk.strip()
            if stripped:
                try:
                    entry = LakeEntry.from_row(json.loads(stripped.decode("utf-8")))
                except (ValueError, KeyError, DomainError):
                    # A torn final line is a crash artifact: drop it. Anything
                    # earlier means real corruption.
                    if offset + len(chunk) >= len(data):
                        with open(self._index_path, "r+b") as fh:
                            fh.truncate(offset)
                        break
                    raise LakeIoError(f"corrupt index line at byte {offset}")
                expected = len(self._entries) + 1
                if entry.index_seq != expected:
                    raise LakeIoError(
                        f"index gap: expected seq {expected}, found {entry.index_seq}"
                    )
                self._entries.append(entry)
                self._by_id[entry.recording_id] = entry
            offset += len(chunk) + 1

    def _load_or_create_secret(self) -> bytes:
        key_path = self.root / "registry" / "secret.key"
        if key_path.exists():
            return bytes.fromhex(key_path.read_text().strip())
        secret = secrets.token_bytes(32)
        _atomic_write(key_path, secret.hex().encode())
        return secret

    def _load_studies(self):
        path = self.root / "registry" / "studies.jsonl"
        if not path.exists():
            return
        for line in path.read_text().splitlines():
            if line.strip():
                row = json.loads(line)
                self._studies[row["external_id"]] = StudyId(row["study_id"])

    # -- pseudonym registry -----------------------------------------------

    def register_study(self, external_id: str) -> StudyId:
        """Mint (or look up) the pseudonymous study id for an external id.

        The token is a keyed digest, so it is deterministic within this lake
        instance yet not derivable from the external id alone; the mapping
        lives only under registry/.
        """
        if not external_id:
            raise BadRequest("external id must be non-empty")
        with self._lock:
            existing = self._studies.get(external_id)
            if existing is not None:
                return existing
            digest = hmac.new(self._secret, external_id.encode("utf-8"), hashlib.sha256)
            study = StudyId(digest.hexdigest()[:STUDY_ID_HEX_LEN])
            _append_line(
                self.root / "registry" / "studies.jsonl",
                json.dumps({"external_id": external_id, "study_id": study.value}),
            )
            self._studies[external_id] = study
            return study

    # -- recordings --------------------------------------------------------

    def put_recording(
        self,
        raw: RawDeviceRecord,
        parsed: EcgRecording,
        upload_s: float | None = None,
    ) -> LakeEntry:
        """Store raw bytes + canonical form under the content hash and append
        one index row; duplicates raise AlreadyExists without a second row."""
        from ecgflow.core import content_hash

        if parsed.recording_id != content_hash(raw.payload):
            raise DomainError("recording_id does not match raw payload hash")
        existing = self._by_id.get(parsed.recording_id)
        if existing is not None:
            raise AlreadyExists(existing)

        _atomic_write(self.root / blob_relpath(parsed.recording_id), raw.payload)
        envelope = {
            "recording": {
                "recording_id": parsed.recording_id,
                "device": parsed.device.value,
                "study_id": parsed.study_id.value,
                "sample_rate_hz": parsed.sample_rate_hz,
                "lead": parsed.lead,
                "samples_mv": parsed.samples.tolist(),
                "recorded_at": format_utc_ms(parsed.recorded_at),
                "received_at": format_utc_ms(parsed.received_at),
            },
            "ingest": {
                "upload_s": upload_s if upload_s is not None else 0.0,
                "source_uri": raw.source_uri,
            },
        }
        _atomic_write(
            self.root / _canonical_relpath(parsed.recording_id),
            json.dumps(envelope).encode("utf-8"),
        )

        with self._lock:
            existing = self._by_id.get(parsed.recording_id)
            if existing is not None:
                raise AlreadyExists(existing)
            entry = LakeEntry(
                index_seq=len(self._entries) + 1,
                recording_id=parsed.recording_id,
                device=parsed.device,
                study_id=parsed.study_id,
                received_at=parsed.received_at,
                blob_path=blob_relpath(parsed.recording_id),
            )
            self._append_index_line(json.dumps(entry.to_row()))
            self._entries.append(entry)
            self._by_id[entry.recording_id] = entry
            return entry

    def _append_index_line(self, line: str) -> None:
        _append_line(self._index_path, line)

    @property
    def max_seq(self) -> int:
        return len(self._entries)

    def list_since(self, cursor: int) -> list[LakeEntry]:
        """Entries with index_seq > cursor, ascending; empty when none."""
        if cursor < 0:
            raise BadRequest("cursor must be >= 0")
        with self._lock:
            return list(self._entries[cursor:])

    def get_entry(self, recording_id: str) -> LakeEntry:
        entry = self._by_id.get(recording_id)
        if entry is None:
            raise LakeNotFound(f"recording {recording_id} is not indexed")
        return entry

    def has_recording(self, recording_id: str) -> bool:
        return recording_id in self._by_id

    def entries_for_study(self, study_id: StudyId) -> list[LakeEntry]:
        with self._lock:
            return [e for e in self._entries if e.study_id == study_id]

    def is_known_study(self, study_id: StudyId) -> bool:
        with self._lock:
            return study_id in self._studies.values() or any(
                e.study_id == study_id for e in self._entries
            )

    def load_raw_bytes(self, recording_id: str) -> bytes:
        self.get_entry(recording_id)
        try:
            return (self.root / blob_relpath(recording_id)).read_bytes()
        except OSError as exc:
            raise LakeIoError(f"blob missing for {recording_id}: {exc}") from exc

    def load_recording(self, recording_id: str) -> tuple[EcgRecording, dict]:
        """Read the canonical form back; returns (recording, ingest metadata)."""
        self.get_entry(recording_id)
        path = self.root / _canonical_relpath(recording_id)
        try:
            envelope = json.loads(path.read_text())
        except OSError as exc:
            raise LakeIoError(f"canonical form missing for {recording_id}: {exc}") from exc
        rec = envelope["recording"]
        recording = EcgRecording(
            recording_id=rec["recording_id"],
            device=DeviceKind(rec["device"]),
            study_id=StudyId(rec["study_id"]),
            sample_rate_hz=int(rec["sample_rate_hz"]),
            samples=np.asarray(rec["samples_mv"], dtype=np.float64),
            recorded_at=parse_utc(rec["recorded_at"]),
            received_at=parse_utc(rec["received_at"]),
            lead=rec["lead"],
        )
        return recording, envelope["ingest"]

    # -- results ------------------------------------------------------------

    def put_result(self, result: PredictionResult) -> None:
        """Append one model's prediction row; results are append-only."""
        self.get_entry(result.recording_id)
        row = {
            "type": "prediction",
            "recording_id": result.recording_id,
            "model_id": result.model_id,
            "probability": result.probability,
            "threshold": result.threshold,
            "label": result.label,
            "timings": result.timings.to_dict(),
            "produced_at": format_utc_ms(result.produced_at),
        }
        with self._lock:
            self._append_result_row(result.recording_id, row)

    def put_model_error(
        self, recording_id: str, model_id: str, error: str, detail: str, produced_at: datetime
    ) -> None:
        self.get_entry(recording_id)
        row = {
            "type": "model_error",
            "recording_id": recording_id,
            "model_id": model_id,
            "error": error,
            "detail": detail,
            "produced_at": format_utc_ms(produced_at),
        }
        with self._lock:
            self._append_result_row(recording_id, row)

    def put_rejection(
        self, recording_id: str, reason: str, detail: str, produced_at: datetime
    ) -> None:
        """Terminal record for a recording the preprocessor refused."""
        self.get_entry(recording_id)
        row = {
            "type": "rejected",
            "recording_id": recording_id,
            "reason": reason,
            "detail": detail,
            "produced_at": format_utc_ms(produced_at),
        }
        with self._lock:
            self._append_result_row(recording_id, row)

    def put_failure(self, recording_id: str, detail: str, produced_at: datetime) -> None:
        """Terminal record for a recording whose processing crashed."""
        self.get_entry(recording_id)
        row = {
            "type": "failed",
            "recording_id": recording_id,
            "detail": detail,
            "produced_at": format_utc_ms(produced_at),
        }
        with self._lock:
            self._append_result_row(recording_id, row)

    def _append_result_row(self, recording_id: str, row: dict) -> None:
        _append_line(self.root / _results_relpath(recording_id), json.dumps(row))

    def get_results(self, recording_id: str) -> list[dict]:
        """All result rows for a recording, ordered by produced_at."""
        self.get_entry(recording_id)
        path = self.root / _results_relpath(recording_id)
        if not path.exists():
            return []
        rows = [json.loads(line) for line in path.read_text().splitlines() if line.strip()]
        rows.sort(key=lambda r: r["produced_at"])
        return rows

    def get_predictions(self, recording_id: str) -> list[PredictionResult]:
        results = []
        for row in self.get_results(recording_id):
            if row["type"] != "prediction":
                continue
            results.append(
                PredictionResult(
                    recording_id=row["recording_id"],
                    model_id=row["model_id"],
                    probability=float(row["probability"]),
                    threshold=float(row["threshold"]),
                    label=bool(row["label"]),
                    timings=StageTimings.from_dict(row["timings"]),
                    produced_at=parse_utc(row["produced_at"]),
                )
            )
        return results

    def has_results(self, recording_id: str) -> bool:
        return (self.root / _results_relpath(recording_id)).exists()

    def status_of(self, recording_id: str) -> str:
        """pending | done | rejected | failed, from the result rows."""
        rows = self.get_results(recording_id)
        if any(r["type"] == "rejected" for r in rows):
            return "rejected"
        if any(r["type"] == "failed" for r in rows):
            return "failed"
        if any(r["type"] in ("prediction", "model_error") for r in rows):
            return "done"
        return "pending"
