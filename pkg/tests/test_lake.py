"""Tests for the content-addressed lake, append-only index, and pseudonyms."""

import json
import threading
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import pytest

from ecgflow.adapters import RawDeviceRecord
from ecgflow.core import (
    DeviceKind,
    EcgRecording,
    PredictionResult,
    StageTimings,
    StudyId,
    content_hash,
)
from ecgflow.lake import (
    AlreadyExists,
    BadRequest,
    DataLake,
    LakeIoError,
    LakeNotFound,
    blob_relpath,
)

UTC = timezone.utc
T0 = datetime(2026, 3, 4, 10, 0, 0, 123000, tzinfo=UTC)


@pytest.fixture
def lake(tmp_path):
    return DataLake(tmp_path / "lake")


def make_pair(payload: bytes, study: StudyId, device=DeviceKind.KARDIA, rate=100, n=3000):
    raw = RawDeviceRecord(device=device, payload=payload, source_uri="test:", fetched_at=T0)
    rng = np.random.default_rng(len(payload))
    rec = EcgRecording(
        recording_id=content_hash(payload),
        device=device,
        study_id=study,
        sample_rate_hz=rate,
        samples=rng.normal(0, 0.5, size=n),
        recorded_at=T0,
        received_at=T0,
    )
    return raw, rec


class TestStudyRegistry:
    def test_idempotent(self, lake):
        a = lake.register_study("MRN-001")
        b = lake.register_study("MRN-001")
        assert a == b

    def test_distinct_ids(self, lake):
        assert lake.register_study("MRN-001") != lake.register_study("MRN-002")

    def test_not_derivable(self, lake):
        sid = lake.register_study("MRN-001")
        assert sid.value != "MRN-001"
        assert "MRN-001".lower() not in sid.value

    def test_empty_rejected(self, lake):
        with pytest.raises(BadRequest):
            lake.register_study("")

    def test_persists_across_reopen(self, lake, tmp_path):
        sid = lake.register_study("MRN-042")
        reopened = DataLake(lake.root)
        assert reopened.register_study("MRN-042") == sid

    def test_different_lakes_mint_different_tokens(self, tmp_path):
        a = DataLake(tmp_path / "a").register_study("MRN-001")
        b = DataLake(tmp_path / "b").register_study("MRN-001")
        assert a != b


class TestPutRecording:
    def test_monotone_seq(self, lake):
        study = lake.register_study("MRN-1")
        for i in range(1, 4):
            raw, rec = make_pair(f"payload-{i}".encode(), study)
            entry = lake.put_recording(raw, rec)
            assert entry.index_seq == i

    def test_duplicate_raises_and_index_unchanged(self, lake):
        study = lake.register_study("MRN-1")
        raw, rec = make_pair(b"payload", study)
        first = lake.put_recording(raw, rec)
        with pytest.raises(AlreadyExists) as excinfo:
            lake.put_recording(raw, rec)
        assert excinfo.value.entry.index_seq == first.index_seq
        assert lake.max_seq == first.index_seq

    def test_blob_path_is_function_of_recording_id(self, lake):
        study = lake.register_study("MRN-1")
        raw, rec = make_pair(b"payload", study)
        entry = lake.put_recording(raw, rec)
        assert entry.blob_path == blob_relpath(rec.recording_id)
        assert (lake.root / entry.blob_path).read_bytes() == b"payload"

    def test_blob_round_trip_random_payloads(self, lake):
        study = lake.register_study("MRN-1")
        rng = np.random.default_rng(7)
        for _ in range(1000):
            payload = rng.integers(0, 256, size=int(rng.integers(1, 200))).astype(np.uint8).tobytes()
            raw, rec = make_pair(payload, study)
            try:
                lake.put_recording(raw, rec)
            except AlreadyExists:
                pass
            assert lake.load_raw_bytes(rec.recording_id) == payload

    def test_recording_round_trip_bit_exact(self, lake):
        study = lake.register_study("MRN-1")
        raw, rec = make_pair(b"canonical-trip", study)
        lake.put_recording(raw, rec, upload_s=0.25)
        loaded, meta = lake.load_recording(rec.recording_id)
        assert loaded.samples.tobytes() == rec.samples.tobytes()
        assert loaded.recording_id == rec.recording_id
        assert loaded.device == rec.device
        assert loaded.study_id == rec.study_id
        assert loaded.sample_rate_hz == rec.sample_rate_hz
        assert loaded.recorded_at == rec.recorded_at
        assert loaded.received_at == rec.received_at
        assert meta["upload_s"] == 0.25

    def test_two_concurrent_writers_gap_free(self, lake):
        study = lake.register_study("MRN-1")
        n_each = 500
        errors = []

        def writer(tag):
            try:
                for i in range(n_each):
                    raw, rec = make_pair(f"{tag}-{i}".encode(), study)
                    lake.put_recording(raw, rec)
            except Exception as exc:  # pragma: no cover
                errors.append(exc)

        threads = [threading.Thread(target=writer, args=(t,)) for t in ("a", "b")]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not errors
        entries = lake.list_since(0)
        seqs = [e.index_seq for e in entries]
        assert seqs == list(range(1, 2 * n_each + 1))

    def test_reopen_continues_sequence(self, lake):
        study = lake.register_study("MRN-1")
        raw, rec = make_pair(b"first", study)
        lake.put_recording(raw, rec)
        reopened = DataLake(lake.root)
        raw2, rec2 = make_pair(b"second", study)
        entry = reopened.put_recording(raw2, rec2)
        assert entry.index_seq == 2
        with pytest.raises(AlreadyExists):
            reopened.put_recording(raw, rec)


class TestListSince:
    def test_empty(self, lake):
        assert lake.list_since(0) == []

    def test_window(self, lake):
        study = lake.register_study("MRN-1")
        for i in range(5):
            raw, rec = make_pair(f"p{i}".encode(), study)
            lake.put_recording(raw, rec)
        got = lake.list_since(3)
        assert [e.index_seq for e in got] == [4, 5]

    def test_cursor_at_max(self, lake):
        study = lake.register_study("MRN-1")
        raw, rec = make_pair(b"only", study)
        lake.put_recording(raw, rec)
        assert lake.list_since(lake.max_seq) == []

    def test_negative_cursor_rejected(self, lake):
        with pytest.raises(BadRequest):
            lake.list_since(-1)


class TestCrashSafety:
    def test_orphan_blob_invisible_and_reput_succeeds(self, lake, monkeypatch):
        study = lake.register_study("MRN-1")
        raw, rec = make_pair(b"crashy", study)

        def boom(line):
            raise LakeIoError("injected crash before index append")

        monkeypatch.setattr(lake, "_append_index_line", boom)
        with pytest.raises(LakeIoError):
            lake.put_recording(raw, rec)
        monkeypatch.undo()

        # Blob exists on disk but the index never saw it.
        assert (lake.root / blob_relpath(rec.recording_id)).exists()
        assert lake.list_since(0) == []

        reopened = DataLake(lake.root)
        assert reopened.list_since(0) == []
        entry = reopened.put_recording(raw, rec)
        assert entry.index_seq == 1

    def test_torn_trailing_index_line_recovered(self, lake):
        study = lake.register_study("MRN-1")
        raw, rec = make_pair(b"whole", study)
        lake.put_recording(raw, rec)
        index = lake.root / "index.jsonl"
        with open(index, "a") as fh:
            fh.write('{"index_seq": 2, "recording_id": "deadbeef')  # torn write
        reopened = DataLake(lake.root)
        assert [e.index_seq for e in reopened.list_since(0)] == [1]
        raw2, rec2 = make_pair(b"next", study)
        assert reopened.put_recording(raw2, rec2).index_seq == 2
        again = DataLake(lake.root)
        assert [e.index_seq for e in again.list_since(0)] == [1, 2]


def prediction(rec_id, model_id="lvsd", prob=0.7, produced_at=T0):
    return PredictionResult.from_probability(
        recording_id=rec_id,
        model_id=model_id,
        probability=prob,
        threshold=0.5,
        timings=StageTimings.from_stages(30.0, 0.1, 19.0, 11.0, 2.0),
        produced_at=produced_at,
    )


class TestResults:
    def seed_recording(self, lake):
        study = lake.register_study("MRN-9")
        raw, rec = make_pair(b"with-results", study)
        lake.put_recording(raw, rec)
        return rec

    def test_round_trip_field_exact(self, lake):
        rec = self.seed_recording(lake)
        result = prediction(rec.recording_id)
        lake.put_result(result)
        got = lake.get_predictions(rec.recording_id)
        assert got == [result]

    def test_three_models_sorted(self, lake):
        rec = self.seed_recording(lake)
        times = [T0.replace(second=s) for s in (3, 1, 2)]
        for model, t in zip(("lvsd", "hcm", "structural"), times):
            lake.put_result(prediction(rec.recording_id, model, produced_at=t))
        got = lake.get_predictions(rec.recording_id)
        assert [r.produced_at.second for r in got] == [1, 2, 3]
        assert len(got) == 3

    def test_unknown_recording_not_found(self, lake):
        with pytest.raises(LakeNotFound):
            lake.get_results("ff" * 32)

    def test_pending_then_done_status(self, lake):
        rec = self.seed_recording(lake)
        assert lake.status_of(rec.recording_id) == "pending"
        lake.put_result(prediction(rec.recording_id))
        assert lake.status_of(rec.recording_id) == "done"

    def test_rejection_status_and_reason(self, lake):
        rec = self.seed_recording(lake)
        lake.put_rejection(rec.recording_id, "FlatSignal", "signal is constant", T0)
        assert lake.status_of(rec.recording_id) == "rejected"
        rows = lake.get_results(rec.recording_id)
        assert rows[0]["type"] == "rejected"
        assert rows[0]["reason"] == "FlatSignal"

    def test_results_survive_reopen(self, lake):
        rec = self.seed_recording(lake)
        lake.put_result(prediction(rec.recording_id))
        reopened = DataLake(lake.root)
        assert len(reopened.get_predictions(rec.recording_id)) == 1


class TestPseudonymization:
    def test_external_id_only_in_registry(self, lake):
        external = "MRN-SECRET-777"
        study = lake.register_study(external)
        raw, rec = make_pair(b"private-payload", study)
        lake.put_recording(raw, rec)
        lake.put_result(prediction(rec.recording_id))
        needle = external.encode()
        hits = []
        for path in lake.root.rglob("*"):
            if path.is_file() and needle in path.read_bytes():
                hits.append(path.relative_to(lake.root))
        assert hits, "external id must exist somewhere (the registry)"
        for hit in hits:
            assert hit.parts[0] == "registry", f"external id leaked into {hit}"


class TestIndexGolden:
    def test_index_line_schema_frozen(self, lake):
        study = lake.register_study("MRN-1")
        raw, rec = make_pair(b"golden-index", study)
        entry = lake.put_recording(raw, rec)
        line = (lake.root / "index.jsonl").read_text().splitlines()[0]
        row = json.loads(line)
        assert row == {
            "index_seq": 1,
            "recording_id": rec.recording_id,
            "device": "kardia",
            "study_id": study.value,
            "received_at": "2026-03-04T10:00:00.123Z",
            "blob_path": f"blobs/{rec.recording_id[:2]}/{rec.recording_id}",
        }
        assert entry.index_seq == 1
