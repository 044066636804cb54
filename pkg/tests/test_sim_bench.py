"""Tests for the device simulators, the timing bench, and the CLIs."""

import json
from datetime import datetime, timezone

import numpy as np
import pytest
from fastapi.testclient import TestClient

from ecgflow.adapters import (
    parse_apple_watch_export,
    parse_fitbit_record,
    parse_kardia_record,
)
from ecgflow.bench import (
    TimingReport,
    TrialOutcome,
    aggregate_trials,
    run_time_trials,
    write_report,
)
from ecgflow.clock import SIM_EPOCH, SimulatedClock
from ecgflow.cli import ecgbench_main, ecgsim_main, load_schedule
from ecgflow.core import BadRequest, DeviceKind, StageTimings, StudyId
from ecgflow.simulators import (
    HttpFeedClient,
    ScheduledFeed,
    ScheduledRecord,
    SyntheticEcgSpec,
    emit_watch_export,
    make_feed_app,
    render_json_record,
    render_watch_export,
    synthesize_ecg_uv,
)

UTC = timezone.utc
T0 = datetime(2026, 3, 4, 10, 0, tzinfo=UTC)
STUDY = StudyId("ee" * 8)


class TestSyntheticRecords:
    def test_deterministic_bytes_all_formats(self):
        spec = SyntheticEcgSpec(seed=5)
        for render in (
            lambda: render_watch_export(spec.for_device(DeviceKind.APPLE_WATCH), T0),
            lambda: render_json_record(DeviceKind.KARDIA, spec.for_device(DeviceKind.KARDIA), T0),
            lambda: render_json_record(DeviceKind.FITBIT, spec.for_device(DeviceKind.FITBIT), T0),
        ):
            assert render() == render()

    def test_different_seeds_differ(self):
        a = synthesize_ecg_uv(SyntheticEcgSpec(seed=1))
        b = synthesize_ecg_uv(SyntheticEcgSpec(seed=2))
        assert not np.array_equal(a, b)

    def test_round_trip_bit_exact_watch(self):
        spec = SyntheticEcgSpec(seed=6).for_device(DeviceKind.APPLE_WATCH)
        payload = render_watch_export(spec, T0)
        rec = parse_apple_watch_export(payload, study_id=STUDY, received_at=T0)
        uv = synthesize_ecg_uv(spec)
        assert rec.samples.tobytes() == (uv.astype(np.float64) / 1000.0).tobytes()
        assert rec.recorded_at == T0

    def test_round_trip_bit_exact_kardia(self):
        spec = SyntheticEcgSpec(seed=7).for_device(DeviceKind.KARDIA)
        payload = render_json_record(DeviceKind.KARDIA, spec, T0)
        rec = parse_kardia_record(payload, study_id=STUDY, received_at=T0)
        uv = synthesize_ecg_uv(spec)
        assert rec.samples.tobytes() == (uv.astype(np.float64) / 1000.0).tobytes()

    def test_round_trip_bit_exact_fitbit(self):
        spec = SyntheticEcgSpec(seed=8).for_device(DeviceKind.FITBIT)
        payload = render_json_record(DeviceKind.FITBIT, spec, T0)
        rec = parse_fitbit_record(payload, study_id=STUDY, received_at=T0)
        assert rec.sample_rate_hz == 250
        assert len(rec.samples) == 7500

    def test_flat_spec_renders_parseable_zeros(self):
        spec = SyntheticEcgSpec(seed=9, flat=True).for_device(DeviceKind.KARDIA)
        payload = render_json_record(DeviceKind.KARDIA, spec, T0)
        rec = parse_kardia_record(payload, study_id=STUDY, received_at=T0)
        assert np.all(rec.samples == 0.0)


class TestScheduledFeed:
    def make_feed(self, clock, device=DeviceKind.KARDIA):
        schedule = [
            ScheduledRecord(emit_at_s=10.0, spec=SyntheticEcgSpec(seed=1)),
            ScheduledRecord(emit_at_s=40.0, spec=SyntheticEcgSpec(seed=2)),
        ]
        return ScheduledFeed(device, schedule, clock)

    def test_empty_schedule_always_empty(self):
        clock = SimulatedClock()
        feed = ScheduledFeed(DeviceKind.KARDIA, [], clock)
        clock.advance(1000)
        assert feed.fetch_since(0) == ([], 0)

    def test_schedule_semantics(self):
        clock = SimulatedClock()
        feed = self.make_feed(clock)
        clock.advance_to(5.0)
        payloads, cursor = feed.fetch_since(0)
        assert payloads == [] and cursor == 0
        clock.advance_to(15.0)
        payloads, cursor = feed.fetch_since(cursor)
        assert len(payloads) == 1 and cursor == 1
        clock.advance_to(100.0)
        payloads, cursor = feed.fetch_since(cursor)
        assert len(payloads) == 1 and cursor == 2
        assert feed.fetch_since(cursor) == ([], 2)

    def test_deterministic_across_runs(self):
        a = self.make_feed(SimulatedClock())
        b = self.make_feed(SimulatedClock())
        assert [p for _, p in a._records] == [p for _, p in b._records]

    def test_http_face_preserves_bytes(self):
        clock = SimulatedClock()
        feed = self.make_feed(clock)
        clock.advance_to(50.0)
        app = make_feed_app(feed)
        with TestClient(app) as http:
            client = HttpFeedClient("http://feed", client=http)
            payloads, cursor = client.fetch_since(0)
        direct, _ = feed.fetch_since(0)
        assert payloads == direct
        assert cursor == 2

    def test_http_malformed_cursor_400(self):
        clock = SimulatedClock()
        app = make_feed_app(self.make_feed(clock))
        with TestClient(app) as http:
            assert http.get("/records", params={"since": "nope"}).status_code == 400
            assert http.get("/records", params={"since": "-3"}).status_code == 400

    def test_fitbit_shape_served(self):
        clock = SimulatedClock()
        feed = self.make_feed(clock, device=DeviceKind.FITBIT)
        clock.advance_to(50.0)
        payloads, _ = feed.fetch_since(0)
        record = json.loads(payloads[0])
        assert record["device"] == "fitbit"
        assert record["rate"] == 250


class TestEmitWatchExport:
    def test_writes_parseable_file(self, tmp_path):
        payload, written, _ = emit_watch_export(
            SyntheticEcgSpec(seed=3), recorded_at=T0, out_dir=tmp_path
        )
        assert written.suffix == ".xml" and written.name.endswith(".ecg.xml")
        rec = parse_apple_watch_export(
            written.read_bytes(), study_id=STUDY, received_at=T0
        )
        assert len(rec.samples) == 15000
        assert written.read_bytes() == payload

    def test_byte_identical_across_runs(self, tmp_path):
        a, _, _ = emit_watch_export(SyntheticEcgSpec(seed=4), recorded_at=T0, out_dir=tmp_path / "a")
        b, _, _ = emit_watch_export(SyntheticEcgSpec(seed=4), recorded_at=T0, out_dir=tmp_path / "b")
        assert a == b


class TestAggregateTrials:
    def timings(self, *parts):
        return StageTimings.from_stages(*parts)

    def test_identical_trials(self):
        trials = [self.timings(30.0, 0.5, 10.0, 5.0, 1.0)] * 5
        means = aggregate_trials(trials)
        assert means["pickup_s"] == 10.0
        assert means["total_s"] == pytest.approx(46.5, abs=1e-12)

    def test_table_constants(self):
        trials = [self.timings(30.0, 0.0, 19.17, 11.49, 2.35)] * 5
        assert aggregate_trials(trials)["total_s"] == pytest.approx(63.01, abs=1e-9)

    def test_simple_mean(self):
        trials = [self.timings(30.0, 0.0, p, 0.0, 0.0) for p in (1.0, 2.0, 3.0)]
        assert aggregate_trials(trials)["pickup_s"] == 2.0

    def test_empty_rejected(self):
        with pytest.raises(BadRequest):
            aggregate_trials([])

    def test_mean_of_sums_equals_sum_of_means(self):
        rng = np.random.default_rng(44)
        trials = [self.timings(*rng.uniform(0, 20, size=5)) for _ in range(50)]
        means = aggregate_trials(trials)
        stage_sum = sum(means[s] for s in ("acquisition_s", "upload_s", "pickup_s", "inference_s", "publish_s"))
        assert means["total_s"] == pytest.approx(stage_sum, abs=1e-9)


class TestTimingReport:
    def test_failed_trials_disclosed_and_excluded(self):
        ok = StageTimings.from_stages(30.0, 0.0, 10.0, 5.0, 1.0)
        report = TimingReport(device=DeviceKind.KARDIA, mode="wall", poll_interval_s=30.0)
        report.trials = [
            TrialOutcome(trial=1, recording_id="a" * 64, ok=True, timings=ok),
            TrialOutcome(trial=2, recording_id="b" * 64, ok=False, error="rejected: FlatSignal"),
        ]
        assert report.failed_count == 1
        assert report.stage_means["pickup_s"] == 10.0
        md = report.to_markdown()
        assert "1 failed" in md
        blob = report.to_jsonable()
        assert blob["n_failed"] == 1
        assert blob["trials"][1]["error"] == "rejected: FlatSignal"

    def test_markdown_has_stage_columns(self):
        ok = StageTimings.from_stages(30.0, 0.0, 19.17, 11.49, 2.35)
        report = TimingReport(device=DeviceKind.KARDIA, mode="injected", poll_interval_s=30.0)
        report.trials = [TrialOutcome(trial=1, recording_id="c" * 64, ok=True, timings=ok)]
        md = report.to_markdown()
        assert "Time to record ECG" in md
        assert "picked up by the backend" in md
        assert "| Kardia | 30.00 | 0.00 | 19.17 | 11.49 | 2.35 | 63.01 |" in md


class TestRunTimeTrials:
    def test_injected_kardia_reproduces_totals(self, tmp_path):
        report = run_time_trials(
            DeviceKind.KARDIA, n=5, mode="injected", workdir=tmp_path / "k"
        )
        assert report.failed_count == 0
        means = report.stage_means
        assert means["total_s"] == pytest.approx(63.01, abs=0.05)
        assert means["pickup_s"] == pytest.approx(19.17, abs=0.01)
        assert means["inference_s"] == pytest.approx(11.49, abs=0.01)
        assert means["publish_s"] == pytest.approx(2.35, abs=0.01)
        assert means["upload_s"] == pytest.approx(0.0, abs=0.01)

    def test_injected_watch_reproduces_totals(self, tmp_path):
        report = run_time_trials(
            DeviceKind.APPLE_WATCH, n=5, mode="injected", workdir=tmp_path / "w"
        )
        assert report.failed_count == 0
        means = report.stage_means
        assert means["total_s"] == pytest.approx(65.73, abs=0.05)
        assert means["upload_s"] == pytest.approx(0.7, abs=0.01)
        assert means["inference_s"] == pytest.approx(13.51, abs=0.01)

    def test_wall_mode_pickup_bounded(self, tmp_path):
        report = run_time_trials(
            DeviceKind.KARDIA, n=30, mode="wall", seed=11, workdir=tmp_path / "wall"
        )
        assert report.failed_count == 0
        for outcome in report.trials:
            assert 0.0 <= outcome.timings.pickup_s <= 30.0 + 0.1

    def test_write_report_both_formats(self, tmp_path):
        report = run_time_trials(DeviceKind.KARDIA, n=2, mode="injected", workdir=tmp_path / "r")
        write_report(report, tmp_path / "out.json")
        write_report(report, tmp_path / "out.md")
        blob = json.loads((tmp_path / "out.json").read_text())
        assert blob["device"] == "kardia"
        assert "| Kardia |" in (tmp_path / "out.md").read_text()
        with pytest.raises(BadRequest):
            write_report(report, tmp_path / "out.txt")


class TestClis:
    def test_ecgsim_watch_out_deterministic(self, tmp_path):
        code = ecgsim_main(["watch", "--out", str(tmp_path / "a"), "--seed", "3"])
        assert code == 0
        code = ecgsim_main(["watch", "--out", str(tmp_path / "b"), "--seed", "3"])
        assert code == 0
        a = next((tmp_path / "a").glob("*.ecg.xml")).read_bytes()
        b = next((tmp_path / "b").glob("*.ecg.xml")).read_bytes()
        assert a == b

    def test_ecgbench_trials_injected_report(self, tmp_path, capsys):
        out = tmp_path / "table.md"
        code = ecgbench_main(
            ["trials", "--device", "kardia", "--n", "3", "--mode", "injected", "--report", str(out)]
        )
        assert code == 0
        text = out.read_text()
        assert "63.01" in text

    def test_ecgbench_stdout_markdown(self, capsys):
        code = ecgbench_main(["trials", "--device", "watch", "--n", "2", "--mode", "injected"])
        assert code == 0
        printed = capsys.readouterr().out
        assert "| Apple Watch |" in printed
        assert "65.73" in printed

    def test_schedule_file_loading(self, tmp_path):
        schedule_path = tmp_path / "schedule.json"
        schedule_path.write_text(
            json.dumps(
                {
                    "records": [
                        {"emit_at_s": 3.0, "seed": 10},
                        {"emit_at_s": 8.0, "seed": 11, "flat": True},
                    ]
                }
            )
        )
        records = load_schedule(schedule_path, seed=1)
        assert [r.emit_at_s for r in records] == [3.0, 8.0]
        assert records[1].spec.flat is True
        default = load_schedule(None, seed=1)
        assert len(default) == 20
