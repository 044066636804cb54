"""Five-trial timing study: full acquire -> upload -> poll -> infer -> publish
cycles with per-stage durations and per-stage means.

Two modes:

* injected - fixed stage delays are stamped instead of measured, so the
  end-to-end arithmetic (30 s acquisition + upload + pickup + inference +
  publish) is reproduced deterministically on the simulated clock.
* wall     - honest measurements of this implementation; arrivals land at
  seeded uniform-random offsets inside each poll window, so pickup latency
  is dominated by the 30 s polling design.

Every cycle really executes: records are rendered by the simulators,
ingested, polled, preprocessed, scored by the three fixture models, and
published; only the recorded stage durations differ between modes.
"""

import json
import tempfile
from dataclasses import dataclass, field
from datetime import timedelta
from pathlib import Path

import numpy as np

from ecgflow.clock import SIM_EPOCH, SimulatedClock
from ecgflow.core import ACQUISITION_SECONDS, BadRequest, DeviceKind, StageTimings
from ecgflow.ingest import ingest_payload
from ecgflow.lake import DataLake
from ecgflow.models.fixtures import write_default_registry
from ecgflow.pipeline import FeedCollector, InjectedDelays, Pipeline, PipelineConfig
from ecgflow.simulators import (
    ScheduledFeed,
    ScheduledRecord,
    SyntheticEcgSpec,
    render_json_record,
    render_watch_export,
)

STAGES = ("acquisition_s", "upload_s", "pickup_s", "inference_s", "publish_s")

# Fixed stage delays for injected mode, per device.
INJECTED_PROFILE = {
    DeviceKind.KARDIA: {"upload_s": 0.0, "pickup_s": 19.17, "inference_s": 11.49, "publish_s": 2.35},
    DeviceKind.APPLE_WATCH: {"upload_s": 0.7, "pickup_s": 19.17, "inference_s": 13.51, "publish_s": 2.35},
}

TABLE_COLUMNS = (
    "Device",
    "Time to record ECG",
    "Mean time for data to be uploaded to storage",
    "Mean time for new ECG data to be picked up by the backend",
    "Mean time to run predictive models on the data",
    "Mean turnaround time for results to be displayed on the dashboard",
    "Mean time for the entire process",
)

DEVICE_DISPLAY = {DeviceKind.KARDIA: "Kardia", DeviceKind.APPLE_WATCH: "Apple Watch", DeviceKind.FITBIT: "Fitbit"}


def aggregate_trials(trials: list[StageTimings]) -> dict[str, float]:
    """Arithmetic mean per stage plus the mean total (sum of stage means)."""
    if not trials:
        raise BadRequest("cannot aggregate zero trials")
    means = {stage: float(np.mean([getattr(t, stage) for t in trials])) for stage in STAGES}
    means["total_s"] = float(np.mean([t.total_s for t in trials]))
    return means


@dataclass(frozen=True)
class TrialOutcome:
    trial: int
    recording_id: str
    ok: bool
    timings: StageTimings | None = None
    error: str | None = None


@dataclass
class TimingReport:
    device: DeviceKind
    mode: str
    poll_interval_s: float
    trials: list[TrialOutcome] = field(default_factory=list)

    @property
    def successes(self) -> list[StageTimings]:
        return [t.timings for t in self.trials if t.ok]

    @property
    def failed_count(self) -> int:
        return sum(1 for t in self.trials if not t.ok)

    @property
    def stage_means(self) -> dict[str, float]:
        return aggregate_trials(self.successes)

    def to_jsonable(self) -> dict:
        means = self.stage_means if self.successes else None
        return {
            "device": self.device.value,
            "mode": self.mode,
            "poll_interval_s": self.poll_interval_s,
            "n_trials": len(self.trials),
            "n_failed": self.failed_count,
            "trials": [
                {
                    "trial": t.trial,
                    "recording_id": t.recording_id,
                    "ok": t.ok,
                    "timings": t.timings.to_dict() if t.timings else None,
                    "error": t.error,
                }
                for t in self.trials
            ],
            "stage_means": means,
        }

    def to_markdown(self) -> str:
        means = self.stage_means
        row = [
            DEVICE_DISPLAY[self.device],
            f"{means['acquisition_s']:.2f}",
            f"{means['upload_s']:.2f}",
            f"{means['pickup_s']:.2f}",
            f"{means['inference_s']:.2f}",
            f"{means['publish_s']:.2f}",
            f"{means['total_s']:.2f}",
        ]
        lines = [
            f"# Time efficiency ({self.mode} mode, all values in seconds)",
            "",
            "| " + " | ".join(TABLE_COLUMNS) + " |",
            "| " + " | ".join("---" for _ in TABLE_COLUMNS) + " |",
            "| " + " | ".join(row) + " |",
            "",
            f"Trials: {len(self.trials)} ({self.failed_count} failed; "
            f"means computed over {len(self.successes)} successes)",
        ]
        return "\n".join(lines) + "\n"


def _final_timings(lake: DataLake, recording_id: str) -> StageTimings:
    """A trial's timings: the last-published model row closes the cycle."""
    predictions = lake.get_predictions(recording_id)
    return max(predictions, key=lambda p: (p.timings.publish_s, p.model_id)).timings


def run_time_trials(
    device: DeviceKind,
    n: int = 5,
    mode: str = "injected",
    *,
    poll_interval_s: float = 30.0,
    seed: int = 7,
    workdir: Path | None = None,
) -> TimingReport:
    """Run n full platform cycles for one device and report stage timings."""
    if device not in (DeviceKind.KARDIA, DeviceKind.APPLE_WATCH, DeviceKind.FITBIT):
        raise BadRequest(f"unknown device {device!r}")
    if mode not in ("injected", "wall"):
        raise BadRequest(f"unknown mode {mode!r}")
    if n < 1:
        raise BadRequest("need at least one trial")

    if workdir is None:
        with tempfile.TemporaryDirectory(prefix="ecgbench-") as tmp:
            return run_time_trials(
                device, n, mode, poll_interval_s=poll_interval_s, seed=seed, workdir=Path(tmp)
            )

    workdir = Path(workdir)
    clock = SimulatedClock()
    lake = DataLake(workdir / "lake")
    descriptors, _ = write_default_registry(workdir / "models")

    profile = INJECTED_PROFILE.get(device, INJECTED_PROFILE[DeviceKind.KARDIA])
    injected = None
    injected_upload = None
    if mode == "injected":
        injected = InjectedDelays(
            pickup_s=profile["pickup_s"],
            inference_s=profile["inference_s"],
            publish_s=profile["publish_s"],
        )
        injected_upload = profile["upload_s"]

    rng = np.random.default_rng(seed)
    offsets = (
        np.full(n, poll_interval_s / 2.0)
        if mode == "injected"
        else rng.uniform(0.0, poll_interval_s, size=n)
    )
    arrivals = [k * poll_interval_s + float(offsets[k]) for k in range(n)]

    collectors = []
    use_collector = mode == "injected" and device in (DeviceKind.KARDIA, DeviceKind.FITBIT)
    if use_collector:
        # Exercise the vendor-API polling machinery: the feed emits on
        # schedule and the collector picks records up on the shared tick.
        schedule = [
            ScheduledRecord(emit_at_s=arrivals[k], spec=SyntheticEcgSpec(seed=seed + k))
            for k in range(n)
        ]
        feed = ScheduledFeed(device, schedule, clock)
        collectors.append(
            FeedCollector(
                device,
                feed,
                lake,
                clock,
                external_id=f"{device.value}-bench-device",
                injected_upload_s=injected_upload,
            )
        )

    pipeline = Pipeline(
        lake,
        PipelineConfig(
            model_registry=descriptors,
            poll_interval_s=poll_interval_s,
            injected_delays=injected,
        ),
        clock=clock,
        collectors=collectors,
    )

    recording_ids: list[str | None] = [None] * n
    for k in range(n):
        if not use_collector:
            clock.advance_to(arrivals[k])
            spec = SyntheticEcgSpec(seed=seed + k).for_device(device)
            recorded_at = clock.now_utc() - timedelta(seconds=spec.duration_s)
            if device is DeviceKind.APPLE_WATCH:
                payload = render_watch_export(spec, recorded_at)
            else:
                payload = render_json_record(device, spec, recorded_at)
            outcome = ingest_payload(
                lake,
                payload,
                external_id=f"{device.value}-bench-device",
                source_uri="bench:upload",
                clock=clock,
                upload_s=injected_upload,
            )
            recording_ids[k] = outcome.entry.recording_id
        clock.advance_to((k + 1) * poll_interval_s)
        pipeline.tick()

    if use_collector:
        for k, entry in enumerate(lake.list_since(0)):
            recording_ids[k] = entry.recording_id

    report = TimingReport(device=device, mode=mode, poll_interval_s=poll_interval_s)
    for k, rid in enumerate(recording_ids):
        if rid is None:
            report.trials.append(
                TrialOutcome(trial=k + 1, recording_id="", ok=False, error="record never ingested")
            )
            continue
        status = lake.status_of(rid)
        if status == "done" and lake.get_predictions(rid):
            report.trials.append(
                TrialOutcome(
                    trial=k + 1, recording_id=rid, ok=True, timings=_final_timings(lake, rid)
                )
            )
        else:
            rows = lake.get_results(rid)
            detail = rows[0].get("reason") or rows[0].get("detail") if rows else status
            report.trials.append(
                TrialOutcome(trial=k + 1, recording_id=rid, ok=False, error=f"{status}: {detail}")
            )
    pipeline.shutdown()
    return report


def write_report(report: TimingReport, path: Path) -> None:
    """Write JSON or markdown depending on the file extension."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.suffix == ".json":
        path.write_text(json.dumps(report.to_jsonable(), indent=2) + "\n")
    elif path.suffix == ".md":
        path.write_text(report.to_markdown())
    else:
        raise BadRequest(f"report path must end in .json or .md, got {path.name}")
