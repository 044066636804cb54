"""Lake + pipeline: ingest simulator records into the content-addressed lake,
run the 30 s poll loop on a simulated clock, and inspect the five-stage
timing decomposition of the published results.

Run: python demos/04_lake_and_pipeline.py
"""

import tempfile
from pathlib import Path

from ecgflow.clock import SimulatedClock
from ecgflow.core import DeviceKind
from ecgflow.ingest import ingest_payload
from ecgflow.lake import DataLake
from ecgflow.models.fixtures import write_default_registry
from ecgflow.pipeline import FeedCollector, Pipeline, PipelineConfig
from ecgflow.simulators import ScheduledFeed, ScheduledRecord, SyntheticEcgSpec, render_watch_export

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    clock = SimulatedClock()
    lake = DataLake(tmp / "lake")
    descriptors, _ = write_default_registry(tmp / "models")

    # A Kardia-like feed emits records at t=12 s and t=47 s.
    feed = ScheduledFeed(
        DeviceKind.KARDIA,
        [
            ScheduledRecord(emit_at_s=12.0, spec=SyntheticEcgSpec(seed=1)),
            ScheduledRecord(emit_at_s=47.0, spec=SyntheticEcgSpec(seed=2)),
        ],
        clock,
    )
    collector = FeedCollector(DeviceKind.KARDIA, feed, lake, clock, external_id="kardia-device-1")
    pipeline = Pipeline(
        lake,
        PipelineConfig(model_registry=descriptors, poll_interval_s=30.0,
                       state_path=tmp / "state.json"),
        clock=clock,
        collectors=[collector],
    )

    # One watch upload lands directly (the API path analog) at t=4 s.
    clock.advance_to(4.0)
    spec = SyntheticEcgSpec(seed=3).for_device(DeviceKind.APPLE_WATCH)
    watch = ingest_payload(
        lake,
        render_watch_export(spec, clock.now_utc()),
        external_id="watch-owner-1",
        source_uri="demo:upload",
        clock=clock,
    )
    print(f"t={clock.now_s():5.1f}s watch upload -> index_seq {watch.entry.index_seq}, "
          f"study {watch.entry.study_id}")

    for tick in range(1, 4):
        clock.advance_to(tick * 30.0)
        n = pipeline.tick()
        print(f"t={clock.now_s():5.1f}s tick #{tick}: processed {n} entries "
              f"(lake now {lake.max_seq} recordings)")

    print("\npublished results:")
    for entry in lake.list_since(0):
        for result in lake.get_predictions(entry.recording_id):
            t = result.timings
            print(f"  {entry.device.value:12s} {result.model_id:11s} p={result.probability:.4f} "
                  f"| 30.0 + up {t.upload_s:.3f} + pick {t.pickup_s:6.3f} "
                  f"+ inf {t.inference_s:.3f} + pub {t.publish_s:.3f} = {t.total_s:.3f}s")

    pipeline.shutdown()
    print(f"\ncursor persisted to {pipeline.config.state_path.name}; "
          "a restarted pipeline resumes without re-scoring")
