"""Poll-and-infer loop: discover new lake entries every interval, preprocess,
run all models, stamp the five-stage timings, publish results.

Stage semantics per published result:

* acquisition_s - constant 30.0 from the device contract.
* upload_s      - from the entry's ingest metadata (measured or injected).
* pickup_s      - dequeue time minus received_at on the configured clock;
                  dominated by the poll interval.
* inference_s   - wall time to run all registered models on the window.
* publish_s     - wall time from inference end to the result rows being
                  built for append (the final append syscall's own cost is
                  excluded; it cannot be stamped inside the row it writes).

In bench mode fixed delays can be injected for pickup/inference/publish so
end-to-end timing arithmetic is reproducible deterministically.

Concurrency: one poller owns the cursor; entries of a batch fan out to a
bounded worker pool and the batch is drained before the cursor persists, so
shutdown mid-batch finishes started entries and a restart resumes with no
gap or duplication (a processed-set rebuilt from stored results suppresses
re-delivery after a crash between processing and cursor persist).
"""

import json
import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor, wait as wait_futures
from dataclasses import dataclass, field
from pathlib import Path

from ecgflow.adapters import AdapterError
from ecgflow.clock import WallClock
from ecgflow.core import (
    ACQUISITION_SECONDS,
    DomainError,
    PredictionResult,
    StageTimings,
    truncate_ms,
)
from ecgflow.ingest import ingest_payload
from ecgflow.lake import AlreadyExists, DataLake, LakeEntry, LakeError, LakeIoError
from ecgflow.models.registry import ModelDescriptor, ModelRegistry, predict_all
from ecgflow.preprocess import DspConfig, DspError, preprocess

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class InjectedDelays:
    """Fixed per-stage delays for bench mode; None leaves a stage measured."""

    pickup_s: float | None = None
    inference_s: float | None = None
    publish_s: float | None = None


@dataclass
class PipelineConfig:
    model_registry: list[ModelDescriptor]
    poll_interval_s: float = 30.0
    worker_count: int = 2
    injected_delays: InjectedDelays | None = None
    dsp: DspConfig = field(default_factory=DspConfig)
    state_path: Path | None = None

    def __post_init__(self):
        if self.poll_interval_s <= 0:
            raise DomainError("poll_interval_s must be positive")
        if self.worker_count < 1:
            raise DomainError("worker_count must be >= 1")


class FeedCollector:
    """Polls one vendor-like feed on the shared tick and ingests new records.

    The feed client exposes fetch_since(cursor) -> (payload list, new cursor).
    Records that fail to parse are quarantined (skipped, never stored);
    duplicates are ignored; a feed error leaves the cursor for a retry.
    """

    def __init__(
        self,
        device,
        client,
        lake: DataLake,
        clock,
        external_id: str,
        source_uri: str = "",
        injected_upload_s: float | None = None,
    ):
        self.device = device
        self.client = client
        self.lake = lake
        self.clock = clock
        self.external_id = external_id
        self.source_uri = source_uri or f"feed:{device.value}"
        self.injected_upload_s = injected_upload_s
        self.cursor = 0

    def collect(self) -> int:
        try:
            payloads, new_cursor = self.client.fetch_since(self.cursor)
        except Exception as exc:
            logger.warning("feed %s unreachable: %s", self.device.value, exc)
            return 0
        ingested = 0
        for payload in payloads:
            try:
                outcome = ingest_payload(
                    self.lake,
                    payload,
                    external_id=self.external_id,
                    source_uri=self.source_uri,
                    clock=self.clock,
                    upload_s=self.injected_upload_s,
                )
                if not outcome.duplicate:
                    ingested += 1
            except AdapterError as exc:
                logger.warning("quarantined %s payload: %s", self.device.value, exc)
            except LakeError as exc:
                logger.error("lake refused %s payload: %s", self.device.value, exc)
        self.cursor = new_cursor
        return ingested


class Pipeline:
    """Owns the lake cursor and the worker pool; see module docstring."""

    def __init__(self, lake: DataLake, config: PipelineConfig, clock=None, collectors=()):
        self.lake = lake
        self.config = config
        self.clock = clock if clock is not None else WallClock()
        self.collectors = list(collectors)
        self.registry = ModelRegistry.from_descriptors(config.model_registry)
        self.cursor = 0
        self.last_tick_at = None
        self._processed: set[str] = set()
        self._processed_lock = threading.Lock()
        self._state_lock = threading.Lock()
        self._stop = threading.Event()
        self._executor = ThreadPoolExecutor(
            max_workers=config.worker_count, thread_name_prefix="ecgflow-worker"
        )
        self._restore_state()

    # -- state -------------------------------------------------------------

    def _restore_state(self):
        if self.config.state_path and Path(self.config.state_path).exists():
            state = json.loads(Path(self.config.state_path).read_text())
            self.cursor = int(state.get("cursor", 0))
            feed_cursors = state.get("feed_cursors", {})
            for collector in self.collectors:
                collector.cursor = int(feed_cursors.get(collector.device.value, 0))
        # Entries that already have stored results were processed in a
        # previous life; never re-deliver them even if the cursor is stale.
        for entry in self.lake.list_since(0):
            if self.lake.has_results(entry.recording_id):
                self._processed.add(entry.recording_id)

    def _persist_state(self):
        if not self.config.state_path:
            return
        state = {
            "cursor": self.cursor,
            "feed_cursors": {c.device.value: c.cursor for c in self.collectors},
        }
        path = Path(self.config.state_path)
        with self._state_lock:
            tmp = path.with_name(f".{path.name}.tmp-{id(self)}")
            tmp.write_text(json.dumps(state))
            tmp.replace(path)

    # -- polling -----------------------------------------------------------

    def poll_once(self, cursor: int) -> tuple[list[LakeEntry], int]:
        """list_since threaded through a cursor; lake errors leave it unchanged."""
        try:
            entries = self.lake.list_since(cursor)
        except LakeIoError as exc:
            logger.warning("lake poll failed, retrying next tick: %s", exc)
            return [], cursor
        new_cursor = entries[-1].index_seq if entries else cursor
        return entries, new_cursor

    # -- processing ----------------------------------------------------------

    def process_entry(self, entry: LakeEntry) -> list[PredictionResult]:
        """Preprocess, score with every model, and publish timed results.

        Exactly-once per (recording_id, model_id) is enforced via the
        processed-set keyed on recording_id; rejected recordings store a
        terminal record instead of silently disappearing.
        """
        with self._processed_lock:
            if entry.recording_id in self._processed:
                return []
            self._processed.add(entry.recording_id)

        injected = self.config.injected_delays
        dequeued_at = self.clock.now_utc()
        pickup_s = max(0.0, (dequeued_at - entry.received_at).total_seconds())
        if injected and injected.pickup_s is not None:
            pickup_s = injected.pickup_s

        try:
            recording, ingest_meta = self.lake.load_recording(entry.recording_id)
            upload_s = float(ingest_meta.get("upload_s", 0.0))
            window = preprocess(recording, self.config.dsp)
        except DspError as exc:
            self.lake.put_rejection(
                entry.recording_id, exc.code, str(exc), truncate_ms(self.clock.now_utc())
            )
            return []

        inference_started = time.perf_counter()
        outputs = predict_all(window, self.registry)
        inference_s = time.perf_counter() - inference_started
        if injected and injected.inference_s is not None:
            inference_s = injected.inference_s

        publish_started = time.perf_counter()
        results = []
        for output in outputs:
            produced_at = truncate_ms(self.clock.now_utc())
            if not output.ok:
                self.lake.put_model_error(
                    entry.recording_id,
                    output.model_id,
                    output.error,
                    output.error_detail or "",
                    produced_at,
                )
                continue
            publish_s = time.perf_counter() - publish_started
            if injected and injected.publish_s is not None:
                publish_s = injected.publish_s
            timings = StageTimings.from_stages(
                ACQUISITION_SECONDS, upload_s, pickup_s, inference_s, publish_s
            )
            result = PredictionResult.from_probability(
                recording_id=entry.recording_id,
                model_id=output.model_id,
                probability=output.probability,
                threshold=output.threshold,
                timings=timings,
                produced_at=produced_at,
            )
            self.lake.put_result(result)
            results.append(result)
        return results

    def _process_safely(self, entry: LakeEntry) -> None:
        try:
            self.process_entry(entry)
        except Exception as exc:  # worker isolation: one bad entry never stops the loop
            logger.exception("processing %s failed", entry.recording_id)
            try:
                self.lake.put_failure(
                    entry.recording_id, str(exc), truncate_ms(self.clock.now_utc())
                )
            except LakeError:
                logger.exception("could not record failure for %s", entry.recording_id)

    # -- loop ------------------------------------------------------------------

    def tick(self) -> int:
        """One poll cycle: collect feeds, poll the lake, drain the batch."""
        for collector in self.collectors:
            collector.collect()
        entries, new_cursor = self.poll_once(self.cursor)
        todo = [e for e in entries if e.recording_id not in self._processed]
        futures = []
        aborted = False
        for entry in todo:
            try:
                futures.append(self._executor.submit(self._process_safely, entry))
            except RuntimeError:
                # Shutdown closed the pool mid-batch: started entries finish,
                # the cursor stays put, and a restart re-polls the rest.
                aborted = True
                break
        wait_futures(futures)
        if aborted:
            return len(futures)
        self.cursor = new_cursor
        self.last_tick_at = self.clock.now_utc()
        self._persist_state()
        return len(todo)

    def run_loop(self) -> None:
        """Tick every poll_interval_s on the configured clock until shutdown."""
        while not self._stop.is_set():
            started = self.clock.now_s()
            self.tick()
            elapsed = self.clock.now_s() - started
            self.clock.wait(self._stop, self.config.poll_interval_s - elapsed)

    def shutdown(self, wait: bool = True) -> None:
        """Cooperative stop: the current batch drains, state persists."""
        self._stop.set()
        self._executor.shutdown(wait=wait)
        self._persist_state()

    @property
    def processed_count(self) -> int:
        return len(self._processed)
