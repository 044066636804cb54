"""Full platform over real sockets: a Kardia-like simulator serves records,
the collector polls it, a watch export is POSTed to the HTTP API, the
pipeline scores everything on a short wall-clock interval, and the results
become visible through the API.

Run: python demos/06_full_platform.py
"""

import tempfile
import threading
import time
from pathlib import Path

import httpx
import uvicorn

from ecgflow.api import create_app
from ecgflow.clock import WallClock
from ecgflow.core import DeviceKind
from ecgflow.lake import DataLake
from ecgflow.models.fixtures import write_default_registry
from ecgflow.pipeline import FeedCollector, Pipeline, PipelineConfig
from ecgflow.simulators import (
    HttpFeedClient,
    ScheduledFeed,
    ScheduledRecord,
    SyntheticEcgSpec,
    emit_watch_export,
    make_feed_app,
)

API_PORT = 8123
SIM_PORT = 8124
POLL_INTERVAL_S = 2.0


def start_server(app, port):
    server = uvicorn.Server(
        uvicorn.Config(app, host="127.0.0.1", port=port, log_level="warning")
    )
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    while not server.started:
        time.sleep(0.02)
    return server, thread


with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    clock = WallClock()
    lake = DataLake(tmp / "lake")
    descriptors, _ = write_default_registry(tmp / "models")

    feed = ScheduledFeed(
        DeviceKind.KARDIA,
        [ScheduledRecord(emit_at_s=0.5, spec=SyntheticEcgSpec(seed=11))],
        clock,
    )
    sim_server, sim_thread = start_server(make_feed_app(feed), SIM_PORT)
    print(f"kardia simulator listening on :{SIM_PORT}")

    collector = FeedCollector(
        DeviceKind.KARDIA,
        HttpFeedClient(f"http://127.0.0.1:{SIM_PORT}"),
        lake,
        clock,
        external_id="kardia-device-1",
    )
    pipeline = Pipeline(
        lake,
        PipelineConfig(model_registry=descriptors, poll_interval_s=POLL_INTERVAL_S),
        clock=clock,
        collectors=[collector],
    )
    loop_thread = threading.Thread(target=pipeline.run_loop, daemon=True)
    loop_thread.start()

    api_server, api_thread = start_server(
        create_app(lake, pipeline=pipeline, clock=clock), API_PORT
    )
    base = f"http://127.0.0.1:{API_PORT}"
    print(f"platform API listening on :{API_PORT} (poll interval {POLL_INTERVAL_S}s)")

    _, _, response = emit_watch_export(
        SyntheticEcgSpec(seed=12),
        recorded_at=clock.now_utc(),
        post_url=f"{base}/v1/recordings",
        external_id="watch-owner-1",
    )
    print(f"watch POST -> {response.status_code} {response.json()}")

    deadline = time.monotonic() + 30.0
    with httpx.Client(timeout=5.0) as http:
        while time.monotonic() < deadline:
            entries = http.get(f"{base}/v1/recordings").json()["entries"]
            if len(entries) >= 2 and all(e["status"] == "done" for e in entries):
                break
            time.sleep(0.3)
        print(f"\nlake holds {len(entries)} recordings:")
        for e in entries:
            results = http.get(f"{base}/v1/results/{e['recording_id']}").json()
            probs = {m["model_id"]: round(m["probability"], 4) for m in results["models"]}
            total = results["models"][0]["timings"]["total_s"] if results["models"] else None
            print(f"  {e['device']:12s} {e['status']:7s} {probs} total {total:.2f}s")
        health = http.get(f"{base}/v1/health").json()
        print(f"\nhealth: {health['status']}, poller alive={health['poller']['alive']}")

    pipeline.shutdown()
    api_server.should_exit = True
    sim_server.should_exit = True
    api_thread.join(timeout=5)
    sim_thread.join(timeout=5)
    print("shut down cleanly")
