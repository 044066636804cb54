"""Console entry points: ecgsim (device simulators) and ecgbench (timing trials)."""

import argparse
import json
import sys
from pathlib import Path

from ecgflow.clock import SIM_EPOCH, WallClock
from ecgflow.core import BadRequest, DeviceKind
from ecgflow.simulators import (
    ScheduledFeed,
    ScheduledRecord,
    SyntheticEcgSpec,
    emit_watch_export,
    make_feed_app,
)

DEFAULT_SCHEDULE_COUNT = 20
DEFAULT_SCHEDULE_SPACING_S = 30.0
DEFAULT_SCHEDULE_START_S = 5.0


def load_schedule(path: Path | None, seed: int) -> list[ScheduledRecord]:
    """Read a schedule file ({"records": [{"emit_at_s", "seed", ...}]}) or
    build the default steady schedule."""
    if path is None:
        return [
            ScheduledRecord(
                emit_at_s=DEFAULT_SCHEDULE_START_S + i * DEFAULT_SCHEDULE_SPACING_S,
                spec=SyntheticEcgSpec(seed=seed + i),
            )
            for i in range(DEFAULT_SCHEDULE_COUNT)
        ]
    data = json.loads(Path(path).read_text())
    records = []
    for i, item in enumerate(data["records"]):
        spec_fields = {k: v for k, v in item.items() if k != "emit_at_s"}
        spec_fields.setdefault("seed", seed + i)
        records.append(
            ScheduledRecord(emit_at_s=float(item["emit_at_s"]), spec=SyntheticEcgSpec(**spec_fields))
        )
    return records


def build_feed(device: DeviceKind, schedule_path: Path | None, seed: int) -> ScheduledFeed:
    return ScheduledFeed(device, load_schedule(schedule_path, seed), WallClock())


def _serve_feed(device: DeviceKind, args) -> int:
    import uvicorn

    feed = build_feed(device, args.schedule, args.seed)
    app = make_feed_app(feed)
    print(f"serving {device.value} simulator on {args.host}:{args.port}", file=sys.stderr)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def ecgsim_main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ecgsim", description="Local stand-ins for the vendor ECG ecosystems."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("kardia", "fitbit"):
        p = sub.add_parser(name, help=f"serve a {name}-like query API")
        p.add_argument("--port", type=int, default=8100 if name == "kardia" else 8101)
        p.add_argument("--host", default="127.0.0.1")
        p.add_argument("--seed", type=int, default=1)
        p.add_argument("--schedule", type=Path, default=None, help="schedule JSON file")

    w = sub.add_parser("watch", help="emit watch XML exports")
    w.add_argument("--out", type=Path, default=None, help="inbox directory for .ecg.xml files")
    w.add_argument("--post", default=None, help="ingest URL to POST exports to")
    w.add_argument("--seed", type=int, default=1)
    w.add_argument("--count", type=int, default=1)
    w.add_argument("--external-id", default="watch-owner-1")
    w.add_argument("--flat", action="store_true", help="emit flat-line signals")

    args = parser.parse_args(argv)
    if args.command in ("kardia", "fitbit"):
        return _serve_feed(DeviceKind.parse(args.command), args)

    if args.out is None and args.post is None:
        parser.error("watch requires --out and/or --post")
    status = 0
    for i in range(args.count):
        spec = SyntheticEcgSpec(seed=args.seed + i, flat=args.flat)
        # recorded_at derives from the seed so repeated runs are bit-exact
        payload, written, response = emit_watch_export(
            spec,
            recorded_at=SIM_EPOCH,
            out_dir=args.out,
            post_url=args.post,
            external_id=args.external_id,
        )
        if written:
            print(written)
        if response is not None:
            body = response.json()
            print(f"POST {response.status_code} {json.dumps(body)}")
            if response.status_code not in (200, 201):
                status = 1
    return status


def ecgbench_main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ecgbench", description="End-to-end latency trials for the platform."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    t = sub.add_parser("trials", help="run acquire->publish timing trials")
    t.add_argument("--device", choices=["kardia", "watch", "fitbit"], required=True)
    t.add_argument("--n", type=int, default=5)
    t.add_argument("--mode", choices=["injected", "wall"], default="injected")
    t.add_argument("--report", type=Path, default=None, help="write out.json or out.md")
    t.add_argument("--interval", type=float, default=30.0, help="poll interval seconds")
    t.add_argument("--seed", type=int, default=7)

    args = parser.parse_args(argv)
    from ecgflow.bench import run_time_trials, write_report

    device = DeviceKind.parse(args.device)
    try:
        report = run_time_trials(
            device, n=args.n, mode=args.mode, poll_interval_s=args.interval, seed=args.seed
        )
    except BadRequest as exc:
        parser.error(str(exc))
    if args.report is not None:
        write_report(report, args.report)
        print(f"wrote {args.report}")
    else:
        print(report.to_markdown())
    return 0 if report.failed_count == 0 else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(ecgsim_main())
