"""Platform configuration file (JSON).

Recognized keys:

    lake.root                                   lake directory (default ./lake-data)
    dsp.baseline_window_s                       default 0.6
    dsp.window_policy                           central | first
    pipeline.poll_interval_s                    default 30
    pipeline.workers                            default 2
    pipeline.models[]                           model descriptors (model_id, kind,
                                                weight_file, threshold); paths are
                                                relative to the config file
    pipeline.clock                              real | simulated
    pipeline.state_path                         cursor persistence file
    pipeline.injected_delays.{pickup,inference,publish}_s
    api.listen                                  host:port, default 127.0.0.1:8080
    feeds.{kardia,fitbit}.{url,external_id}     vendor feeds to poll (optional)
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

from ecgflow.core import DomainError
from ecgflow.models.registry import ModelDescriptor
from ecgflow.pipeline import InjectedDelays
from ecgflow.preprocess import DspConfig


@dataclass(frozen=True)
class FeedConfig:
    url: str
    external_id: str


@dataclass
class PlatformConfig:
    lake_root: Path
    dsp: DspConfig = field(default_factory=DspConfig)
    poll_interval_s: float = 30.0
    workers: int = 2
    model_descriptors: list[ModelDescriptor] = field(default_factory=list)
    clock_kind: str = "real"
    state_path: Path | None = None
    injected_delays: InjectedDelays | None = None
    api_listen: str = "127.0.0.1:8080"
    feeds: dict[str, FeedConfig] = field(default_factory=dict)

    @property
    def api_host(self) -> str:
        return self.api_listen.rsplit(":", 1)[0]

    @property
    def api_port(self) -> int:
        return int(self.api_listen.rsplit(":", 1)[1])


def load_config(path: Path) -> PlatformConfig:
    path = Path(path)
    data = json.loads(path.read_text())
    base = path.parent

    def resolve(p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else base / p

    dsp_data = data.get("dsp", {})
    dsp = DspConfig(
        baseline_window_s=float(dsp_data.get("baseline_window_s", 0.6)),
        window_policy=dsp_data.get("window_policy", "central"),
    )

    pipe = data.get("pipeline", {})
    clock_kind = pipe.get("clock", "real")
    if clock_kind not in ("real", "simulated"):
        raise DomainError(f"pipeline.clock must be real|simulated, got {clock_kind!r}")
    descriptors = [
        ModelDescriptor(
            model_id=m["model_id"],
            kind=m["kind"],
            weight_file=resolve(m["weight_file"]),
            threshold=float(m.get("threshold", 0.5)),
        )
        for m in pipe.get("models", [])
    ]
    injected = None
    if "injected_delays" in pipe:
        d = pipe["injected_delays"]
        injected = InjectedDelays(
            pickup_s=d.get("pickup_s"),
            inference_s=d.get("inference_s"),
            publish_s=d.get("publish_s"),
        )

    feeds = {
        name: FeedConfig(url=f["url"], external_id=f.get("external_id", f"{name}-device-1"))
        for name, f in data.get("feeds", {}).items()
    }

    lake_root = resolve(data.get("lake", {}).get("root", "lake-data"))
    state_path = pipe.get("state_path")
    return PlatformConfig(
        lake_root=lake_root,
        dsp=dsp,
        poll_interval_s=float(pipe.get("poll_interval_s", 30.0)),
        workers=int(pipe.get("workers", 2)),
        model_descriptors=descriptors,
        clock_kind=clock_kind,
        state_path=resolve(state_path) if state_path else None,
        injected_delays=injected,
        api_listen=data.get("api", {}).get("listen", "127.0.0.1:8080"),
        feeds=feeds,
    )
