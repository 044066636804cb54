"""Timing trials: reproduce the published end-to-end latency arithmetic in
injected mode, then measure this implementation honestly in wall mode.

Run: python demos/05_time_trials.py
Equivalent CLI: ecgbench trials --device kardia --n 5 --mode injected
"""

from ecgflow.bench import run_time_trials
from ecgflow.core import DeviceKind

for device in (DeviceKind.KARDIA, DeviceKind.APPLE_WATCH):
    report = run_time_trials(device, n=5, mode="injected")
    print(report.to_markdown())

print("wall mode (simulated clock, seeded uniform arrivals, 20 trials):")
report = run_time_trials(DeviceKind.KARDIA, n=20, mode="wall", seed=5)
means = report.stage_means
print(f"  mean pickup {means['pickup_s']:.2f}s (poll interval 30 s -> expectation ~15 s)")
print(f"  mean inference {means['inference_s'] * 1000:.1f} ms, "
      f"mean publish {means['publish_s'] * 1000:.2f} ms at desk scale")
print(f"  mean total {means['total_s']:.2f}s")
