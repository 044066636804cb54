"""Wall and simulated clocks.

The simulated clock makes polling latency deterministic and testable: time
advances only when someone sleeps or explicitly moves it, and the UTC view
is the epoch plus the virtual offset.
"""

import threading
import time
from datetime import datetime, timedelta, timezone


class WallClock:
    """Production clock: monotonic seconds, real UTC, real sleeping."""

    def now_s(self) -> float:
        return time.monotonic()

    def now_utc(self) -> datetime:
        return datetime.now(timezone.utc)

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            time.sleep(seconds)

    def wait(self, stop_event: threading.Event, seconds: float) -> None:
        stop_event.wait(timeout=max(seconds, 0.0))


SIM_EPOCH = datetime(2026, 1, 1, tzinfo=timezone.utc)


class SimulatedClock:
    """Virtual clock; sleep() advances instantly. Thread-safe."""

    def __init__(self, epoch: datetime = SIM_EPOCH, start_s: float = 0.0):
        self._epoch = epoch
        self._seconds = start_s
        self._lock = threading.Lock()

    def now_s(self) -> float:
        with self._lock:
            return self._seconds

    def now_utc(self) -> datetime:
        return self._epoch + timedelta(seconds=self.now_s())

    def advance(self, seconds: float) -> None:
        if seconds < 0:
            raise ValueError("cannot advance backwards")
        with self._lock:
            self._seconds += seconds

    def advance_to(self, seconds: float) -> None:
        with self._lock:
            if seconds < self._seconds:
                raise ValueError(
                    f"cannot move back from {self._seconds} to {seconds}"
                )
            self._seconds = seconds

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            self.advance(seconds)

    def wait(self, stop_event: threading.Event, seconds: float) -> None:
        self.sleep(seconds)
