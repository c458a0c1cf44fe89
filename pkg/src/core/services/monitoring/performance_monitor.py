"""
Run timing for zeno-scissors commands.

Each CLI run records the wall-clock time of its heavy phases (cascade rows,
verification grid) and of the whole command; the totals are logged on the
``performance`` logger when the command finishes.
"""

import logging
import time
from collections import defaultdict, deque
from contextlib import contextmanager
from dataclasses import dataclass
from datetime import datetime
from typing import Any, Deque, Dict, Iterator, Optional

# Samples kept per metric name
HISTORY_LENGTH = 1000


@dataclass
class PerformanceMetric:
    """One timing or count sample."""
    name: str
    value: float
    unit: str
    timestamp: datetime
    tags: Dict[str, str]


class PerformanceMonitor:
    """Collects phase and command timings of simulator runs."""

    def __init__(self, slow_command_seconds: float = 120.0):
        self.logger = logging.getLogger("performance")
        self.samples: Dict[str, Deque[PerformanceMetric]] = defaultdict(lambda: deque(maxlen=HISTORY_LENGTH))
        self.slow_command_seconds = slow_command_seconds

    def record_metric(self, name: str, value: float, unit: str, tags: Optional[Dict[str, str]] = None):
        """Store a sample under ``name``."""
        self.samples[name].append(PerformanceMetric(name, float(value), unit, datetime.now(), tags or {}))

    @contextmanager
    def track(self, phase: str, **tags: Any) -> Iterator[None]:
        """Time a phase of a run; recorded in seconds even when the phase raises."""
        start = time.perf_counter()
        try:
            yield
        finally:
            elapsed = time.perf_counter() - start
            self.record_metric(phase, elapsed, "seconds", {k: str(v) for k, v in tags.items()})
            self.logger.debug(f"{phase}: {elapsed:.3f}s")

    def track_command(self, command: str, duration: float, rows: int):
        """Record a finished command with the number of CSV rows it emitted."""
        self.record_metric("command_duration", duration, "seconds", {"command": command})
        self.record_metric("rows_emitted", rows, "rows", {"command": command})
        rate = rows / duration if duration > 0 else 0.0
        self.logger.info(f"{command}: {rows} rows in {duration:.3f}s ({rate:.1f} rows/s)")
        if duration > self.slow_command_seconds:
            self.logger.warning(f"{command} took {duration:.1f}s, over {self.slow_command_seconds:.0f}s; "
                                f"consider --workers or a coarser --N-range")

    def get_metrics_summary(self) -> Dict[str, Any]:
        """Latest, mean, min, max and count per metric name."""
        summary = {}
        for name, samples in self.samples.items():
            if not samples:
                continue
            values = [sample.value for sample in samples]
            summary[name] = {
                "current": values[-1],
                "average": sum(values) / len(values),
                "min": min(values),
                "max": max(values),
                "count": len(values),
            }
        return summary


# Global instance
performance_monitor = PerformanceMonitor()
