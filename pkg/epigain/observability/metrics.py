"""Metrics collection for observability."""

import time
from contextlib import contextmanager
from pathlib import Path
from typing import Dict, Iterator, Optional

from prometheus_client import CollectorRegistry, Counter, Histogram, generate_latest


class MetricsCollector:
    """
    Metrics collector using Prometheus.

    Each collector owns its registry, so several sweeps in one process never
    collide on metric names.
    """

    def __init__(self, registry: Optional[CollectorRegistry] = None):
        self.registry = registry or CollectorRegistry()

        self.sweep_cells = Counter(
            'epigain_sweep_cells_total',
            'Sweep cells evaluated',
            ['status'],
            registry=self.registry,
        )

        self.sweep_cell_duration = Histogram(
            'epigain_sweep_cell_seconds',
            'Wall time spent assembling one sweep cell',
            registry=self.registry,
        )

        self.optimizer_runs = Counter(
            'epigain_optimizer_runs_total',
            'Bounded maximizations run per objective',
            ['objective', 'status'],
            registry=self.registry,
        )

    def increment(self, metric_name: str, tags: Optional[Dict[str, str]] = None) -> None:
        """Increment a counter metric."""
        if metric_name == "sweep.cells":
            self.sweep_cells.labels(**tags or {}).inc()
        elif metric_name == "optimizer.runs":
            self.optimizer_runs.labels(**tags or {}).inc()
        else:
            raise KeyError(f"Unknown counter '{metric_name}'")

    def observe(self, metric_name: str, value: float) -> None:
        """Record one observation on a histogram metric."""
        if metric_name == "sweep.cell_time":
            self.sweep_cell_duration.observe(value)
        else:
            raise KeyError(f"Unknown histogram '{metric_name}'")

    @contextmanager
    def timer(self, metric_name: str) -> Iterator[None]:
        """Context manager for timing operations."""
        start_time = time.perf_counter()
        try:
            yield
        finally:
            self.observe(metric_name, time.perf_counter() - start_time)

    def value(self, metric_name: str, tags: Optional[Dict[str, str]] = None) -> float:
        """Read back the current value of a counter sample."""
        names = {
            "sweep.cells": "epigain_sweep_cells_total",
            "optimizer.runs": "epigain_optimizer_runs_total",
        }
        sample = self.registry.get_sample_value(names[metric_name], tags or {})
        return sample or 0.0

    def export(self) -> bytes:
        """Render the registry in the Prometheus text exposition format."""
        return generate_latest(self.registry)

    def write(self, path: Path) -> None:
        """Write the text exposition to a file."""
        Path(path).write_bytes(self.export())
