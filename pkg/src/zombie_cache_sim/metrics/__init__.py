"""Metrics collection for simulator runs."""

from zombie_cache_sim.metrics.collector import MetricsCollector

__all__ = ["MetricsCollector"]
