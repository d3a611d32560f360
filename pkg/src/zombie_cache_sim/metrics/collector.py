"""Prometheus metrics collector."""

from typing import Optional

from prometheus_client import CollectorRegistry, Counter, Gauge, Histogram, disable_created_metrics, generate_latest

from zombie_cache_sim.hierarchy.models import StatsCounters

# Buckets bracket private hits, L3 hits and memory accesses.
LATENCY_BUCKETS = [4, 16, 40, 185, 400]

# Exposition output must be byte-stable across identical runs.
disable_created_metrics()


class MetricsCollector:
    """Metrics for one simulator run, kept in a private registry."""

    def __init__(self, registry: Optional[CollectorRegistry] = None):
        """
        Initialize collector.

        Args:
            registry: Registry to register into (default: a fresh one)
        """
        self.registry = registry or CollectorRegistry()

        # L3 metrics
        self.l3_accesses_total = Counter(
            "l3_accesses_total",
            "Total number of L3 accesses",
            ["mode", "outcome"],  # outcome: normal_hit, normal_miss, zombie_hit, zombie_miss
            registry=self.registry,
        )
        self.dummy_memory_requests_total = Counter(
            "dummy_memory_requests_total",
            "Memory requests issued only to delay zombie hits",
            ["mode"],
            registry=self.registry,
        )
        self.l3_evictions_total = Counter(
            "l3_evictions_total",
            "Total number of L3 evictions",
            ["mode"],
            registry=self.registry,
        )
        self.zombie_evictions_total = Counter(
            "zombie_evictions_total",
            "Zombie lines removed by natural eviction",
            ["mode"],
            registry=self.registry,
        )

        # Flush metrics
        self.flushes_total = Counter(
            "flushes_total",
            "Total number of clflush operations",
            ["mode", "kind"],  # kind: all, zombie
            registry=self.registry,
        )

        # Detection metrics
        self.adt_alarms_total = Counter(
            "adt_alarms_total",
            "Total number of attack detection alarms",
            registry=self.registry,
        )

        # Timing metrics
        self.core_cycles = Gauge(
            "core_cycles",
            "Cycles accumulated per core",
            ["mode", "workload", "core"],
            registry=self.registry,
        )
        self.reload_latency_cycles = Histogram(
            "reload_latency_cycles",
            "Latency of sampled reloads in cycles",
            ["mode"],
            buckets=LATENCY_BUCKETS,
            registry=self.registry,
        )

    def record_stats(self, mode: str, stats: StatsCounters, workload: str) -> None:
        """
        Export the counters of a finished run.

        Counters add up across calls; cycle gauges are kept per workload.

        Args:
            mode: Mitigation mode label
            stats: Counters from the simulator
            workload: Workload or experiment the counters came from
        """
        total = stats.total
        for outcome, value in (
            ("normal_hit", total.normal_hits),
            ("normal_miss", total.normal_misses),
            ("zombie_hit", total.zombie_hits),
            ("zombie_miss", total.zombie_misses),
        ):
            self.l3_accesses_total.labels(mode=mode, outcome=outcome).inc(value)
        self.dummy_memory_requests_total.labels(mode=mode).inc(total.dummy_memory_requests)
        self.l3_evictions_total.labels(mode=mode).inc(stats.l3_evictions)
        self.zombie_evictions_total.labels(mode=mode).inc(stats.zombie_evictions)
        self.flushes_total.labels(mode=mode, kind="all").inc(total.flushes)
        self.flushes_total.labels(mode=mode, kind="zombie").inc(total.flushes_on_zombies)
        for core, counters in sorted(stats.per_core.items()):
            self.core_cycles.labels(mode=mode, workload=workload, core=str(core)).set(counters.cycles)

    def record_alarms(self, count: int) -> None:
        """
        Record detection alarms.

        Args:
            count: Number of alarms raised
        """
        self.adt_alarms_total.inc(count)

    def record_latency(self, mode: str, latency: int) -> None:
        self.reload_latency_cycles.labels(mode=mode).observe(latency)

    def exposition(self) -> str:
        """Text exposition format of the registry."""
        return generate_latest(self.registry).decode("utf-8")
