"""Tests for the Prometheus metrics collector."""

import pytest

from zombie_cache_sim.hierarchy.models import MitigationMode
from zombie_cache_sim.metrics.collector import MetricsCollector

A = 0x4000


@pytest.fixture
def zbm_run(make_sim):
    """One zombie hit served as a dummy memory request."""
    sim = make_sim(MitigationMode.ZBM)
    sim.read(0, A)
    sim.clflush(1, A)
    sim.read(0, A)
    sim.read(1, A)
    return sim


@pytest.mark.unit
def test_exposition_counts_outcomes(zbm_run):
    """L3 outcomes, dummy requests and flushes are exported per mode."""
    collector = MetricsCollector()
    collector.record_stats("zbm", zbm_run.stats, "fr")
    text = collector.exposition()

    assert 'l3_accesses_total{mode="zbm",outcome="zombie_hit"} 1.0' in text
    assert 'l3_accesses_total{mode="zbm",outcome="zombie_miss"} 1.0' in text
    assert 'l3_accesses_total{mode="zbm",outcome="normal_miss"} 1.0' in text
    assert 'dummy_memory_requests_total{mode="zbm"} 1.0' in text
    assert 'flushes_total{mode="zbm",kind="all"} 1.0' in text
    assert 'zombie_evictions_total{mode="zbm"} 0.0' in text
    assert 'core_cycles{mode="zbm",workload="fr",core="0"}' in text


@pytest.mark.unit
def test_exposition_has_no_created_series(zbm_run):
    """Output is byte-stable: no creation timestamps."""
    collector = MetricsCollector()
    collector.record_stats("zbm", zbm_run.stats, "fr")
    collector.record_latency("zbm", 169)
    text = collector.exposition()

    assert "_created" not in text
    assert text == collector.exposition()


@pytest.mark.unit
def test_latency_histogram_and_alarms():
    collector = MetricsCollector()
    for latency in (24, 24, 169):
        collector.record_latency("zbm", latency)
    collector.record_alarms(2)
    text = collector.exposition()

    assert 'reload_latency_cycles_bucket{mode="zbm",le="40.0"} 2.0' in text
    assert 'reload_latency_cycles_count{mode="zbm"} 3.0' in text
    assert "adt_alarms_total 2.0" in text


@pytest.mark.unit
def test_collectors_are_independent():
    """Each collector owns its registry."""
    first, second = MetricsCollector(), MetricsCollector()
    first.record_alarms(3)

    assert "adt_alarms_total 3.0" in first.exposition()
    assert "adt_alarms_total 0.0" in second.exposition()


@pytest.mark.unit
def test_cycle_gauges_kept_per_workload(make_sim):
    """Runs recorded under different workloads do not overwrite each other."""
    collector = MetricsCollector()
    short, long = make_sim(), make_sim()
    short.read(0, A)
    for k in range(3):
        long.read(0, A + k * 64)

    collector.record_stats("baseline", short.stats, "short")
    collector.record_stats("baseline", long.stats, "long")
    text = collector.exposition()

    assert 'core_cycles{mode="baseline",workload="short",core="0"} 185.0' in text
    assert 'core_cycles{mode="baseline",workload="long",core="0"} 555.0' in text
    assert 'l3_accesses_total{mode="baseline",outcome="normal_miss"} 4.0' in text
