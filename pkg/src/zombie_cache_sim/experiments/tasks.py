"""Experiment tasks: one function per experiment kind."""

from typing import Dict, Optional

import numpy as np
import structlog

from zombie_cache_sim.attacks.aes import max_mean_ratio, run_aes_attack
from zombie_cache_sim.attacks.covert import run_covert_channel
from zombie_cache_sim.attacks.function_watcher import run_function_watcher
from zombie_cache_sim.attacks.rsa import every_eighth_bit_key, run_rsa_attack
from zombie_cache_sim.config import Settings
from zombie_cache_sim.experiments import reports
from zombie_cache_sim.experiments.flushflush import channel_open, run_flushflush_probe
from zombie_cache_sim.experiments.scenario import Scenario, build_sim
from zombie_cache_sim.experiments.state import ExperimentOutput
from zombie_cache_sim.hierarchy.models import MitigationMode
from zombie_cache_sim.hierarchy.simulator import HierarchySim
from zombie_cache_sim.metrics.collector import MetricsCollector
from zombie_cache_sim.model.analytic import ModelParams, default_grid, l3lat_zbm, sweep
from zombie_cache_sim.model.workloads import (
    benign_suite,
    flush_heavy_suite,
    flush_reload_workload,
    measure_l3lat,
    run_workload,
)

logger = structlog.get_logger(__name__)

# Cores used by the model cross-check workload.
CROSS_CHECK_CORES = 3


def _attack_kwargs(scenario: Scenario) -> Dict[str, Optional[int]]:
    return {
        "victim_core": scenario.option("victim.core", 0),
        "spy_core": scenario.option("spy.core", 1),
        "hit_threshold": scenario.option("spy.threshold"),
        "wait_interval": scenario.option("spy.wait_interval", 1),
        "spy_rounds": scenario.option("spy.rounds", 0),
    }


def _collector(settings: Settings) -> Optional[MetricsCollector]:
    return MetricsCollector() if settings.ENABLE_METRICS else None


def _attach_run(
    output: ExperimentOutput, sim: HierarchySim, collector: Optional[MetricsCollector], workload: str
) -> ExperimentOutput:
    """Carry alarms, run log and metrics of a finished simulator into the output."""
    if sim.detector is not None:
        output.alarms = list(sim.detector.alarms)
    output.run_log = list(sim.run_log)
    if collector is not None:
        collector.record_stats(sim.mode.value, sim.stats, workload)
        collector.record_alarms(len(output.alarms))
        output.metrics_text = collector.exposition()
    return output


def run_aes(scenario: Scenario, settings: Settings) -> ExperimentOutput:
    """
    First-round AES T-table attack.

    Rows are normalized to this run's own peak; the runner re-normalizes
    all AES scenarios of a batch to their shared peak.
    """
    sim = build_sim(scenario, settings)
    default_encryptions = settings.PAPER_AES_ENCRYPTIONS if scenario.paper_scale else settings.DESK_AES_ENCRYPTIONS
    report = run_aes_attack(
        sim,
        k0=scenario.option("aes.k0", scenario.seed % 256),
        plaintexts_per_p0=scenario.option("aes.encryptions", default_encryptions),
        p0_values=range(0, 256, scenario.option("aes.p0_step", 1)),
        seed=scenario.seed,
        rounds=scenario.option("aes.rounds", 10),
        warmup=scenario.option("aes.warmup", False),
        **_attack_kwargs(scenario),
    )
    output = ExperimentOutput(
        header=reports.AES_HEADER,
        rows=reports.aes_rows(report),
        headline=f"{report.headline()} max_mean={max_mean_ratio(report):.2f}",
        report=report,
        svg=reports.render_heatmap_svg(report, f"{scenario.name} ({scenario.mode.value})"),
    )
    return _attach_run(output, sim, _collector(settings), scenario.experiment.value)


def run_rsa(scenario: Scenario, settings: Settings) -> ExperimentOutput:
    """Square-and-multiply attack on an every-8th-bit key."""
    sim = build_sim(scenario, settings)
    key = every_eighth_bit_key(scenario.option("rsa.bits", settings.RSA_KEY_BITS))
    report = run_rsa_attack(
        sim,
        key,
        filler_lines=scenario.option("rsa.filler_lines", 8),
        warmup=scenario.option("rsa.warmup", True),
        **_attack_kwargs(scenario),
    )
    output = ExperimentOutput(
        header=reports.RSA_HEADER,
        rows=list(report.timeline),
        headline=report.headline(),
        report=report,
    )
    return _attach_run(output, sim, _collector(settings), scenario.experiment.value)


def run_fw(scenario: Scenario, settings: Settings) -> ExperimentOutput:
    """Function watcher over four entry points."""
    sim = build_sim(scenario, settings)
    report = run_function_watcher(
        sim,
        scenario.option("fw.calls", settings.FW_CALLS),
        instructions_per_function=scenario.option("fw.instructions", 5000),
        seed=scenario.seed,
        warmup=scenario.option("fw.warmup", True),
        **_attack_kwargs(scenario),
    )
    output = ExperimentOutput(
        header=reports.FW_HEADER,
        rows=reports.fw_rows(report),
        headline=report.headline(),
        report=report,
        svg=reports.render_confusion_svg(report, f"{scenario.name} ({scenario.mode.value})"),
    )
    return _attach_run(output, sim, _collector(settings), scenario.experiment.value)


def run_covert(scenario: Scenario, settings: Settings) -> ExperimentOutput:
    """Covert channel carrying seeded random bits."""
    sim = build_sim(scenario, settings)
    count = scenario.option("covert.bits", settings.COVERT_BITS)
    bits = [int(b) for b in np.random.default_rng(scenario.seed).integers(0, 2, size=count)]
    kwargs = _attack_kwargs(scenario)
    report = run_covert_channel(sim, bits, trojan_core=kwargs.pop("victim_core"), **kwargs)
    output = ExperimentOutput(
        header=reports.COVERT_HEADER,
        rows=[(i, sent, got) for i, (sent, got) in enumerate(zip(report.sent_bits, report.decoded_bits))],
        headline=report.headline(),
        report=report,
    )
    return _attach_run(output, sim, _collector(settings), scenario.experiment.value)


def run_model_sweep(scenario: Scenario, settings: Settings) -> ExperimentOutput:
    """
    Sweep the latency model over F and R.

    Under zbm the model is also cross-checked against a simulated workload
    at F = R = 0.5.
    """
    sim = build_sim(scenario, settings)
    params = ModelParams(
        alpha=scenario.option("model.alpha", 0.5),
        t_c=scenario.option("model.t_c", sim.config.l3.hit_latency),
        t_m=scenario.option("model.t_m", sim.config.mem_latency),
        mem_time_fraction=scenario.option("model.mem_time_fraction", 0.5),
    )
    grid = default_grid(scenario.option("model.step", 0.1))
    rows = sweep(grid, grid, params)
    worst = max((row.slowdown for row in rows), default=1.0)
    headline = f"max_l3lat_norm={max((r.l3lat_norm for r in rows), default=1.0):.4f} max_slowdown={worst:.4f}"
    metadata: Dict[str, float] = {}

    collector = _collector(settings)
    if scenario.mode == MitigationMode.ZBM and sim.config.num_cores >= CROSS_CHECK_CORES:
        ops = flush_reload_workload(
            params.alpha, 0.5, 0.5, accesses=scenario.option("model.accesses", 2000), seed=scenario.seed
        )
        result = run_workload(sim, ops, name="cross_check")
        measured = measure_l3lat(result)
        predicted = l3lat_zbm(params.model_copy(update={"F": 0.5, "R": 0.5}))
        metadata = {"measured_l3lat": measured, "predicted_l3lat": predicted}
        headline += f" sim/model={measured / predicted:.4f}"
        if collector is not None:
            for latency in result.measured_latencies:
                collector.record_latency(sim.mode.value, latency)
        logger.info("model_cross_check", measured=measured, predicted=predicted)

    output = ExperimentOutput(
        header=reports.SWEEP_HEADER,
        rows=[row.as_row() for row in rows],
        headline=headline,
        metadata=metadata,
    )
    return _attach_run(output, sim, collector, scenario.experiment.value)


def run_benign(scenario: Scenario, settings: Settings) -> ExperimentOutput:
    """Run the selected synthetic workloads, each on a fresh machine."""
    suite = scenario.option("benign.suite", "benign")
    num_cores = scenario.option("cores", 8)
    workloads = {}
    if suite in ("benign", "all"):
        workloads.update(benign_suite(num_cores))
    if suite in ("flush_heavy", "all"):
        workloads.update(flush_heavy_suite(num_cores))

    collector = _collector(settings)
    output = ExperimentOutput(header=reports.BENIGN_HEADER)
    zombie_hits = 0
    alarms = 0
    for name, make_ops in workloads.items():
        sim = build_sim(scenario, settings)
        result = run_workload(sim, make_ops(), name=name)
        total = result.stats.total
        output.rows.append(
            (name, scenario.mode.value, result.total_cycles, total.zombie_hits, total.zombie_misses, result.alarms)
        )
        if sim.detector is not None:
            output.alarms.extend(sim.detector.alarms)
        output.run_log.extend(sim.run_log)
        if collector is not None:
            collector.record_stats(sim.mode.value, sim.stats, name)
        zombie_hits += total.zombie_hits
        alarms += result.alarms

    if collector is not None:
        collector.record_alarms(alarms)
        output.metrics_text = collector.exposition()
    cycles = {row[0]: row[2] for row in output.rows}
    output.headline = f"zombie_hits={zombie_hits} alarms={alarms} cycles={cycles}"
    return output


def run_flushflush(scenario: Scenario, settings: Settings) -> ExperimentOutput:
    """Flush latency per line state and flush-latency setting."""
    sim = build_sim(scenario, settings)
    rows = run_flushflush_probe(sim)
    states = " ".join(
        f"{setting}={'open' if channel_open(rows, setting) else 'closed'}"
        for setting in dict.fromkeys(row[0] for row in rows)
    )
    return ExperimentOutput(header=reports.FLUSHFLUSH_HEADER, rows=rows, headline=states)
