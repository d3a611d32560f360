"""Flush+Flush latency probe."""

from typing import List, Tuple

from zombie_cache_sim.attacks.victim import FILLER_BASE, line_at
from zombie_cache_sim.hierarchy.simulator import HierarchySim

FLUSH_SETTINGS = ("variable", "constant", "zombie_gated")
LINE_STATES = ("resident", "absent", "invalid_zombie", "valid_zombie")


def _settings_update(setting: str) -> dict:
    return {
        "constant_time_flush": setting == "constant",
        "zombie_gated_flush": setting == "zombie_gated",
    }


def _flush_latency(sim: HierarchySim, state: str, addr: int) -> int:
    flusher = 0
    # ZBMx clears Z when the flushing core reloads, so another core re-reads.
    other = 1 if sim.config.num_cores > 1 else 0
    if state == "resident":
        sim.read(flusher, addr)
    elif state == "invalid_zombie":
        sim.read(flusher, addr)
        sim.clflush(flusher, addr)
    elif state == "valid_zombie":
        sim.read(flusher, addr)
        sim.clflush(flusher, addr)
        sim.read(other, addr)
    return sim.clflush(flusher, addr)


def run_flushflush_probe(sim: HierarchySim) -> List[Tuple[str, str, int]]:
    """
    Measure clflush latency per line state under each flush-latency setting.

    The sim's configuration (mode, geometry, latencies) is reused; each
    setting gets a fresh machine so earlier probes leave no state behind.

    Returns:
        Rows of (setting, line_state, latency)
    """
    rows = []
    for setting in FLUSH_SETTINGS:
        config = sim.config.model_copy(update=_settings_update(setting))
        probe = HierarchySim(config)
        for i, state in enumerate(LINE_STATES):
            latency = _flush_latency(probe, state, line_at(FILLER_BASE, 4096 + i))
            rows.append((setting, state, latency))
    return rows


def channel_open(rows: List[Tuple[str, str, int]], setting: str) -> bool:
    """Whether resident and absent lines flush at different latencies."""
    latency = {state: value for s, state, value in rows if s == setting}
    return latency["resident"] != latency["absent"]
