"""Chosen-plaintext Flush+Reload attack on a first-round AES T-table lookup."""

from collections import Counter
from functools import partial
from typing import Iterable, Iterator, List, Optional

import numpy as np
import structlog

from zombie_cache_sim.attacks.models import SPY_CORE, VICTIM_CORE, AttackKind, AttackReport
from zombie_cache_sim.attacks.spy import Spy, VictimStep
from zombie_cache_sim.attacks.victim import TABLE_BASE, Victim, line_at
from zombie_cache_sim.exceptions import InvalidInputError
from zombie_cache_sim.hierarchy.simulator import HierarchySim

logger = structlog.get_logger(__name__)

TABLE_ENTRIES = 256
ENTRIES_PER_LINE = 16
TABLE_LINES = TABLE_ENTRIES // ENTRIES_PER_LINE
STATE_BYTES = 16


def run_aes_attack(
    sim: HierarchySim,
    k0: int,
    plaintexts_per_p0: int,
    *,
    p0_values: Iterable[int] = range(TABLE_ENTRIES),
    seed: int = 0,
    rounds: int = 10,
    warmup: bool = False,
    victim_core: int = VICTIM_CORE,
    spy_core: int = SPY_CORE,
    hit_threshold: Optional[int] = None,
    wait_interval: int = 1,
    spy_rounds: int = 0,
) -> AttackReport:
    """
    Fix p0, randomize the other plaintext bytes, and let the spy count which
    T-table lines the first round touched.

    Each encryption is one victim step: the 16 first-round lookups (entry
    p_i ^ k_i) fall inside the spy's window and the remaining rounds, with
    pseudorandom lookups, follow the reload. A round's hits are credited to
    the p0 of the encryption that closed it.

    Args:
        sim: Simulator
        k0: Secret key byte targeted by the attack
        plaintexts_per_p0: Encryptions per value of p0
        p0_values: Values of p0 to test
        seed: Seed for plaintexts, other key bytes and later-round lookups
        rounds: AES rounds per encryption
        warmup: Touch the whole table before the first flush
        victim_core: Core running the encryption
        spy_core: Core running the spy
        hit_threshold: Reload latency separating hit from miss
        wait_interval: Encryptions per flush-reload round
        spy_rounds: Flush-reload rounds the spy observes, 0 for all

    Returns:
        AttackReport with per-p0 hit counts and argmax line recovery
    """
    if not 0 <= k0 < TABLE_ENTRIES:
        raise InvalidInputError(f"k0 must be a byte, got {k0}")
    if plaintexts_per_p0 < 0:
        raise InvalidInputError("plaintexts_per_p0 must be non-negative")
    p0_list = list(p0_values)

    rng = np.random.default_rng(seed)
    key = rng.integers(0, TABLE_ENTRIES, size=STATE_BYTES)
    key[0] = k0

    table = [line_at(TABLE_BASE, i) for i in range(TABLE_LINES)]
    spy = Spy.for_sim(
        sim,
        table,
        core=spy_core,
        hit_threshold=hit_threshold,
        wait_interval=wait_interval,
        rounds=spy_rounds,
    )
    victim = Victim(sim, victim_core)
    if warmup:
        victim.warm(*table)

    log = logger.bind(mode=sim.mode.value, k0=k0, encryptions=plaintexts_per_p0)
    log.info("aes_attack_started", p0_count=len(p0_list))

    later = (rounds - 1) * STATE_BYTES

    def encryptions() -> Iterator[VictimStep]:
        for p0 in p0_list:
            plaintexts = rng.integers(0, TABLE_ENTRIES, size=(plaintexts_per_p0, STATE_BYTES))
            plaintexts[:, 0] = p0
            first_round = (plaintexts ^ key) // ENTRIES_PER_LINE
            later_lines = rng.integers(0, TABLE_LINES, size=(plaintexts_per_p0, later))
            for enc in range(plaintexts_per_p0):
                yield VictimStep(
                    window=partial(victim.touch_all, [table[line] for line in first_round[enc]]),
                    tail=partial(victim.touch_all, [table[line] for line in later_lines[enc]]),
                )

    hit_counts: List[List[int]] = [[0] * TABLE_LINES for _ in p0_list]
    for observation in spy.monitor(encryptions()):
        row = hit_counts[observation.last_step // plaintexts_per_p0]
        for line in observation.hit_indexes:
            row[line] += 1

    recovered = [int(np.argmax(row)) if any(row) else -1 for row in hit_counts]
    truth = [(p0 ^ k0) // ENTRIES_PER_LINE for p0 in p0_list]
    correct = sum(1 for got, want in zip(recovered, truth) if got == want)
    nibble_votes = Counter(line ^ (p0 >> 4) for p0, line in zip(p0_list, recovered) if line >= 0)
    nibble = nibble_votes.most_common(1)[0][0] if nibble_votes else -1

    report = AttackReport(
        kind=AttackKind.AES,
        mode=sim.mode,
        hit_counts=hit_counts,
        recovered_lines=recovered,
        recovered_bits=4 if nibble == k0 >> 4 else 0,
        accuracy=correct / len(p0_list) if p0_list else 0.0,
        spy_hits=spy.total_hits,
        victim_cycles=sim.stats.core(victim_core).cycles,
        spy_cycles=sim.stats.core(spy_core).cycles,
        metadata={
            "p0_values": p0_list,
            "k0": k0,
            "correct_p0": correct,
            "recovered_nibble": nibble,
            "victim_digest": victim.digest,
        },
    )
    normalize_heatmaps([report])
    log.info("aes_attack_completed", correct_p0=correct, spy_hits=report.spy_hits)
    return report


def normalize_heatmaps(reports: List[AttackReport]) -> int:
    """
    Scale AES hit counts of several runs to their shared maximum.

    Returns:
        The shared maximum hit count
    """
    peak = max((max(row) for r in reports for row in r.hit_counts if row), default=0)
    for report in reports:
        report.heatmap = [[count / peak if peak else 0.0 for count in row] for row in report.hit_counts]
    return peak


def max_mean_ratio(report: AttackReport) -> float:
    """Peak over mean hits per cell."""
    counts = np.asarray(report.hit_counts, dtype=float)
    if counts.size == 0 or counts.mean() == 0:
        return 0.0
    return float(counts.max() / counts.mean())
