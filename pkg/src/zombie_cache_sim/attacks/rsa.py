"""Flush+Reload on square-and-multiply exponentiation."""

from functools import partial
from typing import Iterator, List, Optional, Sequence, Tuple

import structlog

from zombie_cache_sim.attacks.models import SPY_CORE, VICTIM_CORE, AttackKind, AttackReport
from zombie_cache_sim.attacks.spy import Spy, VictimStep
from zombie_cache_sim.attacks.victim import CODE_BASE, FILLER_BASE, Victim, line_at
from zombie_cache_sim.exceptions import InvalidInputError
from zombie_cache_sim.hierarchy.simulator import HierarchySim

logger = structlog.get_logger(__name__)

SQR = "SQR"
MUL = "MUL"
MIN_KEY_BITS = 8

SQR_ADDR = line_at(CODE_BASE, 0)
MUL_ADDR = line_at(CODE_BASE, 64)


def every_eighth_bit_key(bits: int) -> List[int]:
    """Key whose every 8th bit is 1 and all others 0."""
    return [1 if i % 8 == 7 else 0 for i in range(bits)]


def decode_timeline(timeline: Sequence[Tuple[int, str]]) -> List[int]:
    """
    Turn an ordered spy-hit timeline into key bits.

    A SQR hit followed by a MUL hit is a 1; a SQR hit followed by another SQR
    hit (or nothing) is a 0. Repeated MUL hits are collapsed first.
    """
    probes: List[str] = []
    for _, probe in timeline:
        if probe == MUL and probes and probes[-1] == MUL:
            continue
        probes.append(probe)

    bits = []
    for i, probe in enumerate(probes):
        if probe != SQR:
            continue
        following = probes[i + 1] if i + 1 < len(probes) else None
        bits.append(1 if following == MUL else 0)
    return bits


def run_rsa_attack(
    sim: HierarchySim,
    key: Sequence[int],
    *,
    filler_lines: int = 8,
    warmup: bool = True,
    victim_core: int = VICTIM_CORE,
    spy_core: int = SPY_CORE,
    hit_threshold: Optional[int] = None,
    wait_interval: int = 1,
    spy_rounds: int = 0,
) -> AttackReport:
    """
    Spy on the sqr and mul entry points while the victim walks the key.

    Every key bit is a square call, and a 1 bit adds a multiply call. Each
    call (entry point plus filler work) is one victim step, so with the
    default wait interval the spy reloads both probes after every call.

    Args:
        sim: Simulator
        key: Exponent bits, most significant first
        filler_lines: Private lines touched per sqr/mul call
        warmup: Execute sqr and mul once before the spy starts
        victim_core: Core running the exponentiation
        spy_core: Core running the spy
        hit_threshold: Reload latency separating hit from miss
        wait_interval: Calls per flush-reload round
        spy_rounds: Flush-reload rounds the spy observes, 0 for all

    Returns:
        AttackReport with the spy-hit timeline and decoded key
    """
    if len(key) < MIN_KEY_BITS:
        raise InvalidInputError(f"key must have at least {MIN_KEY_BITS} bits, got {len(key)}")
    if any(bit not in (0, 1) for bit in key):
        raise InvalidInputError("key must be a sequence of 0/1 bits")

    probes = ((SQR, SQR_ADDR), (MUL, MUL_ADDR))
    spy = Spy.for_sim(
        sim,
        [addr for _, addr in probes],
        core=spy_core,
        hit_threshold=hit_threshold,
        wait_interval=wait_interval,
        rounds=spy_rounds,
    )
    victim = Victim(sim, victim_core)
    fillers = [line_at(FILLER_BASE, i) for i in range(filler_lines)]
    if warmup:
        victim.warm(SQR_ADDR, MUL_ADDR)

    def calls() -> Iterator[VictimStep]:
        for bit in key:
            yield VictimStep(partial(victim.touch_all, [SQR_ADDR, *fillers]))
            if bit:
                yield VictimStep(partial(victim.touch_all, [MUL_ADDR, *fillers]))

    timeline: List[Tuple[int, str]] = []
    for observation in spy.monitor(calls()):
        for i in observation.hit_indexes:
            timeline.append((observation.cycles[i], probes[i][0]))

    decoded = decode_timeline(timeline)
    matched = sum(1 for got, want in zip(decoded, key) if got == want)
    report = AttackReport(
        kind=AttackKind.RSA,
        mode=sim.mode,
        timeline=timeline,
        decoded_bits=decoded,
        recovered_bits=matched,
        accuracy=matched / len(key),
        spy_hits=spy.total_hits,
        victim_cycles=sim.stats.core(victim_core).cycles,
        spy_cycles=sim.stats.core(spy_core).cycles,
        metadata={
            "key_bits": len(key),
            "sqr_hits": spy.hits[SQR_ADDR],
            "mul_hits": spy.hits[MUL_ADDR],
            "victim_digest": victim.digest,
        },
    )
    logger.info("rsa_attack_completed", mode=sim.mode.value, accuracy=report.accuracy, spy_hits=report.spy_hits)
    return report
