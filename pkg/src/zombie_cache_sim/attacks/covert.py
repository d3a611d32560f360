"""Flush+Reload covert channel between a trojan and a spy."""

from functools import partial
from typing import Iterator, Optional, Sequence

import structlog

from zombie_cache_sim.attacks.models import SPY_CORE, VICTIM_CORE, AttackKind, AttackReport
from zombie_cache_sim.attacks.spy import Spy, VictimStep
from zombie_cache_sim.attacks.victim import SHARED_BASE, Victim, line_at
from zombie_cache_sim.exceptions import InvalidInputError
from zombie_cache_sim.hierarchy.simulator import HierarchySim

logger = structlog.get_logger(__name__)

CHANNEL_ADDR = line_at(SHARED_BASE, 0)


def _idle() -> None:
    pass


def run_covert_channel(
    sim: HierarchySim,
    bits: Sequence[int],
    *,
    warmup: bool = True,
    trojan_core: int = VICTIM_CORE,
    spy_core: int = SPY_CORE,
    hit_threshold: Optional[int] = None,
    wait_interval: int = 1,
    spy_rounds: int = 0,
) -> AttackReport:
    """
    Send bits over one shared line: the trojan touches it for a 1 and stays
    idle for a 0; the spy decodes each slot by reload timing.

    A round spanning several slots decodes all of them from its one reload.
    Slots after the spy's last round decode as 0.

    Returns:
        AttackReport with sent and decoded bits; accuracy is 1 - bit error rate
    """
    if any(bit not in (0, 1) for bit in bits):
        raise InvalidInputError("bits must be 0/1")

    spy = Spy.for_sim(
        sim,
        [CHANNEL_ADDR],
        core=spy_core,
        hit_threshold=hit_threshold,
        wait_interval=wait_interval,
        rounds=spy_rounds,
    )
    trojan = Victim(sim, trojan_core)
    if warmup:
        trojan.warm(CHANNEL_ADDR)

    def slots() -> Iterator[VictimStep]:
        for bit in bits:
            yield VictimStep(partial(trojan.touch, CHANNEL_ADDR) if bit else _idle)

    decoded = [0] * len(bits)
    for observation in spy.monitor(slots()):
        value = 1 if observation.hit_indexes else 0
        for slot in range(observation.first_step, observation.last_step + 1):
            decoded[slot] = value

    correct = sum(1 for sent, got in zip(bits, decoded) if sent == got)
    report = AttackReport(
        kind=AttackKind.COVERT,
        mode=sim.mode,
        sent_bits=list(bits),
        decoded_bits=decoded,
        recovered_bits=correct,
        accuracy=correct / len(bits) if bits else 0.0,
        spy_hits=spy.total_hits,
        victim_cycles=sim.stats.core(trojan_core).cycles,
        spy_cycles=sim.stats.core(spy_core).cycles,
        metadata={"bit_error_rate": 1.0 - correct / len(bits) if bits else 0.0},
    )
    logger.info("covert_channel_completed", mode=sim.mode.value, bits=len(bits), accuracy=report.accuracy)
    return report
