"""Attack Detection Table.

An N x N grid of 4-bit saturating counters indexed by [flushing core][core
that took the zombie miss]. Cross-core entries that reach the threshold raise
an alarm naming the flushing core as spy and the missing core as victim.
All counters are halved on every decay-period boundary.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import structlog

from zombie_cache_sim.exceptions import InvalidInputError

logger = structlog.get_logger(__name__)

COUNTER_BITS = 4
COUNTER_MAX = (1 << COUNTER_BITS) - 1


@dataclass(frozen=True)
class AttackAlarm:
    """A cross-core flush/zombie-miss pattern that crossed the threshold."""

    spy_core: int
    victim_core: int
    cycle: int

    def as_row(self) -> Tuple[int, int, int]:
        return (self.cycle, self.spy_core, self.victim_core)


class AdtGrid:
    """Saturating counter grid fed by the L3."""

    def __init__(
        self,
        num_cores: int,
        decay_period: int,
        alarm_threshold: int = COUNTER_MAX,
        count_flush_on_zombie: bool = False,
    ):
        """
        Initialize detection table.

        Args:
            num_cores: Number of cores (grid side)
            decay_period: Cycles between halvings
            alarm_threshold: Counter value that raises an alarm
            count_flush_on_zombie: Also count flushes that hit a zombie line
        """
        if num_cores < 1:
            raise InvalidInputError("num_cores must be positive")
        if decay_period <= 0:
            raise InvalidInputError("decay_period must be positive")
        if not 1 <= alarm_threshold <= COUNTER_MAX:
            raise InvalidInputError(f"alarm_threshold must be in [1, {COUNTER_MAX}]")
        self.num_cores = num_cores
        self.decay_period = decay_period
        self.alarm_threshold = alarm_threshold
        self.count_flush_on_zombie = count_flush_on_zombie
        self.counters = np.zeros((num_cores, num_cores), dtype=np.uint8)
        self.alarms: List[AttackAlarm] = []
        self._epoch = 0

    @property
    def storage_bytes(self) -> int:
        """Hardware storage of the grid."""
        return self.num_cores * self.num_cores * COUNTER_BITS // 8

    def _bump(self, flusher: int, misser: int, cycle: int) -> Optional[AttackAlarm]:
        if not (0 <= flusher < self.num_cores and 0 <= misser < self.num_cores):
            raise InvalidInputError(f"core pair ({flusher}, {misser}) outside a {self.num_cores}-core grid")
        value = min(int(self.counters[flusher, misser]) + 1, COUNTER_MAX)
        self.counters[flusher, misser] = value
        if flusher == misser or value < self.alarm_threshold:
            return None

        alarm = AttackAlarm(spy_core=flusher, victim_core=misser, cycle=cycle)
        self.alarms.append(alarm)
        self.counters[flusher, misser] = 0
        logger.warning("adt_alarm", spy_core=flusher, victim_core=misser, cycle=cycle)
        return alarm

    def record_zombie_miss(self, flusher: int, misser: int, cycle: int) -> Optional[AttackAlarm]:
        """
        Count a zombie miss by `misser` on a line flushed by `flusher`.

        Returns:
            The alarm raised by this event, if any
        """
        return self._bump(flusher, misser, cycle)

    def record_flush_on_zombie(self, flusher: int, filler: Optional[int], cycle: int) -> Optional[AttackAlarm]:
        """Count a flush that found a zombie line last filled by `filler`."""
        if not self.count_flush_on_zombie or filler is None:
            return None
        return self._bump(flusher, filler, cycle)

    def decay(self, cycle: int) -> None:
        """Halve all counters once per decay boundary crossed up to `cycle`."""
        epoch = cycle // self.decay_period
        crossed = epoch - self._epoch
        if crossed <= 0:
            return
        self._epoch = epoch
        self.counters >>= min(crossed, COUNTER_BITS)

    @staticmethod
    def identify(alarm: AttackAlarm) -> Tuple[int, int]:
        """(spy, victim) named by an alarm: row is the flusher, column the misser."""
        return alarm.spy_core, alarm.victim_core
