"""Victim-side helpers shared by the attack workloads."""

import hashlib
from typing import Iterable

from zombie_cache_sim.cache.models import LINE_SIZE
from zombie_cache_sim.hierarchy.simulator import HierarchySim

# Disjoint regions so probe lines, filler work and attack tables never alias.
TABLE_BASE = 0x0100_0000
CODE_BASE = 0x0200_0000
FILLER_BASE = 0x0400_0000
SHARED_BASE = 0x0800_0000


def line_at(base: int, index: int) -> int:
    return base + index * LINE_SIZE


class Victim:
    """Issues victim reads and fingerprints the data they return."""

    def __init__(self, sim: HierarchySim, core: int):
        self.sim = sim
        self.core = core
        self._digest = hashlib.sha256()

    def touch(self, addr: int) -> None:
        self._digest.update(self.sim.read(self.core, addr).data)

    def touch_all(self, addrs: Iterable[int]) -> None:
        for addr in addrs:
            self.touch(addr)

    def warm(self, *addrs: int) -> None:
        """Bring lines into the cache before the spy starts."""
        self.touch_all(addrs)

    @property
    def digest(self) -> str:
        """Hash of every value the victim has read so far."""
        return self._digest.hexdigest()
