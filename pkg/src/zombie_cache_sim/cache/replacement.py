"""Replacement policies.

A policy only ranks ways and updates their metadata; it never looks at the
valid or zombie bits. Free-way preference lives in the cache engine, so an
invalid zombie is ranked exactly like a valid line.
"""

from abc import ABC, abstractmethod
from typing import List, Sequence

from zombie_cache_sim.cache.models import CacheLineState, ReplacementPolicy, TouchKind


class Replacer(ABC):
    """Per-cache replacement policy."""

    @abstractmethod
    def touch(self, lines: List[CacheLineState], way: int, kind: TouchKind) -> None:
        """
        Update metadata of a way after a hit or an install.

        Args:
            lines: Ways of the set
            way: Way that was accessed
            kind: Hit or install
        """

    @abstractmethod
    def choose(self, lines: List[CacheLineState], candidates: Sequence[int]) -> int:
        """
        Pick the way to evict among candidates.

        Ties go to the lowest way index.
        """


class LRUReplacer(Replacer):
    """Least-recently-used via a per-cache monotone access stamp."""

    def __init__(self) -> None:
        self._clock = 0

    def touch(self, lines: List[CacheLineState], way: int, kind: TouchKind) -> None:
        self._clock += 1
        lines[way].repl = self._clock

    def choose(self, lines: List[CacheLineState], candidates: Sequence[int]) -> int:
        return min(candidates, key=lambda w: (lines[w].repl, w))


class SRRIPReplacer(Replacer):
    """Static RRIP with 2-bit re-reference prediction values."""

    def __init__(self, rrpv_bits: int = 2, insert_rrpv: int = 2) -> None:
        self.max_rrpv = (1 << rrpv_bits) - 1
        self.insert_rrpv = insert_rrpv

    def touch(self, lines: List[CacheLineState], way: int, kind: TouchKind) -> None:
        lines[way].repl = 0 if kind == TouchKind.HIT else self.insert_rrpv

    def choose(self, lines: List[CacheLineState], candidates: Sequence[int]) -> int:
        while True:
            for way in candidates:
                if lines[way].repl >= self.max_rrpv:
                    return way
            # Age every line in the set, invalid zombies included.
            for way in candidates:
                lines[way].repl += 1


def make_replacer(policy: ReplacementPolicy) -> Replacer:
    """Instantiate the replacer for a policy."""
    if policy == ReplacementPolicy.SRRIP:
        return SRRIPReplacer()
    return LRUReplacer()
