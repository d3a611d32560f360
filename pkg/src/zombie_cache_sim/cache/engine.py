"""Set-associative cache with zombie-aware tag match, replacement and flush."""

from typing import Callable, Dict, Iterator, List, Optional, Tuple

import structlog

from zombie_cache_sim.cache.indexing import address_for, index_for, tag_for
from zombie_cache_sim.cache.models import (
    AccessOutcome,
    CacheGeometry,
    CacheLineState,
    EvictedLine,
    FlushEffect,
    Outcome,
    TouchKind,
)
from zombie_cache_sim.cache.replacement import make_replacer
from zombie_cache_sim.exceptions import CacheCorruptionError

logger = structlog.get_logger(__name__)

WritebackFn = Callable[[int, bytes], None]


class SetAssociativeCache:
    """One cache level.

    Sets are materialised on first use. Every way keeps its tag and data after
    invalidation so that an invalid zombie can still be matched.
    """

    def __init__(
        self,
        geometry: CacheGeometry,
        name: str = "cache",
        writeback: Optional[WritebackFn] = None,
    ):
        """
        Initialize cache.

        Args:
            geometry: Cache geometry
            name: Level name used in log events
            writeback: Sink for dirty data leaving the cache
        """
        self.geometry = geometry
        self.name = name
        self._writeback = writeback
        self._sets: Dict[int, List[CacheLineState]] = {}
        self.replacer = make_replacer(geometry.replacement_policy)

    # Addressing

    def locate(self, addr: int) -> Tuple[int, int]:
        """Return (set index, tag) of a line address."""
        return index_for(addr, self.geometry), tag_for(addr, self.geometry)

    def address_of(self, set_index: int, tag: int) -> int:
        return address_for(set_index, tag, self.geometry)

    def lines(self, set_index: int) -> List[CacheLineState]:
        """Ways of a set, created empty on first access."""
        ways = self._sets.get(set_index)
        if ways is None:
            ways = [CacheLineState() for _ in range(self.geometry.ways)]
            self._sets[set_index] = ways
        return ways

    def line(self, set_index: int, way: int) -> CacheLineState:
        return self.lines(set_index)[way]

    # Lookup

    def probe(self, set_index: int, tag: int, include_invalid_zombies: bool = True) -> AccessOutcome:
        """
        Classify an access to (set, tag).

        Args:
            set_index: Set index
            tag: Tag to match
            include_invalid_zombies: Match invalid lines too; False models a
                conventional cache that ignores everything but valid lines

        Returns:
            AccessOutcome with the matching way, if any

        Raises:
            CacheCorruptionError: More than one way holds the tag
        """
        ways = self.lines(set_index)
        matches = [w for w, state in enumerate(ways) if state.tag == tag]
        if len(matches) > 1:
            raise CacheCorruptionError(
                f"{self.name}: tag {tag:#x} matches ways {matches} in set {set_index}"
            )
        if not matches:
            return AccessOutcome(Outcome.NORMAL_MISS)

        way = matches[0]
        state = ways[way]
        if not include_invalid_zombies and not state.valid:
            return AccessOutcome(Outcome.NORMAL_MISS)
        if state.valid:
            return AccessOutcome(Outcome.ZOMBIE_HIT if state.zombie else Outcome.NORMAL_HIT, way)
        if state.zombie:
            return AccessOutcome(Outcome.ZOMBIE_MISS, way)
        return AccessOutcome(Outcome.NORMAL_MISS, way)

    def lookup(self, addr: int) -> Optional[CacheLineState]:
        """Valid line holding addr, if any."""
        set_index, tag = self.locate(addr)
        found = self.probe(set_index, tag, include_invalid_zombies=False)
        if found.matched_way is None:
            return None
        return self.lines(set_index)[found.matched_way]

    # Replacement

    def select_victim(self, set_index: int, zombies_are_free: bool = False) -> int:
        """
        Pick the way an install will use.

        Invalid non-zombie ways are taken first (lowest way). Invalid zombies
        compete through the replacement policy like valid lines, unless
        zombies_are_free is set for a conventional cache.
        """
        ways = self.lines(set_index)
        for way, state in enumerate(ways):
            if not state.valid and (zombies_are_free or not state.zombie):
                return way
        return self.replacer.choose(ways, range(len(ways)))

    def touch(self, set_index: int, way: int, kind: TouchKind) -> None:
        self.replacer.touch(self.lines(set_index), way, kind)

    # State changes

    def install(
        self,
        set_index: int,
        way: int,
        tag: int,
        data: bytes,
        filler: Optional[int] = None,
    ) -> None:
        """
        Fill a way with a new line.

        Stale invalid copies of the same tag in other ways are scrubbed so the
        set never holds two entries for one tag.
        """
        ways = self.lines(set_index)
        if ways[way].valid:
            raise CacheCorruptionError(f"{self.name}: install over valid way {way} in set {set_index}")
        for other, state in enumerate(ways):
            if other != way and state.tag == tag:
                if state.valid:
                    raise CacheCorruptionError(
                        f"{self.name}: tag {tag:#x} already valid in way {other} of set {set_index}"
                    )
                state.reset()

        state = ways[way]
        state.valid = True
        state.zombie = False
        state.dirty = False
        state.tag = tag
        state.fcid = None
        state.data = data
        state.filler = filler
        self.touch(set_index, way, TouchKind.INSTALL)

    def evict(self, set_index: int, way: int) -> Optional[EvictedLine]:
        """
        Remove whatever a way holds, writing dirty data back.

        Returns:
            The evicted line, or None if the way was empty
        """
        state = self.lines(set_index)[way]
        if state.tag is None:
            return None
        addr = self.address_of(set_index, state.tag)
        evicted = EvictedLine(addr=addr, data=state.data, dirty=state.dirty, was_zombie=state.zombie)
        if state.dirty and self._writeback is not None:
            self._writeback(addr, state.data)
        state.reset()
        return evicted

    def discard(self, set_index: int, tag: int) -> bool:
        """Drop a valid copy without writeback; used for private-cache invalidation."""
        found = self.probe(set_index, tag, include_invalid_zombies=False)
        if found.matched_way is None:
            return False
        self.lines(set_index)[found.matched_way].reset()
        return True

    def mark_zombie_on_fci(self, set_index: int, tag: int, flusher: int) -> FlushEffect:
        """
        Apply a flush-caused invalidation.

        A resident line keeps tag, data and replacement metadata; dirty data
        is written back first. Re-flushing an invalid zombie only moves its
        fcid to the new flusher. Flushing an absent line changes nothing.

        Args:
            set_index: Set index
            tag: Flushed tag
            flusher: Core issuing the flush

        Returns:
            FlushEffect describing what was found
        """
        found = self.probe(set_index, tag)
        if found.matched_way is None or found.outcome == Outcome.NORMAL_MISS:
            return FlushEffect.ABSENT

        state = self.lines(set_index)[found.matched_way]
        if found.outcome == Outcome.ZOMBIE_MISS:
            state.fcid = flusher
            return FlushEffect.INVALID_ZOMBIE

        was_zombie = state.zombie
        if state.dirty:
            if self._writeback is not None:
                self._writeback(self.address_of(set_index, tag), state.data)
            state.dirty = False
        state.valid = False
        state.zombie = True
        state.fcid = flusher
        return FlushEffect.RESIDENT_ZOMBIE if was_zombie else FlushEffect.RESIDENT

    def install_on_zombie_miss(
        self,
        set_index: int,
        way: int,
        incoming: bytes,
        filler: Optional[int] = None,
    ) -> bool:
        """
        Refill an invalid zombie in place.

        Args:
            set_index: Set index
            way: Way of the invalid zombie
            incoming: Data fetched from memory
            filler: Core that caused the refill

        Returns:
            True when the incoming data equals the retained data and Z is kept
        """
        state = self.lines(set_index)[way]
        if state.valid or not state.zombie:
            raise CacheCorruptionError(f"{self.name}: way {way} of set {set_index} is not an invalid zombie")
        kept = incoming == state.data
        state.data = incoming
        state.valid = True
        state.dirty = False
        state.zombie = kept
        if not kept:
            state.fcid = None
        state.filler = filler
        self.touch(set_index, way, TouchKind.INSTALL)
        return kept

    def write_update(self, set_index: int, way: int, data: bytes, mark_dirty: bool = True) -> bool:
        """
        Overwrite the data of a valid line or an invalid zombie.

        Z and fcid are cleared only when the bytes actually change.

        Args:
            set_index: Set index
            way: Way to update
            data: New line contents
            mark_dirty: True for a cached store; False when memory already
                holds the data (non-temporal store)

        Returns:
            True if the data changed
        """
        state = self.lines(set_index)[way]
        if not state.valid and not state.zombie:
            raise CacheCorruptionError(f"{self.name}: write to empty way {way} of set {set_index}")
        changed = data != state.data
        if changed:
            state.data = data
            state.zombie = False
            state.fcid = None
        if state.valid:
            state.dirty = mark_dirty
        return changed

    def clear_zombie(self, set_index: int, way: int) -> None:
        state = self.lines(set_index)[way]
        state.zombie = False
        state.fcid = None

    def invalidate(self, set_index: int, tag: int) -> bool:
        """
        Coherence-style invalidation of a line.

        Never creates a zombie. The tag stays in the way, so a later access is
        a tag-matching normal miss. Returns True if a valid line was dropped.
        """
        found = self.probe(set_index, tag)
        if found.matched_way is None:
            return False
        state = self.lines(set_index)[found.matched_way]
        was_valid = state.valid
        if state.dirty and self._writeback is not None:
            self._writeback(self.address_of(set_index, tag), state.data)
        state.valid = False
        state.dirty = False
        state.zombie = False
        state.fcid = None
        return was_valid

    def clean(self, set_index: int, way: int) -> None:
        """Write a dirty line back and keep it cached."""
        state = self.lines(set_index)[way]
        if state.dirty and state.tag is not None:
            if self._writeback is not None:
                self._writeback(self.address_of(set_index, state.tag), state.data)
            state.dirty = False

    # Introspection

    def iter_lines(self) -> Iterator[Tuple[int, int, CacheLineState]]:
        """Yield (set, way, line) for every materialised way."""
        for set_index in sorted(self._sets):
            for way, state in enumerate(self._sets[set_index]):
                yield set_index, way, state

    def valid_addresses(self) -> List[int]:
        return [
            self.address_of(s, state.tag)
            for s, _, state in self.iter_lines()
            if state.valid and state.tag is not None
        ]
