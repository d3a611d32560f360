"""Multi-core cache hierarchy with zombie-based mitigation at the L3."""

import copy
from typing import Dict, List, Optional, Tuple

import structlog

from zombie_cache_sim.cache.engine import SetAssociativeCache
from zombie_cache_sim.cache.models import LINE_SIZE, FlushEffect, Outcome, TouchKind, line_address
from zombie_cache_sim.detection.adt import AdtGrid
from zombie_cache_sim.exceptions import InvalidInputError
from zombie_cache_sim.hierarchy.memory import BackingMemory
from zombie_cache_sim.hierarchy.models import (
    AccessResponse,
    CountedAs,
    HierarchyConfig,
    MitigationMode,
    OpKind,
    RunLogRecord,
    StatsCounters,
)

logger = structlog.get_logger(__name__)


class HierarchySim:
    """
    Private L1/L2 per core, shared inclusive L3, flat memory.

    Everything runs on one logical timeline: each operation advances the
    global cycle count by the latency the issuing core observes. L1 and L2
    hold tags only and write through to the L3, which owns line data and the
    zombie state.
    """

    def __init__(
        self,
        config: Optional[HierarchyConfig] = None,
        detector: Optional[AdtGrid] = None,
        record_log: bool = False,
        trace: bool = False,
    ):
        """
        Initialize simulator.

        Args:
            config: Machine configuration (default: 16 MiB L3, 8 cores)
            detector: Attack detection table fed by zombie events
            record_log: Keep a per-operation run log
            trace: Emit a debug log event per operation
        """
        self.config = config or HierarchyConfig()
        self.detector = detector
        self.record_log = record_log
        self.trace = trace

        self.memory = BackingMemory()
        self.stats = StatsCounters()
        self.cycle = 0
        self.run_log: List[RunLogRecord] = []

        self.l3 = SetAssociativeCache(self.config.l3, name="l3", writeback=self._writeback)
        self.l1 = [SetAssociativeCache(self.config.l1, name=f"l1.{c}") for c in range(self.config.num_cores)]
        self.l2 = [SetAssociativeCache(self.config.l2, name=f"l2.{c}") for c in range(self.config.num_cores)]

    @property
    def mode(self) -> MitigationMode:
        return self.config.mode

    # Public operations

    def read(self, core: int, addr: int) -> AccessResponse:
        """
        Load a line on behalf of a core.

        Args:
            core: Requesting core
            addr: Byte address

        Returns:
            AccessResponse with latency, counter classification and data
        """
        addr = self._begin(core, addr)
        response = self._access(core, addr)
        self._finish(core, OpKind.READ, addr, response.latency, response.outcome)
        return response

    def write(self, core: int, addr: int, data: bytes) -> AccessResponse:
        """
        Store a full line. Misses allocate through the read path; the L3 copy
        becomes dirty and loses Z if the bytes change.
        """
        addr = self._begin(core, addr)
        self._check_data(data)
        response = self._access(core, addr)
        set_index, tag = self.l3.locate(addr)
        way = self.l3.probe(set_index, tag).matched_way
        self.l3.write_update(set_index, way, data, mark_dirty=True)
        response = AccessResponse(
            latency=response.latency,
            counted_as=response.counted_as,
            data=data,
            outcome=response.outcome,
            level=response.level,
        )
        self._finish(core, OpKind.WRITE, addr, response.latency, response.outcome)
        return response

    def clflush(self, core: int, addr: int) -> int:
        """
        Flush a line from every level.

        Private copies are dropped. At the L3 a resident line becomes an
        invalid zombie owned by `core`.

        Returns:
            Flush latency in cycles
        """
        addr = self._begin(core, addr)
        self._drop_private(addr)
        set_index, tag = self.l3.locate(addr)
        filler = None
        if self.config.zombie_tracking:
            found = self.l3.probe(set_index, tag)
            if found.matched_way is not None:
                filler = self.l3.line(set_index, found.matched_way).filler
            effect = self.l3.mark_zombie_on_fci(set_index, tag, core)
        else:
            effect = FlushEffect.RESIDENT if self.l3.invalidate(set_index, tag) else FlushEffect.ABSENT

        latency = self._flush_latency(effect)
        counters = self.stats.core(core)
        counters.flushes += 1
        if effect.on_zombie:
            counters.flushes_on_zombies += 1
            if self.detector is not None:
                self.detector.record_flush_on_zombie(core, filler, self.cycle)
        self._finish(core, OpKind.CLFLUSH, addr, latency, effect.value)
        return latency

    def nt_store(self, core: int, addr: int, data: bytes) -> int:
        """
        Non-temporal store: write memory, update a cached L3 copy in place
        (valid line or invalid zombie), never allocate or evict.

        Returns:
            Store latency in cycles
        """
        addr = self._begin(core, addr)
        self._check_data(data)
        self.memory.write(addr, data)
        set_index, tag = self.l3.locate(addr)
        found = self.l3.probe(set_index, tag, include_invalid_zombies=self.config.zombie_tracking)
        if found.outcome != Outcome.NORMAL_MISS:
            self.l3.write_update(set_index, found.matched_way, data, mark_dirty=False)
        self.stats.core(core).nt_stores += 1
        latency = self.config.mem_latency
        self._finish(core, OpKind.NT_STORE, addr, latency, found.outcome.value)
        return latency

    def coherence_invalidate(self, addr: int) -> bool:
        """
        Invalidate a line everywhere without marking a zombie.

        Returns:
            True if the L3 held a valid copy
        """
        addr = line_address(addr)
        self._drop_private(addr)
        set_index, tag = self.l3.locate(addr)
        return self.l3.invalidate(set_index, tag)

    def evict_from_l3(self, set_index: int, way: int) -> None:
        """Evict an L3 way, writing back dirty data and back-invalidating private copies."""
        evicted = self.l3.evict(set_index, way)
        if evicted is None:
            return
        self.stats.l3_evictions += 1
        if evicted.was_zombie:
            self.stats.zombie_evictions += 1
        self._drop_private(evicted.addr)

    def flush_all(self) -> Dict[int, bytes]:
        """
        Write every dirty L3 line back to memory, keeping it cached.

        Returns:
            Snapshot of all written memory lines
        """
        for set_index, way, state in self.l3.iter_lines():
            if state.dirty:
                self.l3.clean(set_index, way)
        return self.memory.snapshot()

    def snapshot_stats(self) -> StatsCounters:
        """Copy of the counters."""
        return copy.deepcopy(self.stats)

    def peek(self, addr: int) -> Tuple[Optional[int], Optional[int]]:
        """(set, way) of an L3 tag match for addr, or (set, None)."""
        set_index, tag = self.l3.locate(line_address(addr))
        return set_index, self.l3.probe(set_index, tag).matched_way

    # Internals

    def _begin(self, core: int, addr: int) -> int:
        if not 0 <= core < self.config.num_cores:
            raise InvalidInputError(f"core {core} outside [0, {self.config.num_cores})")
        if self.detector is not None:
            self.detector.decay(self.cycle)
        return line_address(addr)

    @staticmethod
    def _check_data(data: bytes) -> None:
        if len(data) != LINE_SIZE:
            raise InvalidInputError(f"line data must be {LINE_SIZE} bytes, got {len(data)}")

    def _finish(self, core: int, op: OpKind, addr: int, latency: int, outcome: Optional[object]) -> None:
        label = getattr(outcome, "value", outcome) or "private_hit"
        if self.record_log:
            self.run_log.append(RunLogRecord(self.cycle, core, op, addr, str(label), latency))
        if self.trace:
            logger.debug("sim_op", cycle=self.cycle, core=core, op=op.value, addr=hex(addr), outcome=label, latency=latency)
        self.cycle += latency
        self.stats.total_cycles = self.cycle
        self.stats.core(core).cycles += latency

    def _writeback(self, addr: int, data: bytes) -> None:
        self.stats.writebacks += 1
        self.memory.write(addr, data)

    def _drop_private(self, addr: int) -> None:
        for cache in (*self.l1, *self.l2):
            set_index, tag = cache.locate(addr)
            cache.discard(set_index, tag)

    def _flush_latency(self, effect: FlushEffect) -> int:
        cfg = self.config
        if cfg.constant_time_flush:
            return cfg.constant_flush_latency
        if cfg.zombie_gated_flush and effect.on_zombie:
            return cfg.constant_flush_latency
        return cfg.resident_flush_latency if effect.resident else cfg.absent_flush_latency

    def _fill_private(self, cache: SetAssociativeCache, addr: int) -> None:
        set_index, tag = cache.locate(addr)
        way = cache.select_victim(set_index, zombies_are_free=True)
        cache.evict(set_index, way)
        cache.install(set_index, way, tag, b"")

    def _access(self, core: int, addr: int) -> AccessResponse:
        counters = self.stats.core(core)
        l1, l2 = self.l1[core], self.l2[core]

        set_index, tag = l1.locate(addr)
        found = l1.probe(set_index, tag, include_invalid_zombies=False)
        if found.outcome == Outcome.NORMAL_HIT:
            l1.touch(set_index, found.matched_way, TouchKind.HIT)
            counters.l1_hits += 1
            return AccessResponse(self.config.l1.hit_latency, CountedAs.HIT, self._l3_data(addr), level=1)

        set_index, tag = l2.locate(addr)
        found = l2.probe(set_index, tag, include_invalid_zombies=False)
        if found.outcome == Outcome.NORMAL_HIT:
            l2.touch(set_index, found.matched_way, TouchKind.HIT)
            counters.l2_hits += 1
            self._fill_private(l1, addr)
            latency = self.config.l1.hit_latency + self.config.l2.hit_latency
            return AccessResponse(latency, CountedAs.HIT, self._l3_data(addr), level=2)

        response = self._l3_access(core, addr)
        self._fill_private(l2, addr)
        self._fill_private(l1, addr)
        return response

    def _l3_data(self, addr: int) -> bytes:
        state = self.l3.lookup(addr)
        if state is None:
            raise InvalidInputError(f"inclusion violated: {addr:#x} cached privately but not in L3")
        return state.data

    def _make_room(self, set_index: int) -> int:
        way = self.l3.select_victim(set_index, zombies_are_free=not self.config.zombie_tracking)
        state = self.l3.line(set_index, way)
        if state.valid or state.zombie:
            self.evict_from_l3(set_index, way)
        elif state.tag is not None:
            # stale tag of a plain invalid line
            self.l3.evict(set_index, way)
        return way

    def _l3_access(self, core: int, addr: int) -> AccessResponse:
        cfg = self.config
        counters = self.stats.core(core)
        hit_latency, miss_latency = cfg.hit_latency, cfg.miss_latency
        set_index, tag = self.l3.locate(addr)
        found = self.l3.probe(set_index, tag, include_invalid_zombies=cfg.zombie_tracking)
        outcome, way = found.outcome, found.matched_way

        if outcome == Outcome.NORMAL_HIT:
            self.l3.touch(set_index, way, TouchKind.HIT)
            counters.normal_hits += 1
            counters.hits_reported += 1
            return AccessResponse(hit_latency, CountedAs.HIT, self.l3.line(set_index, way).data, outcome)

        if outcome == Outcome.NORMAL_MISS:
            data = self.memory.read(addr)
            if way is None or self.l3.line(set_index, way).valid:
                way = self._make_room(set_index)
            self.l3.install(set_index, way, tag, data, filler=core)
            counters.normal_misses += 1
            counters.misses_reported += 1
            return AccessResponse(miss_latency, CountedAs.MISS, data, outcome)

        state = self.l3.line(set_index, way)
        fcid = state.fcid

        if outcome == Outcome.ZOMBIE_MISS:
            if self.detector is not None and fcid is not None:
                self.detector.record_zombie_miss(fcid, core, self.cycle)
            data = self.memory.read(addr)
            kept = self.l3.install_on_zombie_miss(set_index, way, data, filler=core)
            if kept and cfg.mode == MitigationMode.ZBMX and fcid == core:
                self.l3.clear_zombie(set_index, way)
            counters.zombie_misses += 1
            counters.misses_reported += 1
            return AccessResponse(miss_latency, CountedAs.MISS, data, outcome)

        # Valid zombie.
        self.l3.touch(set_index, way, TouchKind.HIT)
        counters.zombie_hits += 1
        if cfg.mode == MitigationMode.BASELINE:
            counters.hits_reported += 1
            return AccessResponse(hit_latency, CountedAs.HIT, state.data, outcome)
        if cfg.mode == MitigationMode.ZBMX and fcid == core:
            self.l3.clear_zombie(set_index, way)
            counters.hits_reported += 1
            return AccessResponse(hit_latency, CountedAs.HIT, state.data, outcome)

        # Dummy request: fetched data is discarded.
        self.memory.read(addr)
        counters.dummy_memory_requests += 1
        counters.misses_reported += 1
        return AccessResponse(miss_latency, CountedAs.MISS, state.data, outcome)
