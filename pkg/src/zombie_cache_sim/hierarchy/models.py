"""Hierarchy models."""

from dataclasses import dataclass, field, fields
from enum import Enum
from typing import Dict, Optional

from pydantic import BaseModel, Field, model_validator

from zombie_cache_sim.cache.models import CacheGeometry, IndexingMode, Outcome, ReplacementPolicy

KIB = 1024
MIB = 1024 * 1024
DEFAULT_L3_INDEX_KEY = 0x5A5A_C3C3_1234_9876


class MitigationMode(str, Enum):
    """Flush+Reload mitigation applied at the L3."""

    BASELINE = "baseline"
    ZBM = "zbm"
    ZBMX = "zbmx"


class CountedAs(str, Enum):
    """How performance counters record an access."""

    HIT = "hit"
    MISS = "miss"


class OpKind(str, Enum):
    """Operations accepted by the simulator."""

    READ = "read"
    WRITE = "write"
    CLFLUSH = "clflush"
    NT_STORE = "nt_store"


def default_l1() -> CacheGeometry:
    return CacheGeometry.from_capacity(32 * KIB, ways=8, hit_latency=4)


def default_l2() -> CacheGeometry:
    return CacheGeometry.from_capacity(256 * KIB, ways=8, hit_latency=12)


def default_l3(capacity_bytes: int = 16 * MIB, index_key: int = DEFAULT_L3_INDEX_KEY) -> CacheGeometry:
    return CacheGeometry.from_capacity(
        capacity_bytes,
        ways=16,
        hit_latency=24,
        replacement_policy=ReplacementPolicy.SRRIP,
        indexing=IndexingMode.KEYED_RANDOM,
        index_key=index_key,
    )


class HierarchyConfig(BaseModel):
    """Machine configuration; defaults follow an 8-core 3.2GHz server part."""

    num_cores: int = Field(default=8, ge=1, le=64, description="Number of cores")
    l1: CacheGeometry = Field(default_factory=default_l1, description="Private L1 per core")
    l2: CacheGeometry = Field(default_factory=default_l2, description="Private L2 per core")
    l3: CacheGeometry = Field(default_factory=default_l3, description="Shared inclusive L3")
    mem_latency: int = Field(default=145, gt=0, description="Flat memory latency in cycles")
    mode: MitigationMode = Field(default=MitigationMode.BASELINE, description="Mitigation mode")
    constant_time_flush: bool = Field(default=False, description="Serve every clflush at worst-case latency")
    zombie_gated_flush: bool = Field(
        default=False, description="Worst-case flush latency only for lines with Z set"
    )
    zombie_tracking: bool = Field(
        default=True, description="Keep Z bits; False models a conventional L3 (baseline only)"
    )
    resident_flush_latency: int = Field(default=30, ge=0)
    absent_flush_latency: int = Field(default=10, ge=0)
    constant_flush_latency: int = Field(default=30, ge=0)

    @model_validator(mode="after")
    def _check(self) -> "HierarchyConfig":
        if not self.zombie_tracking and self.mode != MitigationMode.BASELINE:
            raise ValueError(f"zombie_tracking can only be disabled in baseline mode, not {self.mode.value}")
        if self.constant_flush_latency < max(self.resident_flush_latency, self.absent_flush_latency):
            raise ValueError("constant_flush_latency must be the worst-case flush latency")
        return self

    @property
    def hit_latency(self) -> int:
        """Latency of an L3 hit seen by the core."""
        return self.l1.hit_latency + self.l2.hit_latency + self.l3.hit_latency

    @property
    def miss_latency(self) -> int:
        """Latency of an L3 miss seen by the core."""
        return self.hit_latency + self.mem_latency

    @classmethod
    def desk_scale(cls, l3_bytes: int = 1 * MIB, **kwargs: object) -> "HierarchyConfig":
        """Default latencies and core count with a smaller L3."""
        return cls(l3=default_l3(l3_bytes), **kwargs)


@dataclass(frozen=True)
class AccessResponse:
    """Result of one memory operation seen by the requesting core."""

    latency: int
    counted_as: CountedAs
    data: bytes = b""
    # L3 classification; None when L1 or L2 served the access.
    outcome: Optional[Outcome] = None
    level: int = 3


@dataclass
class CoreCounters:
    """Event counts for one core."""

    normal_hits: int = 0
    normal_misses: int = 0
    zombie_hits: int = 0
    zombie_misses: int = 0
    hits_reported: int = 0
    misses_reported: int = 0
    l1_hits: int = 0
    l2_hits: int = 0
    flushes: int = 0
    flushes_on_zombies: int = 0
    dummy_memory_requests: int = 0
    nt_stores: int = 0
    cycles: int = 0

    def add(self, other: "CoreCounters") -> None:
        for f in fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))


@dataclass
class StatsCounters:
    """Per-core counters plus machine-wide totals."""

    per_core: Dict[int, CoreCounters] = field(default_factory=dict)
    l3_evictions: int = 0
    zombie_evictions: int = 0
    writebacks: int = 0
    total_cycles: int = 0

    def core(self, core_id: int) -> CoreCounters:
        counters = self.per_core.get(core_id)
        if counters is None:
            counters = CoreCounters()
            self.per_core[core_id] = counters
        return counters

    @property
    def total(self) -> CoreCounters:
        """Sum over all cores."""
        summed = CoreCounters()
        for counters in self.per_core.values():
            summed.add(counters)
        return summed

    def to_dict(self) -> Dict[str, int]:
        """Flatten totals for reports."""
        result = {f.name: getattr(self.total, f.name) for f in fields(CoreCounters)}
        result.update(
            l3_evictions=self.l3_evictions,
            zombie_evictions=self.zombie_evictions,
            writebacks=self.writebacks,
            total_cycles=self.total_cycles,
        )
        return result


@dataclass(frozen=True)
class RunLogRecord:
    """One line of the run log."""

    cycle: int
    core: int
    op: OpKind
    addr: int
    outcome: str
    latency: int

    def as_row(self) -> tuple:
        return (self.cycle, self.core, self.op.value, f"{self.addr:#x}", self.outcome, self.latency)
