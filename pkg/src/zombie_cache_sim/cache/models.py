"""Cache engine models."""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from zombie_cache_sim.exceptions import InvalidInputError

LINE_SIZE = 64
ADDRESS_LIMIT = 2**64


class ReplacementPolicy(str, Enum):
    """Supported replacement policies."""

    LRU = "lru"
    SRRIP = "srrip"


class IndexingMode(str, Enum):
    """Set-index functions."""

    DIRECT = "direct"
    KEYED_RANDOM = "keyed_random"


class Outcome(str, Enum):
    """Classification of a cache probe."""

    NORMAL_HIT = "normal_hit"
    NORMAL_MISS = "normal_miss"
    ZOMBIE_MISS = "zombie_miss"
    ZOMBIE_HIT = "zombie_hit"


class TouchKind(str, Enum):
    """Replacement-metadata update cause."""

    HIT = "hit"
    INSTALL = "install"


class FlushEffect(str, Enum):
    """What a flush-caused invalidation found in the set."""

    ABSENT = "absent"
    RESIDENT = "resident"
    RESIDENT_ZOMBIE = "resident_zombie"
    INVALID_ZOMBIE = "invalid_zombie"

    @property
    def resident(self) -> bool:
        return self in (FlushEffect.RESIDENT, FlushEffect.RESIDENT_ZOMBIE)

    @property
    def on_zombie(self) -> bool:
        return self in (FlushEffect.RESIDENT_ZOMBIE, FlushEffect.INVALID_ZOMBIE)


def line_address(addr: int, line_size: int = LINE_SIZE) -> int:
    """
    Align a byte address to its cache line.

    Args:
        addr: Byte address
        line_size: Line size in bytes

    Returns:
        Line-aligned address
    """
    if addr < 0 or addr >= ADDRESS_LIMIT:
        raise InvalidInputError(f"Address {addr:#x} outside the 64-bit address space")
    return addr - (addr % line_size)


class CacheGeometry(BaseModel):
    """Shape, timing and policy of one set-associative cache."""

    model_config = ConfigDict(frozen=True)

    num_sets: int = Field(..., gt=0, description="Number of sets (power of two)")
    ways: int = Field(..., gt=0, description="Associativity")
    line_size: int = Field(default=LINE_SIZE, description="Line size in bytes")
    hit_latency: int = Field(..., ge=0, description="Hit latency in cycles")
    replacement_policy: ReplacementPolicy = Field(default=ReplacementPolicy.LRU)
    indexing: IndexingMode = Field(default=IndexingMode.DIRECT)
    index_key: int = Field(default=0, ge=0, lt=2**64, description="Key for keyed-random indexing")

    @field_validator("num_sets")
    @classmethod
    def _power_of_two(cls, value: int) -> int:
        if value & (value - 1):
            raise ValueError(f"num_sets must be a power of two, got {value}")
        return value

    @field_validator("line_size")
    @classmethod
    def _fixed_line(cls, value: int) -> int:
        if value != LINE_SIZE:
            raise ValueError(f"line_size must be {LINE_SIZE} bytes")
        return value

    @property
    def capacity(self) -> int:
        """Capacity in bytes."""
        return self.num_sets * self.ways * self.line_size

    @classmethod
    def from_capacity(cls, capacity_bytes: int, ways: int, hit_latency: int, **kwargs: object) -> "CacheGeometry":
        """
        Build a geometry from a capacity.

        Args:
            capacity_bytes: Total capacity in bytes
            ways: Associativity
            hit_latency: Hit latency in cycles
            **kwargs: Remaining geometry fields

        Returns:
            CacheGeometry with num_sets derived from the capacity
        """
        per_set = ways * LINE_SIZE
        if capacity_bytes <= 0 or capacity_bytes % per_set:
            raise ValueError(
                f"Capacity {capacity_bytes} is not a multiple of ways x line size ({per_set})"
            )
        return cls(num_sets=capacity_bytes // per_set, ways=ways, hit_latency=hit_latency, **kwargs)


@dataclass(slots=True)
class CacheLineState:
    """Per-way tag-array and data-array record."""

    valid: bool = False
    zombie: bool = False
    dirty: bool = False
    tag: Optional[int] = None
    fcid: Optional[int] = None
    data: bytes = b""
    repl: int = 0
    # Core that last installed the line; feeds flush-on-zombie detection.
    filler: Optional[int] = None

    def reset(self) -> None:
        self.valid = False
        self.zombie = False
        self.dirty = False
        self.tag = None
        self.fcid = None
        self.data = b""
        self.repl = 0
        self.filler = None


@dataclass(frozen=True, slots=True)
class AccessOutcome:
    """Probe classification and the way that matched, if any."""

    outcome: Outcome
    matched_way: Optional[int] = None


@dataclass(frozen=True, slots=True)
class EvictedLine:
    """A line removed from a cache by replacement."""

    addr: int
    data: bytes
    dirty: bool
    was_zombie: bool = False
