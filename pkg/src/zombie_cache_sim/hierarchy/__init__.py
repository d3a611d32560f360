"""Multi-core cache hierarchy simulator."""

from zombie_cache_sim.hierarchy.memory import BackingMemory, default_contents
from zombie_cache_sim.hierarchy.models import (
    AccessResponse,
    CoreCounters,
    CountedAs,
    HierarchyConfig,
    MitigationMode,
    OpKind,
    RunLogRecord,
    StatsCounters,
)
from zombie_cache_sim.hierarchy.simulator import HierarchySim

__all__ = [
    "AccessResponse",
    "BackingMemory",
    "CoreCounters",
    "CountedAs",
    "HierarchyConfig",
    "HierarchySim",
    "MitigationMode",
    "OpKind",
    "RunLogRecord",
    "StatsCounters",
    "default_contents",
]
