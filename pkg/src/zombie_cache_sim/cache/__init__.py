"""Single-level cache engine."""

from zombie_cache_sim.cache.engine import SetAssociativeCache
from zombie_cache_sim.cache.indexing import address_for, feistel_permute, index_for, tag_for
from zombie_cache_sim.cache.models import (
    LINE_SIZE,
    AccessOutcome,
    CacheGeometry,
    CacheLineState,
    EvictedLine,
    FlushEffect,
    IndexingMode,
    Outcome,
    ReplacementPolicy,
    TouchKind,
    line_address,
)
from zombie_cache_sim.cache.replacement import LRUReplacer, Replacer, SRRIPReplacer, make_replacer

__all__ = [
    "LINE_SIZE",
    "AccessOutcome",
    "CacheGeometry",
    "CacheLineState",
    "EvictedLine",
    "FlushEffect",
    "IndexingMode",
    "LRUReplacer",
    "Outcome",
    "ReplacementPolicy",
    "Replacer",
    "SRRIPReplacer",
    "SetAssociativeCache",
    "TouchKind",
    "address_for",
    "feistel_permute",
    "index_for",
    "line_address",
    "make_replacer",
    "tag_for",
]
