"""Set-index and tag derivation.

Direct indexing takes the low line-number bits. Keyed-random indexing runs the
line number through a three-round Feistel network keyed by a 64-bit seed and
reduces the result modulo the set count; the network is a bijection on 64-bit
values, so a fixed key gives a fixed address-to-set mapping.
"""

from typing import Tuple

from zombie_cache_sim.cache.models import CacheGeometry, IndexingMode

_MASK32 = 0xFFFFFFFF
_MASK64 = 0xFFFFFFFFFFFFFFFF
_ROUNDS = 3


def _round_keys(key: int) -> Tuple[int, ...]:
    keys = []
    state = key & _MASK64
    for _ in range(_ROUNDS):
        # splitmix64 step
        state = (state + 0x9E3779B97F4A7C15) & _MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        keys.append((z ^ (z >> 31)) & _MASK32)
    return tuple(keys)


def _mix(half: int, round_key: int) -> int:
    x = (half ^ round_key) & _MASK32
    x = (x * 0x85EBCA6B) & _MASK32
    x ^= x >> 13
    x = (x * 0xC2B2AE35) & _MASK32
    return x ^ (x >> 16)


def feistel_permute(line_number: int, key: int) -> int:
    """
    Keyed bijection over 64-bit line numbers.

    Args:
        line_number: Line number (address / line size)
        key: 64-bit permutation key

    Returns:
        Permuted 64-bit value
    """
    left = (line_number >> 32) & _MASK32
    right = line_number & _MASK32
    for round_key in _round_keys(key):
        left, right = right, left ^ _mix(right, round_key)
    return (left << 32) | right


def index_for(addr: int, geom: CacheGeometry) -> int:
    """
    Set index of an address.

    Args:
        addr: Byte address
        geom: Cache geometry

    Returns:
        Set index in [0, num_sets)
    """
    line_number = addr // geom.line_size
    if geom.indexing == IndexingMode.KEYED_RANDOM:
        return feistel_permute(line_number, geom.index_key) % geom.num_sets
    return line_number % geom.num_sets


def tag_for(addr: int, geom: CacheGeometry) -> int:
    """
    Tag of an address.

    Keyed-random caches keep the whole line number as tag since the set index
    no longer carries address bits.
    """
    line_number = addr // geom.line_size
    if geom.indexing == IndexingMode.KEYED_RANDOM:
        return line_number
    return line_number // geom.num_sets


def address_for(set_index: int, tag: int, geom: CacheGeometry) -> int:
    """Rebuild the line address held in (set_index, tag)."""
    if geom.indexing == IndexingMode.KEYED_RANDOM:
        return tag * geom.line_size
    return (tag * geom.num_sets + set_index) * geom.line_size
