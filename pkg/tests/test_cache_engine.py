"""Tests for the set-associative cache engine."""

import random

import pytest

from zombie_cache_sim.cache.engine import SetAssociativeCache
from zombie_cache_sim.cache.indexing import address_for, feistel_permute, index_for, tag_for
from zombie_cache_sim.cache.models import (
    CacheGeometry,
    FlushEffect,
    IndexingMode,
    Outcome,
    ReplacementPolicy,
    TouchKind,
    line_address,
)
from zombie_cache_sim.exceptions import CacheCorruptionError, InvalidInputError


def _cache(ways=4, num_sets=1, policy=ReplacementPolicy.LRU, writeback=None) -> SetAssociativeCache:
    geometry = CacheGeometry(num_sets=num_sets, ways=ways, hit_latency=24, replacement_policy=policy)
    return SetAssociativeCache(geometry, name="test", writeback=writeback)


def _fill(cache: SetAssociativeCache, tags, set_index=0):
    for way, tag in enumerate(tags):
        cache.install(set_index, way, tag, bytes([tag % 256]) * 64)


@pytest.mark.unit
@pytest.mark.parametrize(
    "valid,zombie,probe_tag,expected,way",
    [
        (True, False, 7, Outcome.NORMAL_HIT, 0),
        (True, True, 7, Outcome.ZOMBIE_HIT, 0),
        (False, True, 7, Outcome.ZOMBIE_MISS, 0),
        (False, False, 7, Outcome.NORMAL_MISS, 0),
        (True, False, 8, Outcome.NORMAL_MISS, None),
        (True, True, 8, Outcome.NORMAL_MISS, None),
        (False, True, 8, Outcome.NORMAL_MISS, None),
        (False, False, 8, Outcome.NORMAL_MISS, None),
    ],
)
def test_probe_classification(valid, zombie, probe_tag, expected, way):
    """Every valid/zombie/tag-match combination classifies as in the state table."""
    cache = _cache()
    state = cache.line(0, 0)
    state.valid, state.zombie, state.tag, state.data = valid, zombie, 7, b"\x01" * 64

    found = cache.probe(0, probe_tag)

    assert found.outcome == expected
    assert found.matched_way == way


@pytest.mark.unit
def test_probe_duplicate_tag_raises():
    """Two ways holding one tag is corruption."""
    cache = _cache()
    cache.line(0, 0).tag = 3
    cache.line(0, 1).tag = 3

    with pytest.raises(CacheCorruptionError):
        cache.probe(0, 3)


@pytest.mark.unit
def test_probe_conventional_ignores_invalid_lines():
    """A conventional probe only matches valid lines."""
    cache = _cache()
    _fill(cache, [5])
    cache.mark_zombie_on_fci(0, 5, flusher=1)

    assert cache.probe(0, 5).outcome == Outcome.ZOMBIE_MISS
    found = cache.probe(0, 5, include_invalid_zombies=False)
    assert found.outcome == Outcome.NORMAL_MISS
    assert found.matched_way is None


@pytest.mark.unit
def test_direct_indexing():
    """Direct indexing uses the low line-number bits."""
    geometry = CacheGeometry(num_sets=16, ways=4, hit_latency=24)

    assert index_for(0x1040, geometry) == 1
    assert tag_for(0x1040, geometry) == 4
    assert address_for(1, 4, geometry) == 0x1040
    assert index_for(0x1000 + 16 * 64, geometry) == index_for(0x1000, geometry)


@pytest.mark.unit
def test_keyed_random_indexing_is_stable_and_key_dependent():
    """A fixed key gives a fixed mapping; another key gives another one."""
    a = CacheGeometry(num_sets=1024, ways=16, hit_latency=24, indexing=IndexingMode.KEYED_RANDOM, index_key=1)
    b = a.model_copy(update={"index_key": 2})
    addrs = [i * 64 for i in range(256)]

    first = [index_for(x, a) for x in addrs]
    assert first == [index_for(x, a) for x in addrs]
    assert all(0 <= s < 1024 for s in first)
    assert first != [index_for(x, b) for x in addrs]
    for x in addrs[:16]:
        assert address_for(index_for(x, a), tag_for(x, a), a) == x


@pytest.mark.unit
def test_feistel_permute_is_injective():
    """Distinct line numbers never collide."""
    outputs = {feistel_permute(n, 0x5A5A) for n in range(5000)}
    assert len(outputs) == 5000


@pytest.mark.unit
def test_line_address_bounds():
    """Addresses align down and must fit in 64 bits."""
    assert line_address(0x1234) == 0x1200
    with pytest.raises(InvalidInputError):
        line_address(-1)
    with pytest.raises(InvalidInputError):
        line_address(2**64)


@pytest.mark.unit
def test_geometry_validation():
    """Set counts are powers of two and capacities divide evenly."""
    with pytest.raises(ValueError):
        CacheGeometry(num_sets=3, ways=4, hit_latency=1)
    with pytest.raises(ValueError):
        CacheGeometry.from_capacity(1000, ways=4, hit_latency=1)
    assert CacheGeometry.from_capacity(16 * 1024 * 1024, ways=16, hit_latency=24).num_sets == 16384


@pytest.mark.unit
def test_select_victim_prefers_free_ways():
    """Empty and invalid non-zombie ways are used first, lowest index."""
    cache = _cache()
    assert cache.select_victim(0) == 0

    _fill(cache, [1, 2, 3])
    assert cache.select_victim(0) == 3

    cache.install(0, 3, 4, b"\x04" * 64)
    cache.mark_zombie_on_fci(0, 2, flusher=0)
    cache.invalidate(0, 4)
    # way 1 is an invalid zombie, way 3 plain invalid
    assert cache.select_victim(0) == 3


@pytest.mark.unit
def test_select_victim_lru_and_zombies():
    """Invalid zombies compete on recency unless treated as free."""
    cache = _cache()
    _fill(cache, [1, 2, 3, 4])
    cache.touch(0, 0, TouchKind.HIT)
    assert cache.select_victim(0) == 1

    cache.mark_zombie_on_fci(0, 3, flusher=2)
    assert cache.select_victim(0) == 1
    assert cache.select_victim(0, zombies_are_free=True) == 2


@pytest.mark.unit
def test_srrip_insert_hit_and_aging():
    """SRRIP inserts at 2, promotes to 0 on hit and ages until a 3 appears."""
    cache = _cache(policy=ReplacementPolicy.SRRIP)
    _fill(cache, [1, 2, 3, 4])
    assert [cache.line(0, w).repl for w in range(4)] == [2, 2, 2, 2]

    cache.touch(0, 1, TouchKind.HIT)
    assert cache.line(0, 1).repl == 0

    assert cache.select_victim(0) == 0
    assert [cache.line(0, w).repl for w in range(4)] == [3, 1, 3, 3]


@pytest.mark.unit
def test_install_over_valid_way_raises():
    """Installs need an empty or invalid way."""
    cache = _cache()
    _fill(cache, [1])
    with pytest.raises(CacheCorruptionError):
        cache.install(0, 0, 9, b"\x00" * 64)


@pytest.mark.unit
def test_mark_zombie_clean_line():
    """A flushed clean line keeps tag, data and recency."""
    cache = _cache()
    _fill(cache, [1, 2])
    before = cache.line(0, 1).repl

    effect = cache.mark_zombie_on_fci(0, 2, flusher=3)

    state = cache.line(0, 1)
    assert effect == FlushEffect.RESIDENT
    assert (state.valid, state.zombie, state.fcid) == (False, True, 3)
    assert state.tag == 2 and state.data == b"\x02" * 64
    assert state.repl == before


@pytest.mark.unit
def test_mark_zombie_dirty_line_writes_back():
    """Dirty data reaches memory before the line turns zombie."""
    written = []
    cache = _cache(writeback=lambda addr, data: written.append((addr, data)))
    _fill(cache, [1])
    cache.write_update(0, 0, b"\xaa" * 64, mark_dirty=True)

    cache.mark_zombie_on_fci(0, 1, flusher=0)

    assert written == [(cache.address_of(0, 1), b"\xaa" * 64)]
    state = cache.line(0, 0)
    assert not state.dirty and state.zombie and not state.valid


@pytest.mark.unit
def test_mark_zombie_absent_and_reflush():
    """Absent lines stay absent; re-flushing a zombie moves its fcid."""
    cache = _cache()
    assert cache.mark_zombie_on_fci(0, 5, flusher=0) == FlushEffect.ABSENT
    assert all(not s.zombie for _, _, s in cache.iter_lines())

    _fill(cache, [5])
    cache.mark_zombie_on_fci(0, 5, flusher=0)
    assert cache.mark_zombie_on_fci(0, 5, flusher=2) == FlushEffect.INVALID_ZOMBIE
    assert cache.line(0, 0).fcid == 2
    assert cache.line(0, 0).zombie


@pytest.mark.unit
def test_mark_zombie_after_coherence_invalidation_is_absent():
    """A plain invalid line is not resident for a flush."""
    cache = _cache()
    _fill(cache, [5])
    cache.invalidate(0, 5)
    assert cache.mark_zombie_on_fci(0, 5, flusher=1) == FlushEffect.ABSENT
    assert not cache.line(0, 0).zombie


@pytest.mark.unit
def test_flush_valid_zombie():
    """Flushing a reloaded zombie reports a resident zombie."""
    cache = _cache()
    _fill(cache, [5])
    cache.mark_zombie_on_fci(0, 5, flusher=1)
    cache.install_on_zombie_miss(0, 0, b"\x05" * 64)

    assert cache.mark_zombie_on_fci(0, 5, flusher=1) == FlushEffect.RESIDENT_ZOMBIE


@pytest.mark.unit
def test_install_on_zombie_miss_identical_keeps_zombie():
    """An identical refill keeps Z, fcid and the way."""
    cache = _cache()
    _fill(cache, [1, 2, 3])
    cache.mark_zombie_on_fci(0, 2, flusher=1)

    kept = cache.install_on_zombie_miss(0, 1, b"\x02" * 64, filler=0)

    state = cache.line(0, 1)
    assert kept is True
    assert state.valid and state.zombie and state.fcid == 1
    assert cache.probe(0, 2).matched_way == 1
    assert cache.probe(0, 2).outcome == Outcome.ZOMBIE_HIT


@pytest.mark.unit
def test_install_on_zombie_miss_different_clears_zombie():
    """Different data makes the line an ordinary valid line."""
    cache = _cache()
    _fill(cache, [1])
    cache.mark_zombie_on_fci(0, 1, flusher=1)

    kept = cache.install_on_zombie_miss(0, 0, b"\xff" * 64)

    state = cache.line(0, 0)
    assert kept is False
    assert state.valid and not state.zombie and state.fcid is None
    assert state.data == b"\xff" * 64


@pytest.mark.unit
def test_install_on_zombie_miss_requires_invalid_zombie():
    """Refill in place only applies to invalid zombies."""
    cache = _cache()
    _fill(cache, [1])
    with pytest.raises(CacheCorruptionError):
        cache.install_on_zombie_miss(0, 0, b"\x01" * 64)


@pytest.mark.unit
def test_write_update_on_zombie():
    """Changed bytes clear Z; identical bytes keep it."""
    cache = _cache()
    _fill(cache, [1, 2])
    cache.mark_zombie_on_fci(0, 1, flusher=0)
    cache.mark_zombie_on_fci(0, 2, flusher=0)

    assert cache.write_update(0, 0, b"\x01" * 64, mark_dirty=False) is False
    assert cache.line(0, 0).zombie and cache.line(0, 0).fcid == 0

    assert cache.write_update(0, 1, b"\x99" * 64, mark_dirty=False) is True
    state = cache.line(0, 1)
    assert not state.zombie and state.fcid is None and not state.valid
    assert state.data == b"\x99" * 64


@pytest.mark.unit
def test_write_update_dirty_flag():
    """Cached stores dirty the line; non-temporal updates leave it clean."""
    cache = _cache()
    _fill(cache, [1])
    cache.write_update(0, 0, b"\x10" * 64, mark_dirty=True)
    assert cache.line(0, 0).dirty
    cache.write_update(0, 0, b"\x11" * 64, mark_dirty=False)
    assert not cache.line(0, 0).dirty

    with pytest.raises(CacheCorruptionError):
        cache.write_update(0, 3, b"\x00" * 64)


@pytest.mark.unit
def test_invalidate_never_creates_zombie():
    """Coherence invalidation keeps the tag but not Z."""
    cache = _cache()
    _fill(cache, [1])
    cache.mark_zombie_on_fci(0, 1, flusher=0)
    cache.install_on_zombie_miss(0, 0, b"\x01" * 64)

    assert cache.invalidate(0, 1) is True
    state = cache.line(0, 0)
    assert not state.valid and not state.zombie and state.fcid is None
    found = cache.probe(0, 1)
    assert found.outcome == Outcome.NORMAL_MISS and found.matched_way == 0


def _run_sequence(tags, flush_at=None, flushed_tag=None):
    """Replay single-set accesses; return the tag evicted at each step (or None)."""
    cache = _cache(ways=4)
    evictions = []
    for step, tag in enumerate(tags):
        if step == flush_at:
            cache.mark_zombie_on_fci(0, flushed_tag, flusher=0)
        found = cache.probe(0, tag)
        if found.outcome in (Outcome.NORMAL_HIT, Outcome.ZOMBIE_HIT):
            cache.touch(0, found.matched_way, TouchKind.HIT)
            evictions.append(None)
            continue
        way = cache.select_victim(0)
        victim = cache.line(0, way).tag
        cache.evict(0, way)
        cache.install(0, way, tag, bytes([tag]) * 64)
        evictions.append(victim)
    return evictions


@pytest.mark.unit
def test_zombie_evicted_when_line_would_have_been():
    """A flushed, never-reloaded line leaves the cache exactly when the unflushed one would."""
    rng = random.Random(1234)
    for _ in range(1000):
        x = rng.randrange(8)
        prefix = [rng.randrange(8) for _ in range(rng.randrange(0, 12))] + [x]
        suffix = [t for t in (rng.randrange(8) for _ in range(30)) if t != x]
        tags = prefix + suffix
        t = len(prefix)

        plain = _run_sequence(tags)
        flushed = _run_sequence(tags, flush_at=t, flushed_tag=x)

        assert flushed == plain
        plain_step = next((i for i, v in enumerate(plain) if v == x and i >= t), None)
        flushed_step = next((i for i, v in enumerate(flushed) if v == x and i >= t), None)
        assert flushed_step == plain_step
