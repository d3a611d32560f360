"""Shared fixtures."""

import random
from typing import Callable, List, Optional

import pytest

from zombie_cache_sim.cache.models import CacheGeometry, ReplacementPolicy
from zombie_cache_sim.config import Settings
from zombie_cache_sim.detection.adt import AdtGrid
from zombie_cache_sim.hierarchy.models import HierarchyConfig, MitigationMode, OpKind
from zombie_cache_sim.hierarchy.simulator import HierarchySim
from zombie_cache_sim.model.workloads import Op

BASE = 0x10_0000


@pytest.fixture
def settings() -> Settings:
    """Settings independent of the environment."""
    return Settings(_env_file=None, ENABLE_METRICS=True, WRITE_RUN_LOG=False, DEFAULT_SEED=2019)


@pytest.fixture
def small_config() -> Callable[..., HierarchyConfig]:
    """Tiny LRU hierarchy: 2x2 L1, 4x2 L2, 16x4 L3, default latencies."""

    def build(mode: MitigationMode = MitigationMode.BASELINE, **overrides) -> HierarchyConfig:
        return HierarchyConfig(
            num_cores=4,
            l1=CacheGeometry(num_sets=2, ways=2, hit_latency=4),
            l2=CacheGeometry(num_sets=4, ways=2, hit_latency=12),
            l3=CacheGeometry(num_sets=16, ways=4, hit_latency=24, replacement_policy=ReplacementPolicy.LRU),
            mode=mode,
            **overrides,
        )

    return build


@pytest.fixture
def make_sim(small_config) -> Callable[..., HierarchySim]:
    def build(
        mode: MitigationMode = MitigationMode.BASELINE,
        detector: Optional[AdtGrid] = None,
        record_log: bool = False,
        **overrides,
    ) -> HierarchySim:
        return HierarchySim(small_config(mode, **overrides), detector=detector, record_log=record_log)

    return build


@pytest.fixture
def desk_sim() -> Callable[..., HierarchySim]:
    """Default geometry with the 1MB desk-scale L3."""

    def build(mode: MitigationMode = MitigationMode.BASELINE, detector: Optional[AdtGrid] = None) -> HierarchySim:
        return HierarchySim(HierarchyConfig.desk_scale(mode=mode), detector=detector)

    return build


@pytest.fixture
def random_ops() -> Callable[..., List[Op]]:
    """Seeded random operation scripts over a small address pool."""

    def build(
        seed: int,
        count: int,
        cores: int = 4,
        lines: int = 96,
        kinds=(OpKind.READ, OpKind.CLFLUSH, OpKind.WRITE, OpKind.NT_STORE),
        weights=(6, 2, 1, 1),
    ) -> List[Op]:
        rng = random.Random(seed)
        ops = []
        for _ in range(count):
            kind = rng.choices(kinds, weights=weights)[0]
            addr = BASE + rng.randrange(lines) * 64
            data = None
            if kind in (OpKind.WRITE, OpKind.NT_STORE):
                # Small value space so identical rewrites happen too.
                data = bytes([rng.randrange(4)]) * 64
            ops.append(Op(rng.randrange(cores), kind, addr, data))
        return ops

    return build
