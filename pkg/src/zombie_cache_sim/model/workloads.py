"""Synthetic workloads driven through the hierarchy simulator."""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from zombie_cache_sim.cache.models import LINE_SIZE
from zombie_cache_sim.hierarchy.models import OpKind, StatsCounters
from zombie_cache_sim.hierarchy.simulator import HierarchySim

WORKLOAD_BASE = 0x1000_0000
DEVICE_CORE_OFFSET = 1


@dataclass(frozen=True)
class Op:
    """One scripted operation."""

    core: int
    kind: OpKind
    addr: int
    data: Optional[bytes] = None
    # Latency of this op contributes to the measured L3 latency.
    measure: bool = False


@dataclass
class WorkloadResult:
    """Outcome of running a script."""

    name: str
    total_cycles: int
    stats: StatsCounters
    measured_latencies: List[int] = field(default_factory=list)
    alarms: int = 0


def fill(seed: int, addr: int) -> bytes:
    """Deterministic non-default line contents."""
    return np.random.default_rng([seed, addr]).integers(0, 256, size=LINE_SIZE, dtype=np.uint8).tobytes()


def run_workload(sim: HierarchySim, ops: Sequence[Op], name: str = "workload") -> WorkloadResult:
    """
    Replay a script on a simulator.

    Measured ops record the L3 part of their latency (private-cache
    latencies subtracted).
    """
    private = sim.config.l1.hit_latency + sim.config.l2.hit_latency
    measured: List[int] = []
    for op in ops:
        if op.kind == OpKind.READ:
            latency = sim.read(op.core, op.addr).latency
        elif op.kind == OpKind.WRITE:
            latency = sim.write(op.core, op.addr, op.data).latency
        elif op.kind == OpKind.CLFLUSH:
            latency = sim.clflush(op.core, op.addr)
        else:
            latency = sim.nt_store(op.core, op.addr, op.data)
        if op.measure:
            measured.append(latency - private)
    return WorkloadResult(
        name=name,
        total_cycles=sim.cycle,
        stats=sim.snapshot_stats(),
        measured_latencies=measured,
        alarms=len(sim.detector.alarms) if sim.detector is not None else 0,
    )


def measure_l3lat(result: WorkloadResult) -> float:
    """Mean measured L3 latency."""
    if not result.measured_latencies:
        return 0.0
    return float(np.mean(result.measured_latencies))


def _addr(index: int, region: int = 0) -> int:
    return WORKLOAD_BASE + region * 0x0100_0000 + index * LINE_SIZE


def flush_reload_workload(
    alpha: float,
    F: float,
    R: float,
    *,
    accesses: int = 2000,
    seed: int = 0,
    flusher_core: int = 0,
    app_core: int = 1,
    device_core: int = 2,
) -> List[Op]:
    """
    Script whose measured L3 accesses have a chosen miss rate and flush mix.

    The app core reads each line once so every measured access reaches the
    L3. A fraction alpha are cold misses. Of the remaining baseline hits a
    fraction F target lines the flusher core flushed and reloaded first; a
    fraction R of those reloads bring back identical data, the rest see data
    rewritten by a device non-temporal store.
    """
    rng = np.random.default_rng(seed)
    misses = int(round(alpha * accesses))
    hits = accesses - misses
    flushed = int(round(hits * F))
    identical = int(round(flushed * R))
    kinds = (
        ["miss"] * misses
        + ["identical"] * identical
        + ["different"] * (flushed - identical)
        + ["hit"] * (hits - flushed)
    )
    order = rng.permutation(len(kinds))

    ops: List[Op] = []
    for index in order:
        kind = kinds[index]
        addr = _addr(int(index))
        if kind != "miss":
            ops.append(Op(flusher_core, OpKind.READ, addr))
        if kind in ("identical", "different"):
            ops.append(Op(flusher_core, OpKind.CLFLUSH, addr))
            if kind == "different":
                ops.append(Op(device_core, OpKind.NT_STORE, addr, fill(seed, addr)))
            ops.append(Op(flusher_core, OpKind.READ, addr))
        ops.append(Op(app_core, OpKind.READ, addr, measure=True))
    return ops


def stream_workload(lines: int = 4096, passes: int = 2, core: int = 0) -> List[Op]:
    """Sequential reads over a buffer."""
    return [Op(core, OpKind.READ, _addr(i, 1)) for _ in range(passes) for i in range(lines)]


def working_set_workload(
    lines: int = 2048, accesses: int = 20000, cores: int = 4, write_fraction: float = 0.3, seed: int = 0
) -> List[Op]:
    """Random reads and writes by several cores over a shared working set."""
    rng = np.random.default_rng(seed)
    picks = rng.integers(0, lines, size=accesses)
    owners = rng.integers(0, cores, size=accesses)
    writes = rng.random(accesses) < write_fraction
    ops = []
    for i, (line, core, is_write) in enumerate(zip(picks, owners, writes)):
        addr = _addr(int(line), 2)
        if is_write:
            ops.append(Op(int(core), OpKind.WRITE, addr, fill(seed + i, addr)))
        else:
            ops.append(Op(int(core), OpKind.READ, addr))
    return ops


def noncoherent_io_workload(buffers: int = 64, lines_per_buffer: int = 16, core: int = 0, device_core: int = 7) -> List[Op]:
    """
    Driver reads a DMA buffer, flushes it, the device rewrites it with
    non-temporal stores, and the driver reads the fresh data.
    """
    ops = []
    for buf in range(buffers):
        addrs = [_addr(buf * lines_per_buffer + i, 3) for i in range(lines_per_buffer)]
        ops.extend(Op(core, OpKind.READ, a) for a in addrs)
        ops.extend(Op(core, OpKind.CLFLUSH, a) for a in addrs)
        ops.extend(Op(device_core, OpKind.NT_STORE, a, fill(buf, a)) for a in addrs)
        ops.extend(Op(core, OpKind.READ, a) for a in addrs)
    return ops


def pmem_flush_workload(lines: int = 6144, core: int = 0) -> List[Op]:
    """
    Persist-style loop: write, flush, reload the same data, then revisit the
    whole buffer after it has left the private caches.
    """
    ops = []
    for i in range(lines):
        addr = _addr(i, 4)
        ops.append(Op(core, OpKind.WRITE, addr, fill(7, addr)))
        ops.append(Op(core, OpKind.CLFLUSH, addr))
        ops.append(Op(core, OpKind.READ, addr))
    ops.extend(Op(core, OpKind.READ, _addr(i, 4)) for i in range(lines))
    return ops


def benign_suite(num_cores: int = 8) -> Dict[str, Callable[[], List[Op]]]:
    """Workloads without a flush-then-identical-reload pattern."""
    device = num_cores - DEVICE_CORE_OFFSET
    return {
        "stream": stream_workload,
        "working_set": lambda: working_set_workload(cores=min(4, num_cores)),
        "noncoherent_io": lambda: noncoherent_io_workload(device_core=device),
    }


def flush_heavy_suite(num_cores: int = 8) -> Dict[str, Callable[[], List[Op]]]:
    """Workloads that flush and reload identical data on the same core."""
    return {"pmem_flush": pmem_flush_workload}
