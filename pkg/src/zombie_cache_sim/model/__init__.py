"""Analytical slowdown model and synthetic workloads."""

from zombie_cache_sim.model.analytic import (
    ModelParams,
    SweepRow,
    alpha_zbm,
    default_grid,
    l3lat_base,
    l3lat_norm,
    l3lat_zbm,
    slowdown,
    storage_overhead,
    sweep,
)
from zombie_cache_sim.model.workloads import (
    Op,
    WorkloadResult,
    benign_suite,
    flush_heavy_suite,
    flush_reload_workload,
    measure_l3lat,
    run_workload,
)

__all__ = [
    "ModelParams",
    "Op",
    "SweepRow",
    "WorkloadResult",
    "alpha_zbm",
    "benign_suite",
    "default_grid",
    "flush_heavy_suite",
    "flush_reload_workload",
    "l3lat_base",
    "l3lat_norm",
    "l3lat_zbm",
    "measure_l3lat",
    "run_workload",
    "slowdown",
    "storage_overhead",
    "sweep",
]
