"""Closed-form L3 latency and slowdown model for zombie-based mitigation.

Baseline L3 latency is t_c + alpha * t_m. Under the mitigation, hits to lines
that were flushed and reloaded with identical content are served at miss
latency, raising the effective miss rate to alpha + (1 - alpha) * F * R.
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from zombie_cache_sim.cache.models import LINE_SIZE


class ModelParams(BaseModel):
    """Inputs of the latency model."""

    alpha: float = Field(default=0.5, ge=0.0, le=1.0, description="Baseline L3 miss rate")
    t_c: float = Field(default=24.0, gt=0.0, description="L3 hit latency in cycles")
    t_m: float = Field(default=145.0, gt=0.0, description="Memory latency in cycles")
    F: float = Field(default=0.0, ge=0.0, le=1.0, description="Fraction of accesses to flushed lines")
    R: float = Field(default=0.0, ge=0.0, le=1.0, description="Probability the reload is identical")
    mem_time_fraction: float = Field(
        default=0.5, ge=0.0, le=1.0, description="Share of baseline time spent on L3 and memory"
    )


@dataclass(frozen=True)
class SweepRow:
    """One grid point of the sweep."""

    F: float
    R: float
    l3lat_norm: float
    slowdown: float

    def as_row(self) -> tuple:
        return (self.F, self.R, self.l3lat_norm, self.slowdown)


def l3lat_base(p: ModelParams) -> float:
    """Average L3 latency without mitigation."""
    return p.t_c + p.alpha * p.t_m


def alpha_zbm(p: ModelParams) -> float:
    """Effective miss rate under the mitigation."""
    return p.alpha + (1.0 - p.alpha) * p.F * p.R


def l3lat_zbm(p: ModelParams) -> float:
    """Average L3 latency under the mitigation."""
    return p.t_c + alpha_zbm(p) * p.t_m


def l3lat_norm(p: ModelParams) -> float:
    """Mitigated over baseline L3 latency."""
    return l3lat_zbm(p) / l3lat_base(p)


def slowdown(p: ModelParams) -> float:
    """Execution-time ratio when only L3/memory time stretches."""
    return 1.0 + (l3lat_norm(p) - 1.0) * p.mem_time_fraction


def default_grid(step: float = 0.1) -> List[float]:
    """Points 0.0 .. 1.0 inclusive; step must divide 1.0."""
    if not 0.0 < step <= 1.0:
        raise ValueError(f"step must be in (0, 1], got {step}")
    count = int(round(1.0 / step))
    if not math.isclose(count * step, 1.0, rel_tol=1e-9):
        raise ValueError(f"step {step} does not divide 1.0")
    return [round(v, 10) for v in np.linspace(0.0, 1.0, count + 1)]


def sweep(
    f_grid: Sequence[float],
    r_grid: Sequence[float],
    params: Optional[ModelParams] = None,
) -> List[SweepRow]:
    """
    Evaluate the model on the cross product of F and R.

    Args:
        f_grid: Flush fractions
        r_grid: Identical-reload probabilities
        params: Remaining parameters (F and R are overwritten)

    Returns:
        Rows in F-major order; empty if either grid is empty
    """
    base = params or ModelParams()
    rows = []
    for f in f_grid:
        for r in r_grid:
            point = base.model_copy(update={"F": f, "R": r})
            rows.append(SweepRow(F=f, R=r, l3lat_norm=l3lat_norm(point), slowdown=slowdown(point)))
    return rows


def storage_overhead(l3_bytes: int, num_cores: int, line_size: int = LINE_SIZE) -> Dict[str, float]:
    """
    Hardware cost of the mitigation.

    Returns:
        Bytes for Z bits, for Z plus core-id bits, for the detection table,
        the line-compare gate estimate and Z-bit share of L3 capacity
    """
    lines = l3_bytes // line_size
    core_bits = max(1, math.ceil(math.log2(num_cores))) if num_cores > 1 else 0
    line_bits = line_size * 8
    return {
        "zbm_bytes": lines / 8,
        "zbmx_bytes": lines * (1 + core_bits) / 8,
        "adt_bytes": num_cores * num_cores * 4 / 8,
        "compare_gates": line_bits + line_bits - 1,
        "zbm_fraction": 1 / line_bits,
    }
