"""Attack models."""

from enum import Enum
from typing import Any, Dict, List, Tuple

from pydantic import BaseModel, Field

from zombie_cache_sim.hierarchy.models import HierarchyConfig, MitigationMode
from zombie_cache_sim.exceptions import InvalidInputError

VICTIM_CORE = 0
SPY_CORE = 1


class AttackKind(str, Enum):
    """Attack workloads."""

    AES = "aes"
    RSA = "rsa"
    FW = "fw"
    COVERT = "covert"


class Inference(str, Enum):
    """What the spy concludes from one reload."""

    HIT = "hit"
    MISS = "miss"


class SpyConfig(BaseModel):
    """Flush+Reload spy parameters."""

    probe_addrs: List[int] = Field(default_factory=list, description="Monitored line addresses")
    wait_interval: int = Field(default=1, ge=1, description="Victim operations per flush-reload round")
    hit_threshold: int = Field(..., description="Reload latency at or below which the spy infers a hit")
    rounds: int = Field(default=0, ge=0, description="Flush-reload rounds to observe, 0 for no limit")
    core: int = Field(default=SPY_CORE, ge=0, description="Spy core")

    @classmethod
    def for_config(cls, config: HierarchyConfig, **kwargs: Any) -> "SpyConfig":
        """Spy with the threshold halfway between hit and miss latency."""
        kwargs.setdefault("hit_threshold", (config.hit_latency + config.miss_latency) // 2)
        spy = cls(**kwargs)
        spy.validate_against(config)
        return spy

    def validate_against(self, config: HierarchyConfig) -> None:
        """Threshold must separate the two latency modes."""
        if not config.hit_latency < self.hit_threshold < config.miss_latency:
            raise InvalidInputError(
                f"hit_threshold {self.hit_threshold} must lie strictly between "
                f"{config.hit_latency} and {config.miss_latency}"
            )


class AttackReport(BaseModel):
    """Outcome of one attack run."""

    kind: AttackKind = Field(..., description="Attack workload")
    mode: MitigationMode = Field(..., description="Mitigation mode of the run")
    hit_counts: List[List[int]] = Field(default_factory=list, description="Raw spy hits [p0][line] (AES)")
    heatmap: List[List[float]] = Field(default_factory=list, description="Normalized hits [p0][line] (AES)")
    recovered_lines: List[int] = Field(default_factory=list, description="Argmax line per p0, -1 if no hits (AES)")
    timeline: List[Tuple[int, str]] = Field(default_factory=list, description="(cycle, probe) spy hits (RSA)")
    confusion: List[List[float]] = Field(default_factory=list, description="Row-percent matrix (FW)")
    sent_bits: List[int] = Field(default_factory=list, description="Transmitted bits (covert)")
    decoded_bits: List[int] = Field(default_factory=list, description="Bits recovered by the spy")
    recovered_bits: int = Field(default=0, ge=0, description="Key or message bits recovered correctly")
    accuracy: float = Field(default=0.0, ge=0.0, le=1.0, description="Fraction recovered correctly")
    spy_hits: int = Field(default=0, ge=0, description="Total inferred hits")
    victim_cycles: int = Field(default=0, ge=0)
    spy_cycles: int = Field(default=0, ge=0)
    metadata: Dict[str, Any] = Field(default_factory=dict)

    def headline(self) -> str:
        """One-line summary for the run table."""
        if self.kind == AttackKind.AES:
            return f"correct_p0={self.metadata.get('correct_p0', 0)} spy_hits={self.spy_hits}"
        if self.kind == AttackKind.FW:
            diag = [round(self.confusion[i][i], 1) for i in range(len(self.confusion))]
            return f"diagonal={diag}"
        return f"accuracy={self.accuracy:.4f} spy_hits={self.spy_hits}"

