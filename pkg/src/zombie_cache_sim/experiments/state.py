"""Scenario execution state."""

from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from zombie_cache_sim.attacks.models import AttackReport
from zombie_cache_sim.detection.adt import AttackAlarm
from zombie_cache_sim.hierarchy.models import RunLogRecord


class ScenarioStatus(str, Enum):
    """Scenario execution status."""

    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"


@dataclass
class ExperimentOutput:
    """What an experiment produced, before anything is written."""

    header: Tuple[str, ...]
    rows: List[tuple] = field(default_factory=list)
    headline: str = ""
    report: Optional[AttackReport] = None
    svg: Optional[str] = None
    alarms: List[AttackAlarm] = field(default_factory=list)
    run_log: List[RunLogRecord] = field(default_factory=list)
    metrics_text: Optional[str] = None
    metadata: Dict[str, Any] = field(default_factory=dict)


@dataclass
class ScenarioResult:
    """Result of one scenario."""

    name: str
    experiment: str
    mode: str
    status: ScenarioStatus
    output: Optional[ExperimentOutput] = None
    error_message: Optional[str] = None
    started_at: Optional[datetime] = None
    completed_at: Optional[datetime] = None
    files: List[str] = field(default_factory=list)

    @property
    def headline(self) -> str:
        if self.status == ScenarioStatus.FAILED:
            return self.error_message or "failed"
        return self.output.headline if self.output else ""

    def to_dict(self) -> Dict[str, Any]:
        """Convert result to dictionary."""
        return {
            "name": self.name,
            "experiment": self.experiment,
            "mode": self.mode,
            "status": self.status.value,
            "headline": self.headline,
            "error_message": self.error_message,
            "started_at": self.started_at.isoformat() if self.started_at else None,
            "completed_at": self.completed_at.isoformat() if self.completed_at else None,
            "files": self.files,
        }
