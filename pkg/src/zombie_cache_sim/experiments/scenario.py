"""Scenario definitions and the sectioned key = value config parser.

Example::

    # AES attack, with and without mitigation
    [aes_base]
    experiment = aes
    mode = baseline
    aes.encryptions = 200

    [aes_zbm]
    experiment = aes
    mode = zbm
"""

import re
from enum import Enum
from typing import Any, Callable, Dict, List, Optional

from pydantic import BaseModel, Field, ValidationError

from zombie_cache_sim.cache.models import CacheGeometry, IndexingMode, ReplacementPolicy
from zombie_cache_sim.config import Settings, get_settings
from zombie_cache_sim.detection.adt import COUNTER_MAX, AdtGrid
from zombie_cache_sim.exceptions import ConfigError
from zombie_cache_sim.hierarchy.models import DEFAULT_L3_INDEX_KEY, KIB, HierarchyConfig, MitigationMode
from zombie_cache_sim.hierarchy.simulator import HierarchySim
from zombie_cache_sim.model.analytic import default_grid

SEED_LIMIT = 2**64
_NAME_RE = re.compile(r"^[A-Za-z0-9_.-]+$")
# A comment starts at a # that begins the line or follows whitespace.
_COMMENT_RE = re.compile(r"(?:^|\s)#.*$")


class ExperimentKind(str, Enum):
    """Experiments a scenario can run."""

    AES = "aes"
    RSA = "rsa"
    FW = "fw"
    MODEL_SWEEP = "model-sweep"
    BENIGN = "benign"
    FLUSHFLUSH = "flushflush"
    COVERT = "covert"


class Scenario(BaseModel):
    """One experiment run."""

    name: str = Field(..., description="Scenario name, also the output file stem")
    experiment: ExperimentKind = Field(..., description="Experiment to run")
    mode: MitigationMode = Field(default=MitigationMode.BASELINE, description="Mitigation mode")
    seed: int = Field(default=2019, ge=0, lt=SEED_LIMIT, description="Run seed")
    overrides: Dict[str, Any] = Field(default_factory=dict, description="Geometry and parameter overrides")
    output_dir: Optional[str] = Field(default=None, description="Output directory for this scenario")
    zbd: bool = Field(default=False, description="Attach the attack detection table")
    count_flush_on_zombie: bool = Field(default=False, description="Detection table also counts flushes on zombies")
    run_log: bool = Field(default=False, description="Write the per-operation run log")
    constant_time_flush: bool = False
    zombie_gated_flush: bool = False
    zombie_tracking: bool = True
    paper_scale: bool = Field(default=False, description="Full-size L3 and workload counts")
    line: int = Field(default=0, ge=0, description="Config line of the section header")

    def option(self, key: str, default: Any = None) -> Any:
        return self.overrides.get(key, default)


def _int(value: str) -> int:
    return int(value.replace("_", ""), 0)


def _float(value: str) -> float:
    return float(value)


def _bool(value: str) -> bool:
    lowered = value.lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got '{value}'")


def _choice(*allowed: str) -> Callable[[str], str]:
    def parse(value: str) -> str:
        if value not in allowed:
            raise ValueError(f"expected one of {', '.join(allowed)}, got '{value}'")
        return value

    return parse


def _enum(enum_cls: type) -> Callable[[str], Any]:
    def parse(value: str) -> Any:
        try:
            return enum_cls(value.lower())
        except ValueError:
            names = ", ".join(member.value for member in enum_cls)
            raise ValueError(f"expected one of {names}, got '{value}'") from None

    return parse


OVERRIDE_SCHEMA: Dict[str, Callable[[str], Any]] = {
    "cores": _int,
    "mem_latency": _int,
    **{f"{level}.size": _int for level in ("l1", "l2", "l3")},
    **{f"{level}.ways": _int for level in ("l1", "l2", "l3")},
    **{f"{level}.latency": _int for level in ("l1", "l2", "l3")},
    **{f"{level}.policy": _enum(ReplacementPolicy) for level in ("l1", "l2", "l3")},
    "l3.indexing": _enum(IndexingMode),
    "l3.key": _int,
    "flush.resident": _int,
    "flush.absent": _int,
    "flush.constant": _int,
    "aes.encryptions": _int,
    "aes.k0": _int,
    "aes.p0_step": _int,
    "aes.rounds": _int,
    "aes.warmup": _bool,
    "rsa.bits": _int,
    "rsa.filler_lines": _int,
    "rsa.warmup": _bool,
    "fw.calls": _int,
    "fw.instructions": _int,
    "fw.warmup": _bool,
    "covert.bits": _int,
    "model.alpha": _float,
    "model.t_c": _float,
    "model.t_m": _float,
    "model.mem_time_fraction": _float,
    "model.step": _float,
    "model.accesses": _int,
    "adt.decay": _int,
    "adt.threshold": _int,
    "spy.core": _int,
    "spy.threshold": _int,
    "spy.wait_interval": _int,
    "spy.rounds": _int,
    "victim.core": _int,
    "benign.suite": _choice("benign", "flush_heavy", "all"),
}

_FLAGS = ("zbd", "count_flush_on_zombie", "run_log", "constant_time_flush", "zombie_gated_flush", "zombie_tracking")


def _parse_field(key: str, value: str, lineno: int) -> Any:
    if key == "experiment":
        try:
            return ExperimentKind(value.lower())
        except ValueError:
            raise ConfigError(f"unknown experiment '{value}'", line=lineno) from None
    if key == "mode":
        try:
            return MitigationMode(value.lower())
        except ValueError:
            raise ConfigError(f"unknown mode '{value}'", line=lineno) from None
    try:
        if key == "seed":
            seed = _int(value)
            if not 0 <= seed < SEED_LIMIT:
                raise ValueError(f"seed must be a 64-bit unsigned value, got {value}")
            return seed
        if key in _FLAGS:
            return _bool(value)
        if key == "output_dir":
            return value
        return OVERRIDE_SCHEMA[key](value)
    except ValueError as e:
        raise ConfigError(f"{key}: {e}", line=lineno) from None


def parse_config(
    text: str,
    default_seed: Optional[int] = None,
    paper_scale: bool = False,
    settings: Optional[Settings] = None,
) -> List[Scenario]:
    """
    Parse a scenario config.

    Args:
        text: Config text with one [name] section per scenario
        default_seed: Seed for scenarios that set none
        paper_scale: Use full-size defaults
        settings: Settings supplying defaults

    Returns:
        Scenarios in file order

    Raises:
        ConfigError: Malformed text, unknown names or keys, duplicates or
            out-of-range values; the message names the line
    """
    settings = settings or get_settings()
    seed = settings.DEFAULT_SEED if default_seed is None else default_seed
    scenarios: List[Scenario] = []
    names: Dict[str, int] = {}
    current: Optional[Dict[str, Any]] = None

    def close(section: Optional[Dict[str, Any]]) -> None:
        if section is not None:
            scenarios.append(_build_scenario(section, seed, paper_scale, settings))

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _COMMENT_RE.sub("", raw).strip()
        if not line:
            continue

        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError("malformed section header", line=lineno)
            name = line[1:-1].strip()
            if not _NAME_RE.match(name):
                raise ConfigError(f"invalid scenario name '{name}'", line=lineno)
            if name in names:
                raise ConfigError(f"duplicate scenario '{name}' (first defined on line {names[name]})", line=lineno)
            names[name] = lineno
            close(current)
            current = {"name": name, "line": lineno, "fields": {}, "overrides": {}, "lines": {}}
            continue

        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got '{line}'", line=lineno)
        if current is None:
            raise ConfigError("setting outside of a [scenario] section", line=lineno)

        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        if not value:
            raise ConfigError(f"empty value for '{key}'", line=lineno)
        if key in current["fields"] or key in current["overrides"]:
            raise ConfigError(f"duplicate key '{key}'", line=lineno)
        if key not in OVERRIDE_SCHEMA and key not in _FLAGS and key not in ("experiment", "mode", "seed", "output_dir"):
            raise ConfigError(f"unknown key '{key}'", line=lineno)

        parsed = _parse_field(key, value, lineno)
        target = "overrides" if key in OVERRIDE_SCHEMA else "fields"
        current[target][key] = parsed
        current["lines"][key] = lineno

    close(current)
    return scenarios


class OptionValueError(ValueError):
    """A scenario option outside its range, tied to the keys that set it."""

    def __init__(self, message: str, *keys: str):
        super().__init__(message)
        self.keys = keys


def _build_scenario(section: Dict[str, Any], seed: int, paper_scale: bool, settings: Settings) -> Scenario:
    lineno = section["line"]
    fields = dict(section["fields"])
    if "experiment" not in fields:
        raise ConfigError(f"scenario '{section['name']}' has no experiment", line=lineno)
    fields.setdefault("seed", seed)
    try:
        scenario = Scenario(
            name=section["name"],
            overrides=section["overrides"],
            paper_scale=paper_scale,
            line=lineno,
            **fields,
        )
        validate_scenario(scenario, settings)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(part) for part in first.get("loc", ()))
        raise ConfigError(f"scenario '{section['name']}': {where} {first['msg']}".strip(), line=lineno) from None
    except OptionValueError as e:
        # Report the last line that set one of the offending keys.
        key_lines = [section["lines"][key] for key in e.keys if key in section["lines"]]
        raise ConfigError(f"scenario '{section['name']}': {e}", line=max(key_lines, default=lineno)) from None
    except ValueError as e:
        raise ConfigError(f"scenario '{section['name']}': {e}", line=lineno) from None
    return scenario


def validate_scenario(scenario: Scenario, settings: Optional[Settings] = None) -> None:
    """
    Check that overrides produce a valid machine and core assignment.

    Raises:
        OptionValueError: An option is out of range
        ValueError: The overrides do not describe a valid machine
    """
    config = build_hierarchy_config(scenario, settings)
    spy = scenario.option("spy.core", 1)
    victim = scenario.option("victim.core", 0)
    for label, core in (("spy.core", spy), ("victim.core", victim)):
        if not 0 <= core < config.num_cores:
            raise OptionValueError(f"{label} {core} outside [0, {config.num_cores})", label, "cores")
    if spy == victim:
        raise OptionValueError("spy.core and victim.core must differ", "spy.core", "victim.core")
    threshold = scenario.option("adt.threshold", COUNTER_MAX)
    if not 1 <= threshold <= COUNTER_MAX:
        raise OptionValueError(f"adt.threshold must be in [1, {COUNTER_MAX}]", "adt.threshold")
    if scenario.option("adt.decay", 1) <= 0:
        raise OptionValueError("adt.decay must be positive", "adt.decay")
    for key in ("model.alpha", "model.mem_time_fraction"):
        if not 0.0 <= scenario.option(key, 0.0) <= 1.0:
            raise OptionValueError(f"{key} must be in [0, 1]", key)
    try:
        default_grid(scenario.option("model.step", 0.1))
    except ValueError as e:
        raise OptionValueError(f"model.step: {e}", "model.step") from None
    counts = ("aes.encryptions", "rsa.bits", "fw.calls", "covert.bits", "fw.instructions", "model.accesses", "spy.rounds")
    for key in counts:
        if scenario.option(key, 0) < 0:
            raise OptionValueError(f"{key} must be non-negative", key)
    if scenario.option("spy.wait_interval", 1) < 1:
        raise OptionValueError("spy.wait_interval must be at least 1", "spy.wait_interval")
    if not 0 <= scenario.option("aes.k0", 0) < 256:
        raise OptionValueError("aes.k0 must be a byte", "aes.k0")
    if scenario.option("aes.p0_step", 1) < 1:
        raise OptionValueError("aes.p0_step must be at least 1", "aes.p0_step")


def build_hierarchy_config(scenario: Scenario, settings: Optional[Settings] = None) -> HierarchyConfig:
    """
    Machine for a scenario: default latencies, the desk-scale L3 unless paper
    scale is requested, then the scenario's overrides.
    """
    settings = settings or get_settings()
    ov = scenario.option
    l3_default = settings.PAPER_L3_SIZE_BYTES if scenario.paper_scale else settings.DESK_L3_SIZE_BYTES
    l1 = CacheGeometry.from_capacity(
        ov("l1.size", 32 * KIB),
        ways=ov("l1.ways", 8),
        hit_latency=ov("l1.latency", 4),
        replacement_policy=ov("l1.policy", ReplacementPolicy.LRU),
    )
    l2 = CacheGeometry.from_capacity(
        ov("l2.size", 256 * KIB),
        ways=ov("l2.ways", 8),
        hit_latency=ov("l2.latency", 12),
        replacement_policy=ov("l2.policy", ReplacementPolicy.LRU),
    )
    l3_kwargs: Dict[str, Any] = {
        "replacement_policy": ov("l3.policy", ReplacementPolicy.SRRIP),
        "indexing": ov("l3.indexing", IndexingMode.KEYED_RANDOM),
    }
    l3_kwargs["index_key"] = ov("l3.key", DEFAULT_L3_INDEX_KEY)
    l3 = CacheGeometry.from_capacity(ov("l3.size", l3_default), ways=ov("l3.ways", 16), hit_latency=ov("l3.latency", 24), **l3_kwargs)
    return HierarchyConfig(
        num_cores=ov("cores", 8),
        l1=l1,
        l2=l2,
        l3=l3,
        mem_latency=ov("mem_latency", 145),
        mode=scenario.mode,
        constant_time_flush=scenario.constant_time_flush,
        zombie_gated_flush=scenario.zombie_gated_flush,
        zombie_tracking=scenario.zombie_tracking,
        resident_flush_latency=ov("flush.resident", 30),
        absent_flush_latency=ov("flush.absent", 10),
        constant_flush_latency=ov("flush.constant", 30),
    )


def build_detector(scenario: Scenario, config: HierarchyConfig, settings: Optional[Settings] = None) -> Optional[AdtGrid]:
    """Detection table for a scenario, if enabled."""
    if not scenario.zbd:
        return None
    settings = settings or get_settings()
    default_decay = settings.PAPER_ADT_DECAY_CYCLES if scenario.paper_scale else settings.DESK_ADT_DECAY_CYCLES
    return AdtGrid(
        num_cores=config.num_cores,
        decay_period=scenario.option("adt.decay", default_decay),
        alarm_threshold=scenario.option("adt.threshold", COUNTER_MAX),
        count_flush_on_zombie=scenario.count_flush_on_zombie,
    )


def build_sim(scenario: Scenario, settings: Optional[Settings] = None) -> HierarchySim:
    """Fresh simulator for a scenario."""
    config = build_hierarchy_config(scenario, settings)
    return HierarchySim(
        config,
        detector=build_detector(scenario, config, settings),
        record_log=scenario.run_log,
    )
