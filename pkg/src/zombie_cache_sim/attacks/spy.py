"""Flush+Reload spy primitives."""

from typing import Any, Callable, Dict, Iterable, Iterator, List, NamedTuple, Optional, Sequence, Tuple

from zombie_cache_sim.attacks.models import Inference, SpyConfig
from zombie_cache_sim.hierarchy.simulator import HierarchySim


class VictimStep(NamedTuple):
    """
    One victim operation.

    `window` runs between the spy's flush and reload. `tail` is the part of
    the operation that follows the reload when the step closes a round.
    """

    window: Callable[[], None]
    tail: Optional[Callable[[], None]] = None


class Observation(NamedTuple):
    """Reload results of one flush-reload round."""

    first_step: int
    last_step: int
    cycles: List[int]
    inferences: List[Inference]

    @property
    def hit_indexes(self) -> List[int]:
        """Positions of the probes that reloaded as hits."""
        return [i for i, inferred in enumerate(self.inferences) if inferred == Inference.HIT]


def spy_probe(sim: HierarchySim, addr: int, spy_core: int, hit_threshold: int) -> Inference:
    """
    Reload one line on the spy core and classify the latency.

    Args:
        sim: Simulator
        addr: Probe address
        spy_core: Core the spy runs on
        hit_threshold: Latency at or below which the reload counts as a hit

    Returns:
        Inferred hit or miss
    """
    response = sim.read(spy_core, addr)
    return Inference.HIT if response.latency <= hit_threshold else Inference.MISS


class Spy:
    """A spy monitoring a fixed set of probe addresses."""

    def __init__(self, sim: HierarchySim, config: SpyConfig):
        config.validate_against(sim.config)
        self.sim = sim
        self.config = config
        self.hits: Dict[int, int] = {addr: 0 for addr in config.probe_addrs}

    @classmethod
    def for_sim(
        cls,
        sim: HierarchySim,
        probe_addrs: Sequence[int],
        *,
        core: int,
        hit_threshold: Optional[int] = None,
        wait_interval: int = 1,
        rounds: int = 0,
    ) -> "Spy":
        """Spy whose threshold defaults to the midpoint of the machine's latencies."""
        kwargs: Dict[str, Any] = {
            "probe_addrs": list(probe_addrs),
            "core": core,
            "wait_interval": wait_interval,
            "rounds": rounds,
        }
        if hit_threshold is not None:
            kwargs["hit_threshold"] = hit_threshold
        return cls(sim, SpyConfig.for_config(sim.config, **kwargs))

    def flush_all(self) -> None:
        for addr in self.config.probe_addrs:
            self.sim.clflush(self.config.core, addr)

    def reload(self, addr: int) -> Inference:
        inferred = spy_probe(self.sim, addr, self.config.core, self.config.hit_threshold)
        if inferred == Inference.HIT:
            self.hits[addr] = self.hits.get(addr, 0) + 1
        return inferred

    def monitor(self, steps: Iterable[VictimStep]) -> Iterator[Observation]:
        """
        Interleave victim steps with flush-reload rounds.

        A round flushes every probe, runs `wait_interval` steps and reloads
        every probe right after the window of its last step. Steps inside a
        round run their tails before the next step starts. After `rounds`
        rounds (0 means no limit) the remaining steps run unobserved.

        Yields:
            One observation per round, in order
        """
        wait = self.config.wait_interval
        limit = self.config.rounds
        done = 0
        pending: List[VictimStep] = []
        first = 0

        for index, step in enumerate(steps):
            if limit and done >= limit:
                _run(step)
                continue
            if not pending:
                self.flush_all()
                first = index
            pending.append(step)
            if len(pending) < wait:
                step.window()
                if step.tail is not None:
                    step.tail()
                continue
            yield self._close_round(step, first, index)
            pending = []
            done += 1

        if pending:
            # Partial last round: reload after whatever ran.
            cycles, inferences = self._reload_round()
            yield Observation(first, first + len(pending) - 1, cycles, inferences)

    def _close_round(self, step: VictimStep, first: int, last: int) -> Observation:
        step.window()
        cycles, inferences = self._reload_round()
        if step.tail is not None:
            step.tail()
        return Observation(first, last, cycles, inferences)

    def _reload_round(self) -> Tuple[List[int], List[Inference]]:
        cycles: List[int] = []
        inferences: List[Inference] = []
        for addr in self.config.probe_addrs:
            cycles.append(self.sim.cycle)
            inferences.append(self.reload(addr))
        return cycles, inferences

    @property
    def total_hits(self) -> int:
        return sum(self.hits.values())


def _run(step: VictimStep) -> None:
    step.window()
    if step.tail is not None:
        step.tail()
