"""Spy inferring which of four functions a victim called."""

import math
from functools import partial
from typing import Iterator, List, Optional

import numpy as np
import structlog

from zombie_cache_sim.attacks.models import SPY_CORE, VICTIM_CORE, AttackKind, AttackReport
from zombie_cache_sim.attacks.spy import Spy, VictimStep
from zombie_cache_sim.attacks.victim import CODE_BASE, Victim, line_at
from zombie_cache_sim.cache.models import LINE_SIZE
from zombie_cache_sim.exceptions import InvalidInputError
from zombie_cache_sim.hierarchy.simulator import HierarchySim

logger = structlog.get_logger(__name__)

NUM_FUNCTIONS = 4
INSTRUCTION_BYTES = 4
FUNCTION_STRIDE_LINES = 1024
BLOCK_LINES = 8
HELPER_LINES = 16
# Probability range for a basic block (or the helper call) to run.
BRANCH_BIAS = (0.25, 0.95)

FUNCTIONS_BASE = CODE_BASE + 0x10_0000
HELPER_BASE = CODE_BASE + 0x18_0000


def _entry_point(function: int) -> int:
    return line_at(FUNCTIONS_BASE, function * FUNCTION_STRIDE_LINES)


class FunctionBodies:
    """
    Control flow of the four victim functions.

    Each body is a chain of basic blocks. The first block always runs; every
    other block runs with a per-function bias, and each function calls a
    helper shared by all four with its own bias. Branch outcomes come from a
    generator seeded apart from the secrets.
    """

    def __init__(self, body_lines: int, seed: int):
        self.rng = np.random.default_rng([seed, 1])
        self.entries = [_entry_point(f) for f in range(NUM_FUNCTIONS)]
        self.blocks = [
            [
                [entry + LINE_SIZE * (1 + i) for i in range(start, min(start + BLOCK_LINES, body_lines))]
                for start in range(0, body_lines, BLOCK_LINES)
            ]
            for entry in self.entries
        ]
        self.helper = [line_at(HELPER_BASE, i) for i in range(HELPER_LINES)]
        low, high = BRANCH_BIAS
        block_count = len(self.blocks[0])
        self.block_bias = self.rng.uniform(low, high, size=(NUM_FUNCTIONS, block_count))
        if block_count:
            self.block_bias[:, 0] = 1.0
        self.helper_bias = self.rng.uniform(low, high, size=NUM_FUNCTIONS)
        self.lines_touched = 0

    def path(self, function: int) -> List[int]:
        """Lines one call executes, entry point first."""
        taken = self.rng.random(len(self.blocks[function])) < self.block_bias[function]
        lines = [self.entries[function]]
        for block, runs in zip(self.blocks[function], taken):
            if runs:
                lines.extend(block)
        if self.rng.random() < self.helper_bias[function]:
            lines.extend(self.helper)
        return lines

    def call(self, victim: Victim, function: int) -> None:
        lines = self.path(function)
        self.lines_touched += len(lines)
        victim.touch_all(lines)


def run_function_watcher(
    sim: HierarchySim,
    calls: int,
    *,
    instructions_per_function: int = 5000,
    seed: int = 0,
    warmup: bool = True,
    victim_core: int = VICTIM_CORE,
    spy_core: int = SPY_CORE,
    hit_threshold: Optional[int] = None,
    wait_interval: int = 1,
    spy_rounds: int = 0,
) -> AttackReport:
    """
    Victim calls one of four functions chosen by a secret; the spy watches
    the four entry points.

    The spy's guess is the single entry point that reloaded as a hit. With no
    hit or several hits it guesses uniformly at random. A round's guess is
    scored against the secret of the call that closed it.

    Args:
        sim: Simulator
        calls: Number of victim calls
        instructions_per_function: Body size driving the per-call line footprint
        seed: Seed for secrets, guesses and branch outcomes
        warmup: Call every function once before the spy starts
        victim_core: Core running the victim
        spy_core: Core running the spy
        hit_threshold: Reload latency separating hit from miss
        wait_interval: Calls per flush-reload round
        spy_rounds: Flush-reload rounds the spy observes, 0 for all

    Returns:
        AttackReport whose confusion matrix rows are true functions and
        columns inferred functions, in percent of observed rounds
    """
    if calls < 0:
        raise InvalidInputError("calls must be non-negative")
    body_lines = math.ceil(instructions_per_function * INSTRUCTION_BYTES / LINE_SIZE)
    if body_lines >= FUNCTION_STRIDE_LINES:
        raise InvalidInputError(f"function body of {body_lines} lines overlaps the next function")

    bodies = FunctionBodies(body_lines, seed)
    spy = Spy.for_sim(
        sim,
        bodies.entries,
        core=spy_core,
        hit_threshold=hit_threshold,
        wait_interval=wait_interval,
        rounds=spy_rounds,
    )
    victim = Victim(sim, victim_core)
    rng = np.random.default_rng(seed)

    if warmup:
        for function in range(NUM_FUNCTIONS):
            bodies.call(victim, function)
    warmup_lines = bodies.lines_touched

    secrets = [int(s) for s in rng.integers(0, NUM_FUNCTIONS, size=calls)]

    def victim_calls() -> Iterator[VictimStep]:
        for secret in secrets:
            yield VictimStep(partial(bodies.call, victim, secret))

    counts = np.zeros((NUM_FUNCTIONS, NUM_FUNCTIONS), dtype=np.int64)
    correct = 0
    observed = 0
    for observation in spy.monitor(victim_calls()):
        secret = secrets[observation.last_step]
        hits = observation.hit_indexes
        guess = hits[0] if len(hits) == 1 else int(rng.integers(0, NUM_FUNCTIONS))
        counts[secret, guess] += 1
        correct += int(guess == secret)
        observed += 1

    row_totals = counts.sum(axis=1, keepdims=True)
    percent = np.divide(counts * 100.0, row_totals, out=np.zeros_like(counts, dtype=float), where=row_totals > 0)
    confusion: List[List[float]] = percent.tolist()
    call_lines = bodies.lines_touched - warmup_lines

    report = AttackReport(
        kind=AttackKind.FW,
        mode=sim.mode,
        confusion=confusion,
        recovered_bits=correct,
        accuracy=correct / observed if observed else 0.0,
        spy_hits=spy.total_hits,
        victim_cycles=sim.stats.core(victim_core).cycles,
        spy_cycles=sim.stats.core(spy_core).cycles,
        metadata={
            "calls": calls,
            "observed_rounds": observed,
            "counts": counts.tolist(),
            "body_lines": body_lines,
            "mean_call_lines": call_lines / calls if calls else 0.0,
            "victim_digest": victim.digest,
        },
    )
    logger.info("function_watcher_completed", mode=sim.mode.value, calls=calls, accuracy=report.accuracy)
    return report
