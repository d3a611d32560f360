"""Flush+Reload attack workloads."""

from zombie_cache_sim.attacks.aes import normalize_heatmaps, run_aes_attack
from zombie_cache_sim.attacks.covert import run_covert_channel
from zombie_cache_sim.attacks.function_watcher import run_function_watcher
from zombie_cache_sim.attacks.models import AttackKind, AttackReport, Inference, SpyConfig
from zombie_cache_sim.attacks.rsa import decode_timeline, every_eighth_bit_key, run_rsa_attack
from zombie_cache_sim.attacks.spy import Observation, Spy, VictimStep, spy_probe

__all__ = [
    "AttackKind",
    "AttackReport",
    "Inference",
    "Observation",
    "Spy",
    "SpyConfig",
    "VictimStep",
    "decode_timeline",
    "every_eighth_bit_key",
    "normalize_heatmaps",
    "run_aes_attack",
    "run_covert_channel",
    "run_function_watcher",
    "run_rsa_attack",
    "spy_probe",
]
