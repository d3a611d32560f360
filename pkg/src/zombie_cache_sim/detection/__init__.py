"""Zombie-based attack detection."""

from zombie_cache_sim.detection.adt import COUNTER_MAX, AdtGrid, AttackAlarm

__all__ = ["COUNTER_MAX", "AdtGrid", "AttackAlarm"]
