"""
Zombie Cache Sim - Flush+Reload mitigation on a zombie-aware cache hierarchy

A deterministic multi-core cache simulator that tracks lines invalidated by
clflush ("zombies"), closes the Flush+Reload timing channel, reproduces the
classic attacks against it and evaluates the analytical slowdown model.
"""

__version__ = "0.1.0"
__author__ = "Your Name"
