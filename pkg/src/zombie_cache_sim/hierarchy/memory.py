"""Flat backing memory."""

from typing import Dict

from zombie_cache_sim.cache.models import LINE_SIZE


def default_contents(addr: int) -> bytes:
    """Initial contents of a never-written line: its address repeated."""
    return addr.to_bytes(8, "little") * (LINE_SIZE // 8)


class BackingMemory:
    """Line-granular memory; only written lines are stored."""

    def __init__(self) -> None:
        self._lines: Dict[int, bytes] = {}
        self.reads = 0
        self.writes = 0

    def read(self, addr: int) -> bytes:
        self.reads += 1
        return self._lines.get(addr) or default_contents(addr)

    def write(self, addr: int, data: bytes) -> None:
        self.writes += 1
        self._lines[addr] = data

    def peek(self, addr: int) -> bytes:
        """Read without counting."""
        return self._lines.get(addr) or default_contents(addr)

    def snapshot(self) -> Dict[int, bytes]:
        """Copy of every line that was ever written."""
        return dict(self._lines)
