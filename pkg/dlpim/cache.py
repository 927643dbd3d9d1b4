#!/usr/bin/env python3

from collections import OrderedDict


class L1Filter:
    """Private per core L1 data cache used to filter raw, pre cache traces.
    Write-through and no-allocate on writes, so every write still reaches
    memory and only read hits are filtered out."""

    def __init__(self, size_bytes: int = 32 * 1024, ways: int = 8,
                 line_bytes: int = 64):
        self.ways = ways
        self.line_bytes = line_bytes
        self.set_count = max(1, size_bytes // (ways * line_bytes))
        self.sets: list[OrderedDict[int, None]] = [
            OrderedDict() for _ in range(self.set_count)]
        self.hits = 0
        self.misses = 0

    def access(self, addr: int, write: bool = False) -> bool:
        """Looks a byte address up, updating the LRU order. Returns whether
        the access hit."""
        line = addr // self.line_bytes
        lines = self.sets[line % self.set_count]

        if line in lines:
            lines.move_to_end(line)
            self.hits += 1
            return True

        self.misses += 1
        if not write:
            lines[line] = None
            if len(lines) > self.ways:
                lines.popitem(last=False)

        return False
