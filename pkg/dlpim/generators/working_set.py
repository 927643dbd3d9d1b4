#!/usr/bin/env python3

from typing import Iterator

from dlpim.generators.base import BaseGenerator
from dlpim.trace import TraceRecord


class GeneratorWorkingSet(BaseGenerator):
    """Every core touches its own fixed size working set at random. A core's
    blocks sit on consecutive rows of the block grid, so they spread evenly
    over the subscription table sets, and live in random vaults."""
    uid = 'working_set'
    name = 'Working set'
    description = 'Private working sets of a given number of blocks per core.'
    defaults = {'n': 10_000, 'blocks': 4096, 'w': 0.0, 'delta': 0,
                'cores': None}

    def validate(self):
        super().validate()
        self._positive_int('blocks')
        self._positive_int('delta', allow_zero=True)

    def generate(self) -> Iterator[TraceRecord]:
        n, size = self.params['n'], self.params['blocks']
        homes = self.rng.integers(0, self.vault_count, (self.cores, size))
        offsets = self.rng.integers(0, size, n)
        writes = self.ops(n)
        for i in range(n):
            core = i % self.cores
            j = offsets[i]
            block = self.block_at(core * size + j, homes[core, j])
            yield self.record(core, writes[i], block)
