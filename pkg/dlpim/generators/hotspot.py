#!/usr/bin/env python3

from typing import Iterator

from dlpim.exceptions import GeneratorError
from dlpim.generators.base import BaseGenerator, REGION_ROW
from dlpim.trace import TraceRecord


class GeneratorHotspot(BaseGenerator):
    """A fraction p of all accesses goes to blocks homed at one vault. Each
    core has its own hot blocks unless the pool is shared."""
    uid = 'hotspot'
    name = 'Hotspot'
    description = 'Most accesses target blocks that live in a single vault.'
    defaults = {'n': 10_000, 'p': 0.8, 'hot_vault': 0, 'hot_blocks': 64,
                'shared': False, 'blocks': 1 << 16, 'w': 0.0, 'delta': 0,
                'cores': None}

    def validate(self):
        super().validate()
        self._fraction('p')
        self._positive_int('hot_blocks')
        self._positive_int('blocks')
        self._positive_int('delta', allow_zero=True)
        self._positive_int('hot_vault', allow_zero=True)
        if self.params['hot_vault'] >= self.vault_count:
            raise GeneratorError(f'Hot vault {self.params["hot_vault"]} does '
                                 f'not exist')

    def hot_block(self, core: int, index: int) -> int:
        pool = self.params['hot_blocks']
        row = REGION_ROW + index
        if not self.params['shared']:
            row += core * pool
        return self.block_at(row, self.params['hot_vault'])

    def generate(self) -> Iterator[TraceRecord]:
        n = self.params['n']
        hot = self.rng.random(n) < self.params['p']
        hot_index = self.rng.integers(0, self.params['hot_blocks'], n)
        cold = self.rng.integers(0, self.params['blocks'], n)
        writes = self.ops(n)
        for i in range(n):
            core = i % self.cores
            block = self.hot_block(core, hot_index[i]) if hot[i] else cold[i]
            yield self.record(core, writes[i], block)
