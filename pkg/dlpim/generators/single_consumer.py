#!/usr/bin/env python3

from typing import Iterator

from dlpim.exceptions import GeneratorError
from dlpim.generators.base import BaseGenerator, REGION_ROW
from dlpim.trace import TraceRecord


class GeneratorSingleConsumer(BaseGenerator):
    """One core cycles over a few remote blocks, touching each of them
    `reuse` times. Block j falls in subscription table set j."""
    uid = 'single_consumer'
    name = 'Single consumer'
    description = 'A single core repeatedly reads a small set of remote blocks.'
    defaults = {'core': 0, 'blocks': 16, 'reuse': 64, 'w': 0.0, 'delta': 0}

    def validate(self):
        super().validate()
        self._positive_int('blocks')
        self._positive_int('reuse')
        self._positive_int('delta', allow_zero=True)
        self._positive_int('core', allow_zero=True)
        if self.params['core'] >= self.vault_count:
            raise GeneratorError(f'Core {self.params["core"]} does not exist')
        if self.vault_count < 2:
            raise GeneratorError('A single consumer needs a remote vault')

    def remote_home(self, index: int) -> int:
        core = self.params['core']
        return (core + 1 + index % (self.vault_count - 1)) % self.vault_count

    def generate(self) -> Iterator[TraceRecord]:
        count, reuse = self.params['blocks'], self.params['reuse']
        blocks = [self.block_at(REGION_ROW + j, self.remote_home(j))
                  for j in range(count)]
        writes = self.ops(count * reuse)
        for i in range(count * reuse):
            yield self.record(self.params['core'], writes[i],
                              blocks[i % count])
