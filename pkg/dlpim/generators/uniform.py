#!/usr/bin/env python3

from typing import Iterator

from dlpim.generators.base import BaseGenerator
from dlpim.trace import TraceRecord


class GeneratorUniform(BaseGenerator):
    """Uniformly random blocks over a flat address range."""
    uid = 'uniform'
    name = 'Uniform random'
    description = 'Every core touches blocks chosen uniformly at random.'
    defaults = {'n': 10_000, 'blocks': 1 << 16, 'w': 0.0, 'delta': 0,
                'cores': None}

    def validate(self):
        super().validate()
        self._positive_int('blocks')
        self._positive_int('delta', allow_zero=True)

    def generate(self) -> Iterator[TraceRecord]:
        n = self.params['n']
        blocks = self.rng.integers(0, self.params['blocks'], n)
        writes = self.ops(n)
        for i in range(n):
            yield self.record(i % self.cores, writes[i], blocks[i])
