#!/usr/bin/env python3

from typing import Iterator

from dlpim.generators.base import BaseGenerator
from dlpim.internal_utils import ceil_div
from dlpim.trace import TraceRecord


class GeneratorStream(BaseGenerator):
    """Every core walks its own region once, so no block is ever reused."""
    uid = 'stream'
    name = 'Stream'
    description = 'Monotonically increasing addresses without reuse.'
    defaults = {'n': 10_000, 'stride': 1, 'w': 0.0, 'delta': 0,
                'cores': None}

    def validate(self):
        super().validate()
        self._positive_int('stride')
        self._positive_int('delta', allow_zero=True)

    def generate(self) -> Iterator[TraceRecord]:
        n, stride = self.params['n'], self.params['stride']
        per_core = ceil_div(n, self.cores)
        writes = self.ops(n)
        for i in range(n):
            core = i % self.cores
            block = (core * per_core + i // self.cores) * stride
            yield self.record(core, writes[i], block)
