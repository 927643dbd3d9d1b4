#!/usr/bin/env python3

from itertools import chain
from typing import Iterator

from dlpim.generators.base import BaseGenerator
from dlpim.generators.single_consumer import GeneratorSingleConsumer
from dlpim.generators.stream import GeneratorStream
from dlpim.trace import TraceRecord


class GeneratorPhaseChange(BaseGenerator):
    """A streaming phase on every core followed by a single consumer phase."""
    uid = 'phase_change'
    name = 'Phase change'
    description = 'Stream without reuse, then a reuse heavy single consumer.'
    defaults = {'n': 10_000, 'core': 0, 'blocks': 16, 'reuse': 64, 'w': 0.0,
                'delta': 0}

    def __init__(self, vault_count: int, block_bytes: int, seed: int = 0,
                 **params):
        super().__init__(vault_count, block_bytes, seed, **params)
        p = self.params
        self.stream = GeneratorStream(vault_count, block_bytes, seed,
                                      n=p['n'], w=p['w'], delta=p['delta'])
        self.consumer = GeneratorSingleConsumer(
            vault_count, block_bytes, seed + 1, core=p['core'],
            blocks=p['blocks'], reuse=p['reuse'], w=p['w'],
            delta=p['delta'])

    def generate(self) -> Iterator[TraceRecord]:
        return chain(self.stream.generate(), self.consumer.generate())
