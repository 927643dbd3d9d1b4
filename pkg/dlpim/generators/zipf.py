#!/usr/bin/env python3

from typing import Iterator

import numpy as np

from dlpim.exceptions import GeneratorError
from dlpim.generators.base import BaseGenerator
from dlpim.trace import TraceRecord


def zipf_weights(count: int, exponent: float) -> np.ndarray:
    """Probability of each popularity rank of a bounded Zipf law."""
    weights = 1.0 / np.arange(1, count + 1, dtype=np.float64) ** exponent
    return weights / weights.sum()


class GeneratorZipf(BaseGenerator):
    """Skewed popularity over a fixed pool of blocks."""
    uid = 'zipf'
    name = 'Zipf'
    description = ('Blocks are picked with Zipf distributed popularity, the '
                   'popular ones scattered over the vaults.')
    defaults = {'n': 10_000, 's': 0.99, 'blocks': 4096, 'w': 0.0,
                'delta': 0, 'cores': None}

    def validate(self):
        super().validate()
        self._positive_int('blocks')
        self._positive_int('delta', allow_zero=True)
        s = self.params['s']
        if isinstance(s, bool) or not isinstance(s, (int, float)) or s <= 0:
            raise GeneratorError(f'Zipf exponent must be positive, got {s!r}')

    def generate(self) -> Iterator[TraceRecord]:
        n, count = self.params['n'], self.params['blocks']
        ranks = self.rng.choice(count, size=n,
                                p=zipf_weights(count, self.params['s']))
        placement = self.rng.permutation(count)
        writes = self.ops(n)
        for i in range(n):
            yield self.record(i % self.cores, writes[i], placement[ranks[i]])
