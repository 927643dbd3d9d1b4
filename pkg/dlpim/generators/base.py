#!/usr/bin/env python3

from typing import Any, Iterator

import numpy as np
import yaml

from dlpim.exceptions import GeneratorError
from dlpim.trace import Op, TraceRecord

# Row of the block grid where secondary regions (hot pools, consumer blocks)
# start. A power of two, so a row offset inside a region maps to the same
# subscription table set for every power of two table size.
REGION_ROW = 1 << 20


def parse_spec(spec: str) -> tuple[str, dict[str, Any]]:
    """Splits a `name:key=val,key=val` generator spec."""
    name, _, rest = spec.strip().partition(':')
    if not name:
        raise GeneratorError(f'Generator spec {spec!r} has no name')

    params = {}
    for item in filter(None, (p.strip() for p in rest.split(','))):
        key, sep, value = item.partition('=')
        if not sep or not key.strip():
            raise GeneratorError(f'Invalid generator parameter {item!r}, '
                                 'expected key=value')
        try:
            params[key.strip()] = yaml.safe_load(value.strip())
        except yaml.YAMLError:
            params[key.strip()] = value.strip()

    return name.strip(), params


class BaseGenerator:
    """Base class for all synthetic workload generators."""
    uid: str = None
    name: str = None
    description: str = None
    defaults: dict[str, Any] = {}

    def __init__(self, vault_count: int, block_bytes: int, seed: int = 0,
                 **params):
        unknown = set(params) - set(self.defaults)
        if unknown:
            raise GeneratorError(f'Unknown parameter(s) for the {self.uid} '
                                 f'generator: {", ".join(sorted(unknown))}')

        self.vault_count = vault_count
        self.block_bytes = block_bytes
        self.seed = seed
        self.params = {**self.defaults, **params}
        self.rng = np.random.default_rng(seed)
        self.validate()

    def validate(self):
        """Checks the generator parameters."""
        for key in ('n', 'cores'):
            if key in self.params:
                self._positive_int(key)
        if 'w' in self.params:
            self._fraction('w')
        if self.cores > self.vault_count:
            raise GeneratorError(f'{self.uid} generator asked for '
                                 f'{self.cores} cores but only '
                                 f'{self.vault_count} vaults exist')

    def generate(self) -> Iterator[TraceRecord]:
        """Yields the trace records."""
        raise NotImplementedError

    def records(self) -> list[TraceRecord]:
        return list(self.generate())

    @property
    def cores(self) -> int:
        cores = self.params.get('cores')
        return self.vault_count if cores is None else cores

    def addr(self, block: int) -> int:
        """Byte address of a block number."""
        return int(block) * self.block_bytes

    def block_at(self, row: int, home: int) -> int:
        """Block number in a row of the block grid, homed at a given vault."""
        return int(row) * self.vault_count + int(home)

    def ops(self, count: int) -> np.ndarray:
        """Whether each of the next accesses is a write."""
        return self.rng.random(count) < self.params.get('w', 0.0)

    def record(self, core: int, write: bool, block: int,
               delta: int = None) -> TraceRecord:
        if delta is None:
            delta = self.params.get('delta', 0)
        return TraceRecord(int(delta), int(core),
                           Op.WRITE if write else Op.READ, self.addr(block))

    def _positive_int(self, key: str, allow_zero: bool = False):
        value = self.params[key]
        if value is None and key == 'cores':
            return
        if isinstance(value, bool) or not isinstance(value, int) or \
                value < 0 or (value == 0 and not allow_zero):
            raise GeneratorError(f'Parameter {key} of the {self.uid} '
                                 f'generator must be a positive integer, got '
                                 f'{value!r}')

    def _fraction(self, key: str):
        value = self.params[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)) or \
                not 0 <= value <= 1:
            raise GeneratorError(f'Parameter {key} of the {self.uid} '
                                 f'generator must be within [0, 1], got '
                                 f'{value!r}')

    def __repr__(self):
        params = ','.join(f'{k}={v}' for k, v in sorted(self.params.items()))
        return f'{self.uid}:{params}'
