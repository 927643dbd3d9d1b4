#!/usr/bin/env python3

from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from typing import Any, Optional

from dlpim import generators
from dlpim.adaptive import PolicyKind
from dlpim.config import SimConfig, resolve_seed
from dlpim.engine import Simulator
from dlpim.exceptions import ConfigurationError, UsageError
from dlpim.logger import Logger
from dlpim.stats import FORMATS, StatsReport, emit
from dlpim.topology import Topology
from dlpim.trace import TraceRecord, read_trace
from scripts import Option

# Options shared by every command that runs simulations.
RUN_OPTIONS = [
    Option('config', 'c', 'FILE', 'YAML configuration file'),
    Option('preset', None, 'NAME', 'Topology preset (hmc6x6, hbm4x2)'),
    Option('trace', 't', 'FILE', 'Trace file, optionally gzip compressed'),
    Option('gen', 'g', 'SPEC', 'Synthetic trace as name:key=val,...'),
    Option('policy', 'p', 'POLICY', 'Subscription policy'),
    Option('seed', 's', 'N', 'Seed (falls back to DLPIM_SEED)'),
    Option('set', None, 'KEY=VALUE', 'Override a section.key setting',
           repeat=True),
]

OUTPUT_OPTIONS = [
    Option('output', 'o', 'FILE', 'Write the result here instead of stdout'),
    Option('format', 'f', 'FMT', f'Output format ({", ".join(FORMATS)})'),
]


def parse_overrides(items: list[str]) -> dict[str, str]:
    """Turns repeated `section.key=value` options into a dictionary."""
    overrides = {}
    for item in items or []:
        key, sep, value = item.partition('=')
        if not sep or not key.strip():
            raise UsageError(f'Invalid --set value {item!r}, expected '
                             'section.key=value')
        overrides[key.strip()] = value.strip()

    return overrides


def parse_int(name: str, value: Optional[str]) -> Optional[int]:
    if value is None:
        return None
    try:
        return int(value, 0)
    except ValueError:
        raise UsageError(f'Option --{name} expects an integer, got {value!r}')


@dataclass
class RunSpec:
    """Everything needed to reproduce one simulation."""
    config_path: Optional[str] = None
    preset: Optional[str] = None
    trace_path: Optional[str] = None
    generator: Optional[str] = None
    output: Optional[str] = None
    seed: Optional[int] = None
    policy: Optional[str] = None
    overrides: dict[str, Any] = field(default_factory=dict)
    fmt: str = 'json'

    @staticmethod
    def from_options(config: str = None, preset: str = None,
                     trace: str = None, gen: str = None, policy: str = None,
                     seed: str = None, set: list[str] = None,
                     output: str = None, format: str = None,
                     **_ignored) -> RunSpec:
        spec = RunSpec(config_path=config, preset=preset, trace_path=trace,
                       generator=gen, output=output,
                       seed=parse_int('seed', seed), policy=policy,
                       overrides=parse_overrides(set),
                       fmt=(format or 'json').lower())
        spec.validate()
        return spec

    def validate(self):
        if self.trace_path is None and self.generator is None:
            raise UsageError('No trace given, pass --trace FILE or '
                             '--gen SPEC')
        if self.trace_path is not None and self.generator is not None:
            raise UsageError('Pass either --trace or --gen, not both')
        if self.fmt not in FORMATS:
            raise UsageError(f'Unknown --format {self.fmt!r}, expected one '
                             f'of {", ".join(FORMATS)}')

    def with_policy(self, policy: str) -> RunSpec:
        return replace(self, policy=policy)

    def load_config(self) -> SimConfig:
        """Configuration file, then presets and flags on top."""
        config = SimConfig() if self.config_path is None \
            else SimConfig.from_file(self.config_path)

        overrides = dict(self.overrides)
        if self.preset is not None:
            overrides.setdefault('topology.preset', self.preset)
        if self.policy is not None:
            try:
                kind = PolicyKind.parse(self.policy)
            except ValueError as e:
                raise ConfigurationError(str(e))
            overrides.setdefault('policy.policy_kind', kind.value)

        return config.with_overrides(overrides) if overrides else config

    def resolve_seed(self, config: SimConfig) -> int:
        return resolve_seed(self.seed, config)

    def load_trace(self, config: SimConfig, seed: int) -> list[TraceRecord]:
        if self.trace_path is not None:
            return list(read_trace(self.trace_path))

        topology = Topology.from_config(config.topology)
        return generators.from_spec(self.generator, topology.vault_count,
                                    config.memory.block_bytes,
                                    seed).records()

    def execute(self, config: SimConfig = None,
                trace: list[TraceRecord] = None,
                logger: Logger = None) -> StatsReport:
        """Runs the simulation this spec describes."""
        config = self.load_config() if config is None else config
        seed = self.resolve_seed(config)
        if trace is None:
            trace = self.load_trace(config, seed)

        return Simulator(config, trace, seed, logger).run()

    def write(self, text: str):
        """Writes a result to the output file or standard output."""
        if self.output is None or self.output == '-':
            sys.stdout.write(text)
            return

        with open(self.output, 'w', encoding='utf-8', newline='') as f:
            f.write(text)

    def emit(self, report: StatsReport):
        self.write(emit(report, self.fmt))
