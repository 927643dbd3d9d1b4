#!/usr/bin/env python3

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

import yaml

from dlpim.adaptive import EpochConfig, PolicyKind
from dlpim.exceptions import ConfigurationError

SUPPORTED_BLOCK_BYTES = (16, 32, 64, 128)
SEED_ENV = 'DLPIM_SEED'


@dataclass(frozen=True)
class TopologyConfig:
    """Grid and vault placement. A preset wins over the custom fields."""
    preset: Optional[str] = 'hmc6x6'
    rows: Optional[int] = None
    cols: Optional[int] = None
    coords: Optional[tuple[tuple[int, int], ...]] = None
    empty: Optional[tuple[tuple[int, int], ...]] = None


@dataclass(frozen=True)
class MemoryConfig:
    block_bytes: int = 64
    t_array: int = 45


@dataclass(frozen=True)
class NetworkConfig:
    buffer_entries: int = 16
    flit_bytes: int = 16


@dataclass(frozen=True)
class SubscriptionConfig:
    sets: int = 2048
    ways: int = 4
    buffer_entries: int = 32
    subscribe_on_write: bool = True
    write_ack_on_forward: bool = True
    freq_bits: int = 8

    @property
    def entries(self) -> int:
        return self.sets * self.ways


@dataclass(frozen=True)
class SimulationConfig:
    warmup_requests: int = 1_000_000
    seed: int = 0
    max_outstanding: int = 1
    l1_filter: bool = False
    record_requests: bool = False
    audit: bool = False
    log_level: str = 'INFO'
    log_dir: Optional[str] = None


SECTIONS = {
    'topology': TopologyConfig,
    'memory': MemoryConfig,
    'network': NetworkConfig,
    'subscription': SubscriptionConfig,
    'policy': EpochConfig,
    'simulation': SimulationConfig,
}


@dataclass(frozen=True)
class SimConfig:
    """Complete, validated configuration of a single simulation."""
    topology: TopologyConfig = field(default_factory=TopologyConfig)
    memory: MemoryConfig = field(default_factory=MemoryConfig)
    network: NetworkConfig = field(default_factory=NetworkConfig)
    subscription: SubscriptionConfig = field(
        default_factory=SubscriptionConfig)
    policy: EpochConfig = field(default_factory=EpochConfig)
    simulation: SimulationConfig = field(default_factory=SimulationConfig)

    @staticmethod
    def from_dict(data: Optional[Mapping[str, Any]]) -> SimConfig:
        """Builds a configuration from a sectioned dictionary."""
        sections = {}
        for name, value in (data or {}).items():
            if name not in SECTIONS:
                raise ConfigurationError(f'Unknown configuration section '
                                         f'{name!r}')
            if value is None:
                continue
            if not isinstance(value, Mapping):
                raise ConfigurationError(f'Section {name!r} must be a '
                                         'mapping of keys to values')
            sections[name] = _build_section(name, value)

        return SimConfig(**sections).validate()

    @staticmethod
    def from_file(path: str) -> SimConfig:
        """Loads a configuration from a YAML file."""
        try:
            with open(path, 'r', encoding='utf-8') as f:
                data = yaml.safe_load(f)
        except FileNotFoundError:
            raise ConfigurationError(f'Configuration file {path} does not '
                                     'exist')
        except yaml.YAMLError as e:
            raise ConfigurationError(f'Configuration file {path} is not '
                                     f'valid YAML: {e}')

        return SimConfig.from_dict(data)

    def as_dict(self) -> dict:
        """Nested plain dictionary version of the configuration."""
        return dataclasses.asdict(self)

    def with_overrides(self, overrides: Mapping[str, Any]) -> SimConfig:
        """Applies dotted section.key overrides. String values are parsed as
        YAML scalars so they can come straight from the command line."""
        data = self.as_dict()
        for dotted, value in overrides.items():
            section, _, key = dotted.partition('.')
            if section not in SECTIONS or not key:
                raise ConfigurationError(f'Invalid override {dotted!r}, '
                                         'expected section.key')
            if key not in data[section]:
                raise ConfigurationError(f'Unknown configuration key '
                                         f'{dotted!r}')
            if isinstance(value, str):
                try:
                    value = yaml.safe_load(value)
                except yaml.YAMLError:
                    pass
            data[section][key] = value

        return SimConfig.from_dict(data)

    def validate(self) -> SimConfig:
        """Checks every field and raises a descriptive error on violation."""
        mem, net, sub = self.memory, self.network, self.subscription
        pol, sim = self.policy, self.simulation

        if mem.block_bytes not in SUPPORTED_BLOCK_BYTES:
            raise ConfigurationError(
                f'memory.block_bytes must be one of {SUPPORTED_BLOCK_BYTES}, '
                f'got {mem.block_bytes}')
        _positive('memory.t_array', mem.t_array, allow_zero=True)
        _positive('network.buffer_entries', net.buffer_entries)
        _positive('network.flit_bytes', net.flit_bytes)
        _positive('subscription.sets', sub.sets)
        _positive('subscription.ways', sub.ways)
        _positive('subscription.buffer_entries', sub.buffer_entries)
        _positive('subscription.freq_bits', sub.freq_bits)
        _positive('policy.epoch_cycles', pol.epoch_cycles)
        _positive('policy.central_decision_latency',
                  pol.central_decision_latency, allow_zero=True)
        _positive('policy.leader_stride', pol.leader_stride)
        _positive('policy.bootstrap_epochs', pol.bootstrap_epochs,
                  allow_zero=True)
        _positive('simulation.warmup_requests', sim.warmup_requests,
                  allow_zero=True)
        _positive('simulation.max_outstanding', sim.max_outstanding)

        try:
            pol.kind
        except ValueError as e:
            raise ConfigurationError(str(e))
        if pol.epoch_cycles <= pol.central_decision_latency:
            raise ConfigurationError(
                'policy.epoch_cycles must exceed '
                'policy.central_decision_latency')
        if not 0 <= pol.latency_threshold < 1:
            raise ConfigurationError('policy.latency_threshold must be a '
                                     'fraction in [0, 1)')
        if pol.sampling_enabled and sub.sets < 2:
            raise ConfigurationError('Set sampling needs at least two '
                                     'subscription table sets')

        return self


def _build_section(name: str, values: Mapping[str, Any]):
    cls = SECTIONS[name]
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(values) - known
    if unknown:
        raise ConfigurationError(f'Unknown key(s) in section {name!r}: '
                                 f'{", ".join(sorted(unknown))}')

    kwargs = dict(values)

    # YAML reads bare on/off as booleans and 1e6 as a float.
    for f in dataclasses.fields(cls):
        value = kwargs.get(f.name)
        if f.type in ('str', 'Optional[str]') and isinstance(value, bool):
            kwargs[f.name] = 'on' if value else 'off'
        elif f.type in ('int', 'Optional[int]') and \
                isinstance(value, float) and value.is_integer():
            kwargs[f.name] = int(value)

    if name == 'policy' and 'policy_kind' in kwargs:
        try:
            kwargs['policy_kind'] = PolicyKind.parse(
                kwargs['policy_kind']).value
        except ValueError as e:
            raise ConfigurationError(str(e))
    if name == 'topology':
        for key in ('coords', 'empty'):
            if kwargs.get(key) is not None:
                kwargs[key] = tuple(tuple(int(x) for x in c)
                                    for c in kwargs[key])

    try:
        return cls(**kwargs)
    except TypeError as e:
        raise ConfigurationError(f'Invalid section {name!r}: {e}')


def _positive(name: str, value: Any, allow_zero: bool = False):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigurationError(f'{name} must be an integer, got {value!r}')
    if value < 0 or (value == 0 and not allow_zero):
        raise ConfigurationError(f'{name} must be positive, got {value}')


def resolve_seed(flag: Optional[int], config: SimConfig) -> int:
    """Seed from the command line, then the environment, then the file."""
    if flag is not None:
        return int(flag)

    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip() != '':
        try:
            return int(env, 0)
        except ValueError:
            raise ConfigurationError(f'{SEED_ENV} must be an integer, got '
                                     f'{env!r}')

    return config.simulation.seed
