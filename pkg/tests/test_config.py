#!/usr/bin/env python3

from pathlib import Path

import pytest

from dlpim.config import SEED_ENV, SimConfig, resolve_seed
from dlpim.exceptions import ConfigurationError

EXAMPLE = Path(__file__).resolve().parent.parent / 'config' / \
    'config.example.yml'


def test_defaults():
    config = SimConfig().validate()
    assert config.topology.preset == 'hmc6x6'
    assert config.memory.block_bytes == 64
    assert config.memory.t_array == 45
    assert config.subscription.entries == 8192
    assert config.policy.epoch_cycles == 1_000_000
    assert config.policy.latency_threshold == 0.02
    assert config.simulation.warmup_requests == 1_000_000


def test_example_file_matches_defaults():
    assert SimConfig.from_file(str(EXAMPLE)) == SimConfig()


def test_overrides_parse_command_line_strings():
    config = SimConfig().with_overrides({
        'memory.t_array': '10',
        'policy.policy_kind': 'on',
        'simulation.audit': 'true',
        'topology.preset': 'hbm4x2',
    })
    assert config.memory.t_array == 10
    assert config.policy.policy_kind == 'always_on'
    assert config.simulation.audit is True
    assert config.topology.preset == 'hbm4x2'

    # The original is left untouched.
    assert SimConfig().memory.t_array == 45


@pytest.mark.parametrize('text, kind', [
    ('off', 'always_off'),
    ('on', 'always_on'),
    ('"off"', 'always_off'),
    ('hops', 'hops_adaptive'),
])
def test_bare_on_off_policy_names(tmp_path, text, kind):
    path = tmp_path / 'policy.yml'
    path.write_text(f'policy:\n  policy_kind: {text}\n', encoding='utf-8')
    assert SimConfig.from_file(str(path)).policy.policy_kind == kind
    assert SimConfig().with_overrides(
        {'policy.policy_kind': text}).policy.policy_kind == kind


def test_integers_written_as_floats():
    config = SimConfig.from_dict({'policy': {'epoch_cycles': 1e4}})
    assert config.policy.epoch_cycles == 10_000
    assert isinstance(config.policy.epoch_cycles, int)


def test_custom_topology_lists_become_tuples():
    config = SimConfig.from_dict({'topology': {
        'preset': None, 'rows': 2, 'cols': 2, 'empty': [[0, 0]]}})
    assert config.topology.empty == ((0, 0),)


@pytest.mark.parametrize('overrides', [
    {'memory.block_bytes': 48},
    {'memory.t_array': -1},
    {'subscription.sets': 0},
    {'subscription.ways': 'four'},
    {'network.buffer_entries': 0},
    {'policy.policy_kind': 'sometimes'},
    {'policy.epoch_cycles': 1000},
    {'policy.latency_threshold': 1.5},
    {'policy.sampling_enabled': True, 'subscription.sets': 1},
    {'simulation.max_outstanding': 0},
    {'memory.size': 4},
    {'cache.ways': 4},
    {'memory': 4},
])
def test_invalid_overrides(overrides):
    with pytest.raises(ConfigurationError):
        SimConfig().with_overrides(overrides)


@pytest.mark.parametrize('data', [
    {'vaults': {'count': 4}},
    {'memory': [64]},
    {'memory': {'block_bytes': 64, 'banks': 8}},
])
def test_invalid_documents(data):
    with pytest.raises(ConfigurationError):
        SimConfig.from_dict(data)


def test_missing_or_broken_files(tmp_path):
    with pytest.raises(ConfigurationError):
        SimConfig.from_file(str(tmp_path / 'missing.yml'))

    broken = tmp_path / 'broken.yml'
    broken.write_text('memory: [block_bytes: 64\n', encoding='utf-8')
    with pytest.raises(ConfigurationError):
        SimConfig.from_file(str(broken))


def test_empty_file_gives_defaults(tmp_path):
    empty = tmp_path / 'empty.yml'
    empty.write_text('', encoding='utf-8')
    assert SimConfig.from_file(str(empty)) == SimConfig()


def test_seed_resolution(monkeypatch):
    config = SimConfig().with_overrides({'simulation.seed': 5})
    monkeypatch.delenv(SEED_ENV, raising=False)
    assert resolve_seed(None, config) == 5

    monkeypatch.setenv(SEED_ENV, '9')
    assert resolve_seed(None, config) == 9
    assert resolve_seed(2, config) == 2

    monkeypatch.setenv(SEED_ENV, 'nine')
    with pytest.raises(ConfigurationError):
        resolve_seed(None, config)
