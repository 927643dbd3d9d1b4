#!/usr/bin/env python3

from dlpim import generators
from dlpim.config import SimConfig, resolve_seed
from dlpim.topology import Topology
from dlpim.trace import write_trace
from scripts import Action, Argument, Command, Manager, Option
from scripts.runspec import parse_int, parse_overrides


class WriteAction(Action):
    name = 'write'
    description = 'Writes the records of a generator to a trace file'
    arguments = [
        Argument('spec', required=True),
        Argument('output', required=True),
    ]
    options = [
        Option('config', 'c', 'FILE', 'YAML configuration file'),
        Option('preset', None, 'NAME', 'Topology preset (hmc6x6, hbm4x2)'),
        Option('seed', 's', 'N', 'Seed (falls back to DLPIM_SEED)'),
        Option('set', None, 'KEY=VALUE', 'Override a section.key setting',
               repeat=True),
    ]
    default = True

    def __init__(self):
        super().__init__()

    def perform(self, spec: str, output: str, config: str = None,
                preset: str = None, seed: str = None, set: list = None):
        conf = SimConfig() if config is None else SimConfig.from_file(config)
        overrides = parse_overrides(set)
        if preset is not None:
            overrides.setdefault('topology.preset', preset)
        if overrides:
            conf = conf.with_overrides(overrides)
        seed = resolve_seed(parse_int('seed', seed), conf)

        topology = Topology.from_config(conf.topology)
        generator = generators.from_spec(spec, topology.vault_count,
                                         conf.memory.block_bytes, seed)
        count = write_trace(output, generator.generate(),
                            header=f'{generator!r} seed={seed} '
                                   f'vaults={topology.vault_count}')

        self.parent.logger.info('gen_trace', f'Wrote {count} records to '
                                f'{output}')


class ListAction(Action):
    name = 'list'
    description = 'Lists the available generators'

    def __init__(self):
        super().__init__()

    def perform(self):
        for generator in generators.generators():
            defaults = ','.join(f'{k}={v}'
                                for k, v in generator.defaults.items())
            print(f'{generator.uid:16} {generator.description} ({defaults})')


class GenTraceCommand(Command):
    """Synthetic trace generation."""
    name = 'gen-trace'
    description = 'Writes a synthetic workload to a trace file'

    def __init__(self, parent: Manager = None):
        super().__init__(parent)
        self.add_action(WriteAction())
        self.add_action(ListAction())
