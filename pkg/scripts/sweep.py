#!/usr/bin/env python3

from concurrent.futures import ProcessPoolExecutor
from typing import Any, Optional

import yaml

from dlpim.adaptive import PolicyKind
from dlpim.config import SimConfig
from dlpim.engine import Simulator
from dlpim.exceptions import ConfigurationError, UsageError
from dlpim.stats import StatsReport, rows_to_csv, speedup
from scripts import Action, Argument, Command, Manager, Option
from scripts.runspec import RUN_OPTIONS, RunSpec, parse_int

# Swept parameter names and the setting each one drives.
PARAMETERS = {
    'table_sets': 'subscription.sets',
    'table_entries': 'subscription.sets',
    'epoch_cycles': 'policy.epoch_cycles',
    'threshold': 'policy.latency_threshold',
    'block_bytes': 'memory.block_bytes',
}


def parse_values(param: str, text: str) -> list[Any]:
    """Comma separated sweep values, sorted so the output is ordered by
    value."""
    values = []
    for item in filter(None, (v.strip() for v in text.split(','))):
        try:
            value = yaml.safe_load(item)
        except yaml.YAMLError:
            value = item
        if param == 'threshold':
            valid = isinstance(value, (int, float)) and \
                not isinstance(value, bool)
        else:
            if isinstance(value, float) and value.is_integer():
                value = int(value)
            valid = isinstance(value, int) and not isinstance(value, bool)
        if not valid:
            raise ConfigurationError(f'Invalid {param} sweep value {item!r}')
        values.append(value)

    if not values:
        raise UsageError(f'No values given for the {param} sweep')
    return sorted(set(values))


def point_config(config: SimConfig, param: str, value: Any) -> SimConfig:
    """Configuration of one sweep point."""
    if param == 'table_entries':
        ways = config.subscription.ways
        if value % ways != 0:
            raise ConfigurationError(f'{value} table entries do not divide '
                                     f'into {ways} ways')
        value //= ways

    return config.with_overrides({PARAMETERS[param]: value})


def run_point(spec: RunSpec, param: str, value: Any,
              baseline: Optional[str]) -> dict:
    """Runs one sweep point and summarizes it as a CSV row."""
    config = point_config(spec.load_config(), param, value)
    seed = spec.resolve_seed(config)
    trace = spec.load_trace(config, seed)
    report = Simulator(config, trace, seed).run()

    row = summarize(report)
    row = {param: value, **row}
    if baseline is not None:
        base_config = config.with_overrides({'policy.policy_kind': baseline})
        base = Simulator(base_config, trace, seed).run()
        row['baseline_cycles'] = base.total_cycles
        row['speedup'] = round(speedup(base, report), 6)

    return row


def summarize(report: StatsReport) -> dict:
    latency = report.breakdown.as_dict()
    return {
        'policy': report.policy,
        'requests': report.requests,
        'total_cycles': report.total_cycles,
        'avg_latency': report.avg_latency,
        'avg_network': latency['avg_network'],
        'avg_queuing': latency['avg_queuing'],
        'avg_array': latency['avg_array'],
        'cov': round(report.cov, 6),
        'bytes_per_cycle': report.bytes_per_cycle,
        'subscriptions': report.subscriptions.completed,
    }


class ParamAction(Action):
    name = 'param'
    description = 'Runs one simulation per value of a parameter'
    arguments = [
        Argument('|'.join(PARAMETERS), required=True),
        Argument('v1,v2,...', required=True),
    ]
    options = RUN_OPTIONS + [
        Option('baseline', 'b', 'POLICY',
               'Policy speedups are measured against (always-off, or none)'),
        Option('jobs', 'j', 'N', 'Simulations to run in parallel'),
        Option('output', 'o', 'FILE', 'Write the CSV here'),
    ]
    default = True

    def __init__(self):
        super().__init__()

    def perform(self, param: str, values: str, baseline: str = None,
                jobs: str = None, **options):
        if param not in PARAMETERS:
            raise UsageError(f'Unknown sweep parameter {param!r}, expected '
                             f'one of {", ".join(PARAMETERS)}')
        spec = RunSpec.from_options(**options)
        points = parse_values(param, values)
        jobs = parse_int('jobs', jobs) or 1
        if jobs < 1:
            raise UsageError('Option --jobs must be positive')

        baseline = baseline or 'always-off'
        if baseline.lower() == 'none':
            baseline = None
        else:
            try:
                baseline = PolicyKind.parse(baseline).value
            except ValueError as e:
                raise ConfigurationError(str(e))

        # Fail on bad values before spending time on simulations.
        config = spec.load_config()
        for value in points:
            point_config(config, param, value)

        self.parent.logger.info('sweep', f'Sweeping {param} over {points} '
                                f'with {jobs} job(s)')
        args = [(spec, param, value, baseline) for value in points]
        if jobs == 1:
            rows = [run_point(*a) for a in args]
        else:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                rows = list(pool.map(run_point, *zip(*args)))

        header = list(rows[0])
        spec.write(rows_to_csv([header] + [[row.get(k) for k in header]
                                           for row in rows]))


class SweepCommand(Command):
    """Parameter sweeps."""
    name = 'sweep'
    description = 'Runs a simulation per parameter value into a CSV matrix'

    def __init__(self, parent: Manager = None):
        super().__init__(parent)
        self.add_action(ParamAction())
