#!/usr/bin/env python3

import json

from dlpim.exceptions import UsageError
from dlpim.stats import FORMATS, compare, load_report, rows_to_csv
from scripts import Action, Argument, Command, Manager, Option
from scripts.runspec import RUN_OPTIONS, RunSpec


def render(result: dict, fmt: str) -> str:
    """Comparison as a JSON document or name,value CSV rows."""
    if fmt not in FORMATS:
        raise UsageError(f'Unknown --format {fmt!r}, expected one of '
                         f'{", ".join(FORMATS)}')
    if fmt == 'csv':
        return rows_to_csv([('name', 'value')] + list(result.items()))
    return json.dumps(result, indent=2) + '\n'


class PoliciesAction(Action):
    name = 'policies'
    description = 'Runs one trace under two policies and compares them'
    options = RUN_OPTIONS + [
        Option('baseline', 'b', 'POLICY', 'Baseline policy (always-off)'),
        Option('candidate', None, 'POLICY', 'Candidate policy (always-on)'),
        Option('output', 'o', 'FILE', 'Write the comparison here'),
        Option('format', 'f', 'FMT', 'Output format (json, csv)'),
    ]
    default = True

    def __init__(self):
        super().__init__()

    def perform(self, baseline: str = None, candidate: str = None,
                **options):
        spec = RunSpec.from_options(**options)
        config = spec.load_config()
        trace = spec.load_trace(config, spec.resolve_seed(config))

        base = spec.with_policy(baseline or 'always-off')
        cand = spec.with_policy(candidate or 'always-on')
        result = compare(base.execute(trace=trace), cand.execute(trace=trace))
        spec.write(render(result, spec.fmt))


class ReportsAction(Action):
    name = 'reports'
    description = 'Compares two report files of the same trace'
    arguments = [
        Argument('baseline.json', required=True),
        Argument('candidate.json', required=True),
    ]
    options = [
        Option('output', 'o', 'FILE', 'Write the comparison here'),
        Option('format', 'f', 'FMT', 'Output format (json, csv)'),
    ]

    def __init__(self):
        super().__init__()

    def perform(self, baseline: str, candidate: str, output: str = None,
                format: str = None):
        text = render(compare(load_report(baseline), load_report(candidate)),
                      (format or 'json').lower())
        RunSpec(output=output).write(text)


class CompareCommand(Command):
    """Compares subscription policies."""
    name = 'compare'
    description = 'Speedup and deltas between a baseline and a candidate'

    def __init__(self, parent: Manager = None):
        super().__init__(parent)
        self.add_action(PoliciesAction())
        self.add_action(ReportsAction())
