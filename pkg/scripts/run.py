#!/usr/bin/env python3

from scripts import Action, Command, Manager
from scripts.runspec import OUTPUT_OPTIONS, RUN_OPTIONS, RunSpec


class SimulateAction(Action):
    name = 'simulate'
    description = 'Simulates a trace and writes its statistics report'
    options = RUN_OPTIONS + OUTPUT_OPTIONS
    default = True

    def __init__(self):
        super().__init__()

    def perform(self, **options):
        spec = RunSpec.from_options(**options)
        report = spec.execute()
        spec.emit(report)

        self.parent.logger.info('run', f'Simulated {report.requests} '
                                f'requests in {report.total_cycles} cycles',
                                {'run_id': report.run_id,
                                 'output': spec.output})


class RunCommand(Command):
    """Runs a single simulation."""
    name = 'run'
    description = 'Runs a single simulation'

    def __init__(self, parent: Manager = None):
        super().__init__(parent)
        self.add_action(SimulateAction())
