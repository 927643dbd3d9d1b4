#!/usr/bin/env python3

import logging
import os
import errno
import traceback

from typing import Optional

from dlpim.logger import Logger, LoggerNotFound


class TitledException(Exception):
    """An exception that has a title and a message associated with it."""

    def __init__(self, title: str, message: str, exit_code: int,
                 logger: Logger = None):
        super().__init__(f'{title}: {message}')
        self.title = title
        self.message = message
        self.exit_code = exit_code
        self.logger = logger

    def log(self, level: int, action_id: str, message: str = None,
            context: dict = None):
        """Logs the occurrence of this exception."""
        if self.logger is None:
            raise LoggerNotFound

        # Build up the log message if needed.
        if message is None:
            message = f'{self.title}: {self.message}'

        # Log the incident.
        self.logger.log(level, action_id, message, context=context)

    def as_dict(self, run_id: str = None) -> dict:
        """Returns the equivalent dictionary for machine readable output."""
        # Build the base response.
        resp = {
            'title': self.title,
            'message': self.message,
            'exit_code': self.exit_code
        }

        # Do we have a run identifier to include?
        if run_id is not None:
            resp['run'] = run_id

        return resp


class UsageError(TitledException):
    """The command line was used in a way that doesn't make sense."""

    def __init__(self, message: str, title: str = 'Invalid usage',
                 logger: Logger = None):
        super().__init__(title, message, 2, logger)


class ConfigurationError(TitledException):
    """A configuration value is missing, malformed or inconsistent."""

    def __init__(self, message: str, title: str = 'Invalid configuration',
                 logger: Logger = None):
        super().__init__(title, message, 2, logger)


class GeneratorError(TitledException):
    """A synthetic trace generator was requested with invalid parameters."""

    def __init__(self, message: str, title: str = 'Invalid generator',
                 logger: Logger = None):
        super().__init__(title, message, 2, logger)


class TraceFileNotFound(FileNotFoundError):
    """Trace file doesn't exist."""

    def __init__(self, filename: str):
        super().__init__(errno.ENOENT, os.strerror(errno.ENOENT),
                         filename)


class TraceParseError(TitledException):
    """A trace line could not be understood."""

    def __init__(self, path: str, line_no: int, line: str, reason: str,
                 logger: Logger = None):
        super().__init__('Malformed trace',
                         f'{path}:{line_no}: {reason} ({line.strip()!r})',
                         3, logger)
        self.path = path
        self.line_no = line_no


class SimulationError(TitledException):
    """The simulation could not produce a meaningful result."""

    def __init__(self, message: str, title: str = 'Simulation error',
                 logger: Logger = None):
        super().__init__(title, message, 3, logger)


class ProtocolError(TitledException):
    """An internal invariant of the subscription protocol was violated. This
    is always a bug in the simulator and never a user error."""

    def __init__(self, message: str, context: Optional[dict] = None,
                 logger: Logger = None):
        super().__init__('Protocol invariant violated', message, 3, logger)
        self.context = context

        # Log the incident if we know where to.
        if logger is not None:
            self.log(logging.ERROR, 'protocol_violation', context={
                'context': context,
                'traceback': traceback.format_exc()
            })
