#!/usr/bin/env python3

import inspect
import os
import sys
import traceback
from typing import Any, Optional, TextIO

from dlpim.exceptions import TitledException, UsageError
from dlpim.logger import Logger


class Argument:
    """Command argument abstraction."""

    def __init__(self, name: str, required: bool = False):
        self.name = name
        self.required = required
        self.value = None
        self.populated = False

    def set_value(self, value):
        """Sets the value passed as the argument."""
        self.value = value
        self.populated = True

    def usage_str(self) -> str:
        """How this argument should be represented in the usage message."""
        if self.required:
            return f'<{self.name}>'

        return f'[{self.name}]'


class Option:
    """Named command-line option. Options without a value name are flags."""

    def __init__(self, name: str, short: str = None, value_name: str = None,
                 description: str = '', repeat: bool = False):
        self.name = name
        self.short = short
        self.value_name = value_name
        self.description = description
        self.repeat = repeat

    @property
    def key(self) -> str:
        return self.name.replace('-', '_')

    @property
    def is_flag(self) -> bool:
        return self.value_name is None

    def usage_str(self) -> str:
        """How this option should be represented in the usage message."""
        usage = f'--{self.name}'
        if self.short is not None:
            usage = f'-{self.short}|{usage}'
        if not self.is_flag:
            usage += f' {self.value_name}'

        return f'[{usage}]'


class Action:
    """Command action abstraction."""
    name: str
    description: str
    arguments: list[Argument] = None
    options: list[Option] = None
    default: bool = False

    def __init__(self, parent: 'Command' = None):
        self.parent = parent

    def perform(self, *args, **kwargs) -> Optional[int]:
        """Performs the action as a proper method."""
        raise NotImplementedError

    def perform_from_cli(self, argv: list[str]) -> int:
        """Performs the action using the supplied command-line arguments."""
        positional, options = self.parse(argv)

        # Check if we have the required number of arguments.
        arguments = self.arguments or []
        num_required = sum(1 for arg in arguments if arg.required)
        if len(positional) < num_required:
            raise UsageError(f'Not enough arguments, {self.name} requires at '
                             f'least {num_required}: '
                             f'{self.usage_short().strip()}')
        if len(positional) > len(arguments):
            raise UsageError(f'Too many arguments for {self.name}: '
                             f'{" ".join(positional[len(arguments):])}')

        # Call the callback function with its arguments.
        self.populate_args(positional)
        code = self.perform(*self._args_list(), **options)
        return 0 if code is None else code

    def parse(self, argv: list[str]) -> tuple[list[str], dict[str, Any]]:
        """Splits the command line into positional arguments and options."""
        known = {}
        for opt in self.options or []:
            known[f'--{opt.name}'] = opt
            if opt.short is not None:
                known[f'-{opt.short}'] = opt

        positional = []
        options = {opt.key: [] if opt.repeat else None
                   for opt in self.options or []}
        i = 0
        while i < len(argv):
            token = argv[i]
            i += 1
            if not token.startswith('-') or token == '-':
                positional.append(token)
                continue

            name, eq, inline = token.partition('=')
            opt = known.get(name)
            if opt is None:
                raise UsageError(f'Unknown option {name} for {self.name}')

            if opt.is_flag:
                if eq:
                    raise UsageError(f'Option {name} takes no value')
                value = True
            elif eq:
                value = inline
            elif i < len(argv):
                value = argv[i]
                i += 1
            else:
                raise UsageError(f'Option {name} requires a '
                                 f'{opt.value_name} value')

            if opt.repeat:
                options[opt.key].append(value)
            else:
                options[opt.key] = value

        return positional, options

    def populate_args(self, positional: list[str]):
        """Populates the values into the argument objects list."""
        for arg in self.arguments or []:
            arg.value = None
            arg.populated = False
        for index, value in enumerate(positional):
            self.arguments[index].set_value(self.parse_arg(index, value))

    def parse_arg(self, index: int, value: str) -> Any:
        """Parses the argument at the index and returns the parsed value."""
        return value

    def usage_short(self) -> str:
        """How this action should be summarized in the usage message."""
        usage = f'{self.name} '
        for arg in self.arguments or []:
            usage += f'{arg.usage_str()} '

        return usage

    def usage_long(self, padding: int = 0) -> str:
        """How this action should be represented in the usage message."""
        text = f'    {self.usage_short().ljust(padding)} -  {self.description}.'
        for opt in self.options or []:
            text += f'\n        {opt.usage_str()} {opt.description}'

        return text

    def _args_list(self) -> list:
        """Gets the list of populated argument values."""
        args = []
        for arg in self.arguments or []:
            # Stop as soon as a value is not populated.
            if not arg.populated:
                break
            args.append(arg.value)

        return args


class HelpAction(Action):
    """Default action to display the usage message."""
    name = 'help'
    description = 'This current output'

    def __init__(self):
        super().__init__()

    def perform(self):
        self.parent.usage()


class Command:
    """Common command-line utility script interface."""
    name: str
    description: str

    def __init_subclass__(cls, **kwargs):
        # Implement a method to have our post init method always called.
        def init_decorator(prev_init):
            def new_init(self, *args, **_kwargs):
                prev_init(self, *args, **_kwargs)
                self._post_init_()
            return new_init

        cls.__init__ = init_decorator(cls.__init__)

    def __init__(self, parent: 'Manager' = None):
        self.parent: Manager = parent
        self.actions: list[Action] = []

    def _post_init_(self):
        """Method that should always be called after the initialization of an
        object. Even subclasses."""
        self.add_action(HelpAction())

    @property
    def logger(self) -> Logger:
        if self.parent is not None:
            return self.parent.logger
        return Logger('dlpim', 'cli')

    def run(self, argv: list[str]) -> int:
        """Runs the command. A leading word naming an action selects it,
        anything else goes to the default action."""
        if argv and not argv[0].startswith('-'):
            req_action = argv[0].lower()
            for action in self.actions:
                if action.name == req_action:
                    return action.perform_from_cli(argv[1:])

        for action in self.actions:
            if action.default:
                return action.perform_from_cli(argv)

        if argv:
            raise UsageError(f'Unknown action {argv[0]} for {self.name}')
        self.usage(sys.stderr)
        return 2

    def add_action(self, action: Action):
        """Add an action to the command."""
        action.parent = self
        self.actions.append(action)

    def usage(self, out: TextIO = None):
        """Prints a message on how to use this command."""
        out = sys.stdout if out is None else out

        # Define the correct usage name pattern.
        command = self.name
        if self.parent is not None:
            command = f'{self.parent.name} {self.name}'

        # Get the actions padding.
        padding = 0
        for action in self.actions:
            if len(action.usage_short()) > padding:
                padding = len(action.usage_short())

        # Print out the usage message.
        print(f'usage: {command} [action] [options]', file=out)
        print(file=out)
        print('Available actions:', file=out)
        for action in self.actions:
            print(action.usage_long(padding), file=out)

    def usage_short(self) -> str:
        """How this command should be summarized in the manager usage."""
        return self.name

    def usage_long(self, padding: int = 0) -> str:
        """How this argument should be represented in the manager usage."""
        return (f'    {self.usage_short().ljust(padding)}  -  '
                f'{self.description}.')


class Manager:
    description: str = 'The DL-PIM simulator manager script'

    def __init__(self, argv: list[str] = None, logger: Logger = None):
        self.argv: list[str] = list(sys.argv if argv is None else argv)
        self.name: str = os.path.basename(self.argv[0]) if self.argv \
            else 'dpm.py'
        self.commands: list[Command] = []

        # Create our logger if needed.
        if logger is None:
            self.logger = Logger('dlpim', 'cli')
        else:
            self.logger = logger.for_subsystem('cli')

        # Populate our available commands.
        self.populate_commands()

    def run(self) -> int:
        """Runs the manager from the command line and returns the exit
        code."""
        # Check if we were called without any commands.
        if len(self.argv) < 2:
            self.usage(sys.stderr)
            return 2

        # Perform the requested command.
        req_command = self.argv[1].lower()
        for cmd in self.commands:
            if cmd.name == req_command:
                return self._run_command(cmd, self.argv[2:])

        # Looks like it was an invalid command.
        print(f'Unknown command {req_command}.\n', file=sys.stderr)
        self.usage(sys.stderr)
        return 2

    def _run_command(self, cmd: Command, argv: list[str]) -> int:
        self.logger.debug('command', f'Running the {cmd.name} command',
                          {'argv': argv})
        try:
            return cmd.run(argv)
        except TitledException as e:
            print(f'{e.title}: {e.message}', file=sys.stderr)
            self.logger.debug('command_failed', str(e), e.as_dict())
            return e.exit_code
        except OSError as e:
            print(f'I/O error: {e}', file=sys.stderr)
            self.logger.error('io_error', str(e))
            return 3
        except Exception as e:
            print(f'Unexpected error: {e}', file=sys.stderr)
            self.logger.error('unexpected_error', str(e), {
                'traceback': traceback.format_exc()
            })
            return 3

    def append_command(self, command: Command):
        """Appends a command to the manager."""
        self.commands.append(command)

    def populate_commands(self):
        """Populates the list of commands we have available."""
        # Load the command modules.
        self._load_modules()

        # Go through the modules looking for the commands.
        for filename, file_obj in inspect.getmembers(sys.modules[__name__]):
            if inspect.ismodule(file_obj):
                # Go through the members of the modules.
                for class_name, mod_obj in inspect.getmembers(file_obj):
                    # Check if it's actually a command class.
                    if (inspect.isclass(mod_obj) and
                            class_name != 'Command' and
                            issubclass(mod_obj, Command) and
                            mod_obj.__module__ == file_obj.__name__):
                        self.append_command(mod_obj(self))

    def usage(self, out: TextIO = None):
        """Prints a message on how to use this manager."""
        out = sys.stdout if out is None else out

        # Get the actions padding.
        padding = 0
        for cmd in self.commands:
            if len(cmd.usage_short()) > padding:
                padding = len(cmd.usage_short())

        # Print out the usage message.
        print(f'usage: {self.name} command [action] [options]', file=out)
        print(file=out)
        print('Available commands:', file=out)
        for cmd in self.commands:
            print(cmd.usage_long(padding), file=out)

    @staticmethod
    def _load_modules():
        """Loads all the scripts modules."""
        for module in sorted(os.listdir(os.path.dirname(__file__))):
            if module == '__init__.py' or module[-3:] != '.py':
                continue
            __import__(f'{sys.modules[__name__].__name__}.{module[:-3]}',
                       locals(), globals())
