#!/usr/bin/env python3

import importlib
import inspect
import pkgutil

from typing import Optional

from dlpim.exceptions import GeneratorError
from dlpim.generators.base import BaseGenerator, parse_spec


def _discover() -> dict[str, type[BaseGenerator]]:
    """Imports every workload module of the package and indexes the generator
    classes they define by their spec name."""
    found = {}
    for info in sorted(pkgutil.iter_modules(__path__), key=lambda i: i.name):
        if info.name == 'base':
            continue

        module = importlib.import_module(f'{__name__}.{info.name}')
        for _, cls in inspect.getmembers(module, inspect.isclass):
            if (not issubclass(cls, BaseGenerator) or cls is BaseGenerator or
                    cls.__module__ != module.__name__):
                continue

            # Two workloads answering to the same spec name is a packaging bug.
            if cls.uid in found:
                raise GeneratorError(f'Generator name {cls.uid!r} is claimed '
                                     f'by both {found[cls.uid].__name__} and '
                                     f'{cls.__name__}')
            found[cls.uid] = cls

    return found


def generators() -> list[type[BaseGenerator]]:
    """Synthetic workload classes, in module order."""
    if not hasattr(generators, 'registry'):
        generators.registry = _discover()

    return list(generators.registry.values())


def names() -> list[str]:
    """Names accepted as the first part of a workload spec."""
    return [generator.uid for generator in generators()]


def from_id(uid: str) -> Optional[type[BaseGenerator]]:
    generators()
    return generators.registry.get(uid)


def from_spec(spec: str, vault_count: int, block_bytes: int,
              seed: int = 0) -> BaseGenerator:
    """Builds a workload from a `name:key=val,...` spec. Parameter checks are
    left to the generator itself."""
    name, params = parse_spec(spec)
    generator = from_id(name)
    if generator is None:
        raise GeneratorError(f'No workload generator called {name!r} (try '
                             f'one of: {", ".join(names())})')

    return generator(vault_count, block_bytes, seed, **params)
