#!/usr/bin/env python3

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional

from dlpim.config import TopologyConfig
from dlpim.exceptions import ConfigurationError


@dataclass(frozen=True, order=True)
class Coord:
    """A position in the vault grid."""
    row: int
    col: int


class Topology:
    """Vault grid with XY routing. Immutable once built."""
    PRESETS = ('hmc6x6', 'hbm4x2')

    def __init__(self, grid_rows: int, grid_cols: int,
                 vaults: Iterable[Coord]):
        self.grid_rows = grid_rows
        self.grid_cols = grid_cols
        self.vaults: tuple[Coord, ...] = tuple(vaults)

        # Validate the placement.
        if grid_rows <= 0 or grid_cols <= 0:
            raise ConfigurationError(f'Grid must have positive dimensions, '
                                     f'got {grid_rows}x{grid_cols}')
        if not self.vaults:
            raise ConfigurationError('A topology needs at least one vault')
        if len(set(self.vaults)) != len(self.vaults):
            raise ConfigurationError('Vault coordinates must be distinct')
        for c in self.vaults:
            if not (0 <= c.row < grid_rows and 0 <= c.col < grid_cols):
                raise ConfigurationError(f'Vault at ({c.row}, {c.col}) lies '
                                         f'outside the {grid_rows}x'
                                         f'{grid_cols} grid')

        self._ids = {c: i for i, c in enumerate(self.vaults)}
        self._routes: dict[tuple[int, int], tuple[int, ...]] = {}
        self.central_vault: int = central_vault(self)

    @staticmethod
    def preset(name: str, empty: Optional[Iterable[tuple[int, int]]] = None) \
            -> Topology:
        """Builds one of the named presets. The 6x6 HMC grid holds 32 vaults,
        leaving four positions (the corners unless told otherwise) empty."""
        match name:
            case 'hmc6x6':
                if empty is None:
                    empty = ((0, 0), (0, 5), (5, 0), (5, 5))
                holes = {Coord(r, c) for r, c in empty}
                if len(holes) != 4:
                    raise ConfigurationError('The hmc6x6 preset needs exactly '
                                             'four empty positions')
                coords = [Coord(r, c) for r in range(6) for c in range(6)
                          if Coord(r, c) not in holes]
                return Topology(6, 6, coords)
            case 'hbm4x2':
                return Topology(4, 2, [Coord(r, c) for r in range(4)
                                       for c in range(2)])

        raise ConfigurationError(f'Unknown topology preset {name!r}, '
                                 f'expected one of {Topology.PRESETS}')

    @staticmethod
    def from_config(config: TopologyConfig) -> Topology:
        """Builds the topology described in a configuration section."""
        if config.preset:
            return Topology.preset(config.preset, config.empty)

        if config.rows is None or config.cols is None:
            raise ConfigurationError('Custom topologies need rows and cols')
        if config.coords is None:
            holes = {Coord(r, c) for r, c in (config.empty or ())}
            coords = [Coord(r, c) for r in range(config.rows)
                      for c in range(config.cols) if Coord(r, c) not in holes]
        else:
            coords = [Coord(r, c) for r, c in config.coords]

        return Topology(config.rows, config.cols, coords)

    @property
    def vault_count(self) -> int:
        return len(self.vaults)

    @property
    def positions(self) -> int:
        """Number of router positions, populated or not."""
        return self.grid_rows * self.grid_cols

    @cached_property
    def diameter(self) -> int:
        """Largest hop distance between any two vaults."""
        return max(self.manhattan(a, b) for a in range(self.vault_count)
                   for b in range(self.vault_count))

    def coord(self, vault: int) -> Coord:
        """Grid position of a vault."""
        self._check(vault)
        return self.vaults[vault]

    def vault_at(self, row: int, col: int) -> Optional[int]:
        """Vault id placed at a grid position, if any."""
        return self._ids.get(Coord(row, col))

    def manhattan(self, a: int, b: int) -> int:
        """Hop distance between two vaults."""
        ca, cb = self.coord(a), self.coord(b)
        return abs(ca.row - cb.row) + abs(ca.col - cb.col)

    def route(self, a: int, b: int) -> list[Coord]:
        """Dimension ordered path from a to b, column first then row. Empty
        grid positions on the way act as plain routers."""
        ca, cb = self.coord(a), self.coord(b)
        path = [ca]
        row, col = ca.row, ca.col
        step = 1 if cb.col > col else -1
        while col != cb.col:
            col += step
            path.append(Coord(row, col))
        step = 1 if cb.row > row else -1
        while row != cb.row:
            row += step
            path.append(Coord(row, col))

        return path

    def route_positions(self, a: int, b: int) -> tuple[int, ...]:
        """Cached route expressed as router indices."""
        key = (a, b)
        path = self._routes.get(key)
        if path is None:
            path = tuple(c.row * self.grid_cols + c.col
                         for c in self.route(a, b))
            self._routes[key] = path

        return path

    def _check(self, vault: int):
        if not isinstance(vault, int) or not 0 <= vault < len(self.vaults):
            raise ConfigurationError(f'Invalid vault id {vault!r} for a '
                                     f'topology with {len(self.vaults)} '
                                     'vaults')

    def __repr__(self):
        return (f'Topology({self.grid_rows}x{self.grid_cols}, '
                f'{self.vault_count} vaults, central={self.central_vault})')


def central_vault(topology: Topology) -> int:
    """Vault that minimizes the total distance to every other vault, lowest id
    winning ties."""
    best, best_sum = 0, None
    for v in range(topology.vault_count):
        total = sum(topology.manhattan(v, o)
                    for o in range(topology.vault_count))
        if best_sum is None or total < best_sum:
            best, best_sum = v, total

    return best
