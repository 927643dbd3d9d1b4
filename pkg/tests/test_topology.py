#!/usr/bin/env python3

import pytest

from dlpim.config import TopologyConfig
from dlpim.exceptions import ConfigurationError
from dlpim.topology import Coord, Topology


@pytest.fixture
def hmc() -> Topology:
    return Topology.preset('hmc6x6')


def test_hmc_preset_leaves_corners_empty(hmc):
    assert hmc.vault_count == 32
    assert hmc.positions == 36
    for row, col in ((0, 0), (0, 5), (5, 0), (5, 5)):
        assert hmc.vault_at(row, col) is None

    # Row major numbering over the populated positions.
    assert hmc.coord(0) == Coord(0, 1)
    assert hmc.coord(3) == Coord(0, 4)
    assert hmc.coord(4) == Coord(1, 0)
    assert hmc.coord(10) == Coord(2, 0)
    assert hmc.coord(31) == Coord(5, 4)


def test_hbm_preset():
    hbm = Topology.preset('hbm4x2')
    assert hbm.vault_count == 8
    assert hbm.coord(7) == Coord(3, 1)
    assert hbm.vault_at(2, 1) == 5


@pytest.mark.parametrize('name, diameter', [('hmc6x6', 8), ('hbm4x2', 4)])
def test_diameter(name, diameter):
    assert Topology.preset(name).diameter == diameter


@pytest.mark.parametrize('a, b, hops', [
    (0, 3, 3), (10, 13, 3), (11, 13, 2), (10, 11, 1), (5, 5, 0), (0, 31, 8)])
def test_manhattan(hmc, a, b, hops):
    assert hmc.manhattan(a, b) == hops
    assert hmc.manhattan(b, a) == hops


def test_route_moves_along_the_row_first(hmc):
    path = hmc.route(0, 13)
    assert path == [Coord(0, 1), Coord(0, 2), Coord(0, 3), Coord(1, 3),
                    Coord(2, 3)]
    assert len(path) == hmc.manhattan(0, 13) + 1


def test_route_crosses_empty_positions(hmc):
    # The corner has no vault but still routes.
    assert hmc.route(0, 4) == [Coord(0, 1), Coord(0, 0), Coord(1, 0)]
    assert hmc.route_positions(0, 4) == (1, 0, 6)


def test_central_vault():
    assert Topology.preset('hmc6x6').central_vault == 12
    assert Topology.preset('hbm4x2').central_vault == 2


def test_custom_grid_from_config():
    topo = Topology.from_config(TopologyConfig(preset=None, rows=2, cols=3))
    assert topo.vault_count == 6

    topo = Topology.from_config(TopologyConfig(preset=None, rows=2, cols=3,
                                               empty=((0, 0),)))
    assert topo.vault_count == 5
    assert topo.coord(0) == Coord(0, 1)

    topo = Topology.from_config(TopologyConfig(
        preset=None, rows=3, cols=3, coords=((0, 0), (2, 2))))
    assert topo.vault_count == 2
    assert topo.diameter == 4


def test_hmc_preset_with_other_holes():
    topo = Topology.preset('hmc6x6', empty=((2, 2), (2, 3), (3, 2), (3, 3)))
    assert topo.vault_count == 32
    assert topo.vault_at(0, 0) == 0


@pytest.mark.parametrize('build', [
    lambda: Topology(2, 2, [Coord(0, 0), Coord(0, 0)]),
    lambda: Topology(2, 2, [Coord(2, 0)]),
    lambda: Topology(0, 2, [Coord(0, 0)]),
    lambda: Topology(2, 2, []),
    lambda: Topology.preset('mesh9x9'),
    lambda: Topology.preset('hmc6x6', empty=((0, 0), (0, 5), (5, 0))),
    lambda: Topology.from_config(TopologyConfig(preset=None)),
])
def test_invalid_topologies(build):
    with pytest.raises(ConfigurationError):
        build()


def test_unknown_vault_id(hmc):
    with pytest.raises(ConfigurationError):
        hmc.coord(32)
    with pytest.raises(ConfigurationError):
        hmc.manhattan(-1, 0)
