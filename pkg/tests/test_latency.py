#!/usr/bin/env python3

import pytest

from dlpim.topology import Topology
from conftest import read, request_of, write

ON = {'policy.policy_kind': 'always_on'}
OFF = {'policy.policy_kind': 'always_off'}
HBM_OFF = {**OFF, 'topology.preset': 'hbm4x2'}

# Home vault 13 on hmc6x6, three hops from core 10 and two from core 11.
BLOCK = 832


def keep_core_10_unsubscribed(sim):
    sim.vaults[10].policy_on = False


def test_remote_read_without_subscriptions(simulate):
    report = simulate([read(0, 192)], OFF)
    req = request_of(report, 0)

    # Three hops: a one flit request and a five flit reply.
    assert req['network_cycles'] == 18
    assert req['queuing_cycles'] == 0
    assert req['array_cycles'] == 45
    assert req['latency'] == 63
    assert req['hops'] == 6
    assert req['holder'] == 3
    assert not req['served_from_slot']
    assert report.total_cycles == 63


def test_remote_write_without_subscriptions(simulate):
    report = simulate([write(0, 192)], OFF)
    req = request_of(report, 0)

    assert req['network_cycles'] == 15
    assert req['latency'] == 60

    # The core only moves on once the acknowledgment arrives.
    assert report.total_cycles == 63
    assert report.packets['MemWriteAck'] == 1


def test_local_read_at_home(simulate):
    report = simulate([read(13, BLOCK)], ON)
    req = request_of(report, 13)
    assert req['latency'] == 45
    assert req['network_cycles'] == 0
    assert report.subscriptions.attempted == 0


def test_read_served_by_the_holder(simulate):
    report = simulate([read(11, BLOCK), read(10, BLOCK, delta=1000)], ON,
                      setup=keep_core_10_unsubscribed)
    req = request_of(report, 10)

    # Three hops to the home, two on to the holder and one back.
    assert req['network_cycles'] == 10
    assert req['queuing_cycles'] == 0
    assert req['array_cycles'] == 45
    assert req['latency'] == 55
    assert req['hops'] == 6
    assert req['served_from_slot']
    assert req['holder'] == 11


def test_write_served_by_the_holder(simulate):
    report = simulate([read(11, BLOCK), write(10, BLOCK, delta=1000)], ON,
                      setup=keep_core_10_unsubscribed)
    req = request_of(report, 10)

    assert req['network_cycles'] == 25
    assert req['queuing_cycles'] == 0
    assert req['latency'] == 70
    assert req['served_from_slot']
    assert req['holder'] == 11

    # The write ack shares the westbound link and leaves after the forward.
    assert report.packets['MemWriteAck'] == 1


def test_subscribed_core_reads_locally(simulate):
    report = simulate([read(11, BLOCK), read(11, BLOCK, delta=1000)], ON)
    first, again = request_of(report, 11, 0), request_of(report, 11, 1)

    assert first['latency'] == 57
    assert again['latency'] == 45
    assert again['network_cycles'] == 0
    assert again['served_from_slot']
    assert report.reuse.local_accesses == 1


@pytest.mark.parametrize('requester', range(8))
def test_two_channel_stack_reads(simulate, requester):
    topology = Topology.preset('hbm4x2')
    records = [read(requester, home * 64) for home in range(8)]
    report = simulate(records, HBM_OFF)

    for home in range(8):
        req = request_of(report, requester, home)
        distance = topology.manhattan(requester, home)
        assert req['holder'] == home
        assert req['network_cycles'] == 6 * distance
        assert req['latency'] == 6 * distance + 45


@pytest.mark.parametrize('requester', range(8))
def test_two_channel_stack_writes(simulate, requester):
    topology = Topology.preset('hbm4x2')
    records = [write(requester, home * 64) for home in range(8)]
    report = simulate(records, HBM_OFF)

    for home in range(8):
        req = request_of(report, requester, home)
        distance = topology.manhattan(requester, home)
        assert req['network_cycles'] == 5 * distance
        assert req['latency'] == 5 * distance + 45


def test_breakdown_always_adds_up(simulate):
    records = [read(core, (core * 7 + i) * 64, delta=i % 3)
               for core in range(32) for i in range(6)]
    records += [write(core, (core * 5 + 3) * 64) for core in range(0, 32, 3)]
    report = simulate(records, ON)

    assert report.breakdown.is_consistent()
    for req in report.requests_log:
        assert req['latency'] == (req['network_cycles'] +
                                  req['queuing_cycles'] +
                                  req['array_cycles'])
