#!/usr/bin/env python3

import pytest

from dlpim.exceptions import ConfigurationError, ProtocolError
from dlpim.network import LinkBuffer, Network, Packet, RequestKind, \
    VirtualChannel, flits_for
from dlpim.topology import Topology


def drain(network: Network, limit: int = 1000) -> list[tuple[Packet, int]]:
    """Steps a standalone network until every packet arrived."""
    delivered = []
    network.sink = lambda packet, cycle: delivered.append((packet, cycle))
    cycle = 0
    while not network.is_idle():
        network.deliver(cycle)
        network.step(cycle)
        cycle += 1
        assert cycle < limit

    return delivered


@pytest.fixture
def network() -> Network:
    return Network(Topology.preset('hmc6x6'), buffer_entries=4)


@pytest.mark.parametrize('block_bytes, flits', [
    (16, 2), (32, 3), (64, 5), (128, 9)])
def test_flits_for(block_bytes, flits):
    assert flits_for(block_bytes) == flits


def test_flits_for_rejects_odd_blocks():
    with pytest.raises(ConfigurationError):
        flits_for(48)


def test_virtual_channels():
    assert RequestKind.MEM_READ.vc == VirtualChannel.REQUEST
    assert RequestKind.SUBSCRIPTION_REQUEST.vc == VirtualChannel.REQUEST
    assert RequestKind.POLICY_STATS_REPORT.vc == VirtualChannel.REQUEST
    assert RequestKind.MEM_READ_REPLY.vc == VirtualChannel.RESPONSE
    assert RequestKind.SUBSCRIPTION_DATA_TRANSFER.vc == \
        VirtualChannel.RESPONSE
    assert RequestKind.TURN_OFF_SUBSCRIPTION.vc == VirtualChannel.RESPONSE


def test_link_buffer_reservations():
    buf = LinkBuffer(2)
    buf.reserve()
    buf.push(Packet(0, 1, 0, RequestKind.MEM_READ))
    assert not buf.has_space()
    with pytest.raises(ProtocolError):
        buf.reserve()

    buf.land(Packet(0, 1, 64, RequestKind.MEM_READ))
    assert len(buf) == 2
    assert buf.max_occupancy == 2
    assert buf.pop().addr == 0


def test_uncontended_packet_costs_flits_per_hop(network):
    packet = Packet(0, 3, 0, RequestKind.MEM_READ_REPLY, flits=5)
    network.send(packet, 0)

    [(arrived, cycle)] = drain(network)
    assert arrived is packet
    assert cycle == 15
    assert packet.hops == 3
    assert packet.latency_tally.network_cycles == 15
    assert packet.latency_tally.queuing_cycles == 0
    network.check_conservation()
    assert network.in_flight() == 0


def test_local_packet_skips_the_network(network):
    seen = []
    network.sink = lambda packet, cycle: seen.append(cycle)
    network.send(Packet(7, 7, 0, RequestKind.MEM_READ), 12)
    assert seen == [12]
    assert network.is_idle()


def test_contending_packets_queue_behind_each_other(network):
    first = Packet(0, 3, 0, RequestKind.MEM_READ_REPLY, flits=5)
    second = Packet(0, 3, 64, RequestKind.MEM_READ_REPLY, flits=5)
    network.send(first, 0)
    network.send(second, 0)

    delivered = drain(network)
    assert [(p.addr, c) for p, c in delivered] == [(0, 15), (64, 20)]
    assert second.latency_tally.network_cycles == 15
    assert second.latency_tally.queuing_cycles == 5


def test_responses_win_arbitration(network):
    request = Packet(0, 3, 0, RequestKind.MEM_READ)
    reply = Packet(0, 3, 64, RequestKind.MEM_READ_REPLY)
    network.send(request, 0)
    network.send(reply, 0)

    delivered = drain(network)
    assert [p for p, _ in delivered] == [reply, request]
    assert [c for _, c in delivered] == [3, 4]


def test_full_injection_buffer_waits_at_the_source():
    network = Network(Topology.preset('hbm4x2'), buffer_entries=1)
    packets = [Packet(0, 7, 64 * i, RequestKind.MEM_READ) for i in range(4)]
    for packet in packets:
        network.send(packet, 0)
    assert network.queued_at_sources() == 3
    network.check_conservation()

    delivered = drain(network)
    assert [p for p, _ in delivered] == packets
    for packet, cycle in delivered:
        tally = packet.latency_tally
        assert cycle == tally.network_cycles + tally.queuing_cycles
