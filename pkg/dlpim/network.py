#!/usr/bin/env python3

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Optional, TYPE_CHECKING

from dlpim.config import SUPPORTED_BLOCK_BYTES
from dlpim.exceptions import ConfigurationError, ProtocolError
from dlpim.internal_utils import ceil_div
from dlpim.logger import Logger

# Ensure we have modules available only for type checking.
if TYPE_CHECKING:
    from dlpim.topology import Topology

FLIT_BYTES = 16
LOCAL_PORT = -1


class VirtualChannel(Enum):
    """Message classes. Responses never wait on requests."""
    REQUEST = 0
    RESPONSE = 1


class RequestKind(Enum):
    """Every message type carried by the vault network."""
    MEM_READ = 'MemRead'
    MEM_WRITE = 'MemWrite'
    MEM_READ_REPLY = 'MemReadReply'
    MEM_WRITE_ACK = 'MemWriteAck'
    SUBSCRIPTION_REQUEST = 'SubscriptionRequest'
    SUBSCRIPTION_NACK = 'SubscriptionNack'
    SUBSCRIPTION_DATA_TRANSFER = 'SubscriptionDataTransfer'
    SUBSCRIPTION_TRANSFER_ACK = 'SubscriptionTransferAck'
    UNSUBSCRIPTION_REQUEST = 'UnsubscriptionRequest'
    UNSUBSCRIPTION_TRANSFER_ACK = 'UnsubscriptionTransferAck'
    TURN_ON_SUBSCRIPTION = 'TurnOnSubscription'
    TURN_OFF_SUBSCRIPTION = 'TurnOffSubscription'
    POLICY_STATS_REPORT = 'PolicyStatsReport'

    @property
    def vc(self) -> VirtualChannel:
        if self in _REQUEST_CLASS:
            return VirtualChannel.REQUEST
        return VirtualChannel.RESPONSE

    @property
    def is_memory_request(self) -> bool:
        return self in (RequestKind.MEM_READ, RequestKind.MEM_WRITE)


_REQUEST_CLASS = frozenset({
    RequestKind.MEM_READ,
    RequestKind.MEM_WRITE,
    RequestKind.SUBSCRIPTION_REQUEST,
    RequestKind.UNSUBSCRIPTION_REQUEST,
    RequestKind.POLICY_STATS_REPORT,
})


def flits_for(block_bytes: int, flit_bytes: int = FLIT_BYTES) -> int:
    """Flits in a data carrying packet: the block plus one header flit."""
    if block_bytes not in SUPPORTED_BLOCK_BYTES:
        raise ConfigurationError(f'Unsupported block size {block_bytes}, '
                                 f'expected one of {SUPPORTED_BLOCK_BYTES}')
    return ceil_div(block_bytes, flit_bytes) + 1


@dataclass
class LatencyTally:
    """Cycles spent by a packet or request, split in three buckets."""
    network_cycles: int = 0
    queuing_cycles: int = 0
    array_cycles: int = 0

    @property
    def total(self) -> int:
        return self.network_cycles + self.queuing_cycles + self.array_cycles

    def add(self, other: LatencyTally):
        self.network_cycles += other.network_cycles
        self.queuing_cycles += other.queuing_cycles
        self.array_cycles += other.array_cycles


@dataclass(eq=False)
class Packet:
    """A flit counted network message."""
    from_vault: int
    to_vault: int
    addr: int
    kind: RequestKind
    flits: int = 1
    dirty: bool = False
    issue_cycle: int = 0
    meta: Optional[int] = None
    payload: int = 0
    gen: Optional[int] = None
    new_gen: Optional[int] = None
    bounced: bool = False
    acked: bool = False
    request: Any = None
    report: Any = None
    latency_tally: LatencyTally = field(default_factory=LatencyTally)

    # Transport state, owned by the network.
    path: tuple[int, ...] = ()
    hop_index: int = 0
    ready_cycle: int = 0
    arrive_cycle: Optional[int] = None
    queued_since: int = 0

    @property
    def vc(self) -> VirtualChannel:
        return self.kind.vc

    @property
    def hops(self) -> int:
        """Hops traversed so far."""
        return self.hop_index

    @property
    def requester(self) -> int:
        """Vault whose core the packet ultimately works for."""
        return self.from_vault if self.meta is None else self.meta

    def __repr__(self):
        return (f'Packet({self.kind.value} {self.from_vault}->'
                f'{self.to_vault} addr={self.addr:#x} flits={self.flits})')


class LinkBuffer:
    """Bounded FIFO input buffer of one virtual channel of one port."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self.queue: deque[Packet] = deque()
        self.reserved = 0
        self.max_occupancy = 0

    def __len__(self):
        return len(self.queue)

    def has_space(self) -> bool:
        return len(self.queue) + self.reserved < self.capacity

    def reserve(self):
        if not self.has_space():
            raise ProtocolError('Link buffer overflow on reservation')
        self.reserved += 1

    def land(self, packet: Packet):
        """Turns a reservation into an occupied entry."""
        self.reserved -= 1
        self.push(packet)

    def push(self, packet: Packet):
        if len(self.queue) >= self.capacity:
            raise ProtocolError('Link buffer overflow')
        self.queue.append(packet)
        occupancy = len(self.queue) + self.reserved
        if occupancy > self.max_occupancy:
            self.max_occupancy = occupancy

    def head(self) -> Optional[Packet]:
        return self.queue[0] if self.queue else None

    def pop(self) -> Packet:
        return self.queue.popleft()


class Network:
    """Store-and-forward mesh. A packet occupies a link for as many cycles as
    it has flits and waits for room in the next router's input buffer."""

    def __init__(self, topology: Topology, buffer_entries: int = 16,
                 flit_bytes: int = FLIT_BYTES, logger: Logger = None):
        self.topology = topology
        self.buffer_entries = buffer_entries
        self.flit_bytes = flit_bytes
        self.sink: Optional[Callable[[Packet, int], None]] = None
        self.observer: Optional[Callable[[Packet, int], None]] = None

        self.buffers: dict[tuple[int, int, VirtualChannel], LinkBuffer] = {}
        self.router_ports: dict[int, list[tuple[int, VirtualChannel]]] = {}
        self.overflow: dict[tuple[int, VirtualChannel], deque[Packet]] = {}
        self.link_busy_until: dict[tuple[int, int], int] = {}
        self.arrivals: list[tuple[int, int, Packet, int]] = []
        self.buffered = 0
        self.router_load: dict[int, int] = {}
        self._seq = 0

        # Accounting.
        self.sent = 0
        self.delivered = 0
        self.in_transfer = 0

        # Create our logger if needed.
        if logger is None:
            self.logger = Logger('dlpim', 'network')
        else:
            self.logger = logger.for_subsystem('network')

    def send(self, packet: Packet, cycle: int):
        """Injects a packet at its source. Never drops: a full injection
        buffer makes the packet wait at the source, which counts as queuing."""
        packet.path = self.topology.route_positions(packet.from_vault,
                                                    packet.to_vault)
        packet.hop_index = 0
        packet.ready_cycle = cycle
        packet.issue_cycle = cycle
        self.sent += 1

        # Local messages never touch the network.
        if len(packet.path) == 1:
            self._deliver(packet, cycle)
            return

        src = packet.path[0]
        buf = self._buffer(src, LOCAL_PORT, packet.vc)
        if buf.has_space() and not self.overflow.get((src, packet.vc)):
            buf.push(packet)
            self._count(src, 1)
        else:
            self.overflow.setdefault((src, packet.vc), deque()).append(packet)

    def deliver(self, cycle: int):
        """Completes every link transfer that lands this cycle."""
        while self.arrivals and self.arrivals[0][0] <= cycle:
            _, _, packet, prev = heapq.heappop(self.arrivals)
            self.in_transfer -= 1
            packet.hop_index += 1
            here = packet.path[packet.hop_index]
            if packet.hop_index == len(packet.path) - 1:
                self._deliver(packet, cycle)
                continue

            packet.ready_cycle = cycle
            self._buffer(here, prev, packet.vc).land(packet)
            self._count(here, 1)

    def step(self, cycle: int):
        """Starts new transfers on every idle link that has a packet ready."""
        self._drain_overflow()
        if self.buffered == 0:
            return

        for router in sorted(r for r, n in self.router_load.items() if n):
            ports = self.router_ports[router]
            granted: set[int] = set()
            count = len(ports)
            start = cycle % count

            # Responses first, then a rotating port order for fairness.
            for vc in (VirtualChannel.RESPONSE, VirtualChannel.REQUEST):
                for i in range(count):
                    port, port_vc = ports[(start + i) % count]
                    if port_vc != vc:
                        continue
                    buf = self.buffers[(router, port, vc)]
                    packet = buf.head()
                    if packet is None:
                        continue

                    nxt = packet.path[packet.hop_index + 1]
                    if nxt in granted:
                        continue
                    if self.link_busy_until.get((router, nxt), 0) > cycle:
                        continue
                    last_hop = packet.hop_index + 1 == len(packet.path) - 1
                    if not last_hop:
                        down = self._buffer(nxt, router, vc)
                        if not down.has_space():
                            continue
                        down.reserve()

                    # Start the transfer.
                    buf.pop()
                    self._count(router, -1)
                    granted.add(nxt)
                    tally = packet.latency_tally
                    tally.queuing_cycles += cycle - packet.ready_cycle
                    tally.network_cycles += packet.flits
                    self.link_busy_until[(router, nxt)] = cycle + packet.flits
                    self._seq += 1
                    self.in_transfer += 1
                    heapq.heappush(self.arrivals, (cycle + packet.flits,
                                                   self._seq, packet, router))

    def is_idle(self) -> bool:
        """No packet anywhere in the network."""
        return (self.buffered == 0 and self.in_transfer == 0 and
                not any(self.overflow.values()))

    def has_ready_work(self) -> bool:
        """Packets waiting in buffers that may move on the next cycle."""
        return self.buffered > 0 or any(self.overflow.values())

    def next_arrival(self) -> Optional[int]:
        return self.arrivals[0][0] if self.arrivals else None

    def in_flight(self) -> int:
        """Packets sent but not yet delivered."""
        return self.sent - self.delivered

    def queued_at_sources(self) -> int:
        return sum(len(q) for q in self.overflow.values())

    def max_buffer_occupancy(self) -> int:
        return max((b.max_occupancy for b in self.buffers.values()),
                   default=0)

    def check_conservation(self):
        """Sent packets are either delivered or somewhere in the network."""
        located = self.buffered + self.in_transfer + self.queued_at_sources()
        if self.sent != self.delivered + located:
            raise ProtocolError('Network lost or duplicated packets', {
                'sent': self.sent,
                'delivered': self.delivered,
                'located': located
            })

    def _deliver(self, packet: Packet, cycle: int):
        packet.arrive_cycle = cycle
        self.delivered += 1
        if self.observer is not None:
            self.observer(packet, cycle)
        if self.sink is not None:
            self.sink(packet, cycle)

    def _drain_overflow(self):
        for key in sorted(self.overflow, key=lambda k: (k[0], k[1].value)):
            queue = self.overflow[key]
            while queue:
                buf = self._buffer(key[0], LOCAL_PORT, key[1])
                if not buf.has_space():
                    break
                buf.push(queue.popleft())
                self._count(key[0], 1)

    def _count(self, router: int, delta: int):
        self.buffered += delta
        self.router_load[router] = self.router_load.get(router, 0) + delta

    def _buffer(self, router: int, port: int,
                vc: VirtualChannel) -> LinkBuffer:
        key = (router, port, vc)
        buf = self.buffers.get(key)
        if buf is None:
            buf = LinkBuffer(self.buffer_entries)
            self.buffers[key] = buf
            ports = self.router_ports.setdefault(router, [])
            ports.append((port, vc))
            ports.sort(key=lambda p: (p[0], p[1].value))

        return buf
