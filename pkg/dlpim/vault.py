#!/usr/bin/env python3

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Optional

from dlpim.adaptive import PolicyRegisters
from dlpim.exceptions import ProtocolError
from dlpim.network import Packet
from dlpim.protocol import SubscriptionBuffer, SubscriptionTable


class AddressMap:
    """Block interleaving of byte addresses over the vaults."""

    def __init__(self, block_bytes: int, vault_count: int, sets: int):
        self.block_bytes = block_bytes
        self.vault_count = vault_count
        self.sets = sets

    def align(self, addr: int) -> int:
        """Start address of the block holding a byte address."""
        return addr - addr % self.block_bytes

    def home(self, addr: int) -> int:
        """Vault that owns a block."""
        return (addr // self.block_bytes) % self.vault_count

    def set_index(self, addr: int) -> int:
        """Subscription table set of a block, taken from the block number
        bits above the vault interleaving bits."""
        return (addr // self.block_bytes // self.vault_count) % self.sets


@dataclass
class ReservedSlot:
    """Reserved space for one subscribed block."""
    orig_addr: Optional[int] = None
    payload: int = 0
    dirty: bool = False
    valid: bool = False


class VaultMemory:
    """Data image of a vault. Payloads are write versions, zero meaning the
    block was never written."""

    def __init__(self, vault_id: int, slots: int):
        self.vault_id = vault_id
        self.home_blocks: dict[int, int] = {}
        self.slots = [ReservedSlot() for _ in range(slots)]

    def read_home(self, addr: int) -> int:
        return self.home_blocks.get(addr, 0)

    def write_home(self, addr: int, payload: int):
        self.home_blocks[addr] = payload

    def read_slot(self, slot: int, addr: int) -> tuple[int, bool]:
        """Payload and dirty bit of a subscribed block."""
        entry = self._slot(slot, addr)
        return entry.payload, entry.dirty

    def write_slot(self, slot: int, addr: int, payload: int):
        entry = self._slot(slot, addr)
        entry.payload = payload
        entry.dirty = True

    def fill_slot(self, slot: int, addr: int, payload: int, dirty: bool):
        entry = self.slots[slot]
        if entry.valid:
            raise ProtocolError('Filling a reserved slot that is in use',
                                {'vault': self.vault_id, 'slot': slot})
        entry.orig_addr = addr
        entry.payload = payload
        entry.dirty = dirty
        entry.valid = True

    def release_slot(self, slot: int, transferred: bool):
        """Frees a slot. Dirty data must have left with a transfer."""
        entry = self.slots[slot]
        if entry.dirty and not transferred:
            raise ProtocolError('Dirty subscribed block released without a '
                                'writeback', {'vault': self.vault_id,
                                              'slot': slot,
                                              'addr': entry.orig_addr})
        entry.orig_addr = None
        entry.payload = 0
        entry.dirty = False
        entry.valid = False

    def _slot(self, slot: Optional[int], addr: int) -> ReservedSlot:
        if slot is None or not self.slots[slot].valid or \
                self.slots[slot].orig_addr != addr:
            raise ProtocolError(f'Block {addr:#x} is not subscribed in vault '
                                f'{self.vault_id}', {'slot': slot})
        return self.slots[slot]


class ServiceQueue:
    """Packets delivered to a vault, waiting to be served."""

    def __init__(self):
        self.queue: deque[Packet] = deque()
        self.max_occupancy = 0

    def __len__(self):
        return len(self.queue)

    def push(self, packet: Packet, cycle: int):
        packet.queued_since = cycle
        self.queue.append(packet)
        self._track()

    def push_front(self, packets: list[Packet]):
        """Puts packets back at the head, keeping their order."""
        for packet in reversed(packets):
            self.queue.appendleft(packet)
        self._track()

    def pop(self) -> Packet:
        return self.queue.popleft()

    def _track(self):
        if len(self.queue) > self.max_occupancy:
            self.max_occupancy = len(self.queue)


class Vault:
    """Memory controller of a vault. Serves one packet per cycle."""

    def __init__(self, vault_id: int, sets: int, ways: int,
                 buffer_entries: int, t_array: int,
                 handler: Callable[[Vault, Packet, int], None] = None):
        self.id = vault_id
        self.t_array = t_array
        self.memory = VaultMemory(vault_id, sets * ways)
        self.table = SubscriptionTable(sets, ways)
        self.buffer = SubscriptionBuffer(buffer_entries)
        self.registers = PolicyRegisters()
        self.queue = ServiceQueue()
        self.conflicts: dict[int, list[Packet]] = {}
        self.policy_on = True
        self.handler = handler
        self.served_cycle = -1
        self.served = 0

    def enqueue(self, packet: Packet, cycle: int):
        """Accepts a packet delivered by the network."""
        self.queue.push(packet, cycle)

    def submit_local(self, packet: Packet, cycle: int):
        """Accepts an access from the vault's own core. It is served right
        away when the controller is free this cycle."""
        if self.served_cycle != cycle and not self.queue.queue:
            packet.queued_since = cycle
            self._serve(packet, cycle)
        else:
            self.queue.push(packet, cycle)

    def serve_one(self, cycle: int) -> Optional[Packet]:
        """Dequeues and handles at most one packet."""
        if self.served_cycle == cycle or not self.queue.queue:
            return None

        packet = self.queue.pop()
        self._serve(packet, cycle)
        return packet

    def has_work(self) -> bool:
        return bool(self.queue.queue)

    def _serve(self, packet: Packet, cycle: int):
        self.served_cycle = cycle
        self.served += 1
        if packet.request is not None:
            packet.request.tally.queuing_cycles += cycle - packet.queued_since
        self.handler(self, packet, cycle)

    def local_read(self, addr: int, slot: Optional[int]) -> int:
        """Reads a block that lives here, from its home location or from the
        reserved space."""
        if slot is not None:
            return self.memory.read_slot(slot, addr)[0]
        self._check_home(addr)
        return self.memory.read_home(addr)

    def local_write(self, addr: int, payload: int, slot: Optional[int]):
        """Writes a block that lives here. Subscribed blocks become dirty."""
        if slot is not None:
            self.memory.write_slot(slot, addr, payload)
            return
        self._check_home(addr)
        self.memory.write_home(addr, payload)

    def park(self, packet: Packet, cycle: int):
        """Holds an access until the block it needs settles."""
        packet.queued_since = cycle
        self.conflicts.setdefault(packet.addr, []).append(packet)

    def replay(self, addr: int):
        """Returns parked accesses to the head of the queue. The time they
        spent parked counts as queuing."""
        packets = self.conflicts.pop(addr, None)
        if packets:
            self.queue.push_front(packets)

    def parked(self) -> int:
        return sum(len(p) for p in self.conflicts.values())

    def _check_home(self, addr: int):
        entry = self.table.lookup(addr)
        if entry is not None:
            raise ProtocolError(f'Block {addr:#x} is not at home in vault '
                                f'{self.id}', {'entry': repr(entry)})

    def __repr__(self):
        return (f'Vault({self.id}, queued={len(self.queue)}, '
                f'entries={len(self.table)})')
