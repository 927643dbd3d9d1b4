#!/usr/bin/env python3

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Optional, TYPE_CHECKING

from dlpim.adaptive import LeaderClass
from dlpim.exceptions import ProtocolError
from dlpim.internal_utils import saturating_inc
from dlpim.logger import Logger
from dlpim.network import Packet, RequestKind

# Ensure we have modules available only for type checking.
if TYPE_CHECKING:
    from dlpim.engine import Simulator
    from dlpim.vault import Vault


class SubState(Enum):
    """Subscription table entry states."""
    UNSUBSCRIBED = 'Unsubscribed'
    PENDING_SUBSCRIPTION = 'PendingSubscription'
    SUBSCRIBED = 'Subscribed'
    PENDING_RESUBSCRIPTION = 'PendingResubscription'
    PENDING_UNSUBSCRIPTION = 'PendingUnsubscription'

    @property
    def pending(self) -> bool:
        return self not in (SubState.UNSUBSCRIBED, SubState.SUBSCRIBED)


@dataclass(eq=False)
class SubscriptionEntry:
    """One subscription table record. At the block's home it says where the
    block lives, at the holder it says which slot keeps it."""
    orig_addr: int
    current_vault: int
    state: SubState
    set_index: int
    way: int
    home: bool
    slot: Optional[int] = None
    freq: int = 0
    last_touch: int = 0
    leader_class: LeaderClass = LeaderClass.NORMAL
    gen: Optional[int] = None
    new_gen: Optional[int] = None
    requester: Optional[int] = None
    returned: bool = False
    deferred_unsub: bool = False
    local_hits: int = 0
    remote_hits: int = 0

    def touch(self, cycle: int, bits: int = 8):
        self.freq = saturating_inc(self.freq, bits)
        self.last_touch = cycle

    def __repr__(self):
        return (f'Entry({self.state.value} addr={self.orig_addr:#x} '
                f'at={self.current_vault} home={self.home} gen={self.gen})')


class SubscriptionTable:
    """Set associative subscription table of a single vault."""

    def __init__(self, sets: int, ways: int):
        self.sets = sets
        self.ways = ways
        self.entries: dict[int, SubscriptionEntry] = {}
        self._ways: list[list[Optional[SubscriptionEntry]]] = [
            [None] * ways for _ in range(sets)]

    def __len__(self):
        return len(self.entries)

    def __iter__(self) -> Iterator[SubscriptionEntry]:
        return iter(list(self.entries.values()))

    def lookup(self, addr: int) -> Optional[SubscriptionEntry]:
        return self.entries.get(addr)

    def live(self, set_index: int) -> int:
        """Entries occupying a set. Unsubscribed entries are never kept."""
        return sum(1 for e in self._ways[set_index] if e is not None)

    def in_set(self, set_index: int) -> list[SubscriptionEntry]:
        return [e for e in self._ways[set_index] if e is not None]

    def allocate(self, addr: int, set_index: int, state: SubState,
                 current_vault: int, home: bool, cycle: int,
                 leader: LeaderClass = LeaderClass.NORMAL) \
            -> SubscriptionEntry:
        """Claims a free way for a new entry."""
        if addr in self.entries:
            raise ProtocolError('Duplicate subscription table entry',
                                {'addr': addr})

        ways = self._ways[set_index]
        for way, occupant in enumerate(ways):
            if occupant is None:
                entry = SubscriptionEntry(
                    orig_addr=addr, current_vault=current_vault,
                    state=state, set_index=set_index, way=way, home=home,
                    slot=None if home else set_index * self.ways + way,
                    last_touch=cycle, leader_class=leader)
                ways[way] = entry
                self.entries[addr] = entry
                return entry

        raise ProtocolError('Subscription table set overflow',
                            {'addr': addr, 'set': set_index})

    def remove(self, entry: SubscriptionEntry):
        """Reclaims an entry. It is Unsubscribed from now on."""
        if self.entries.get(entry.orig_addr) is not entry:
            raise ProtocolError('Removing an entry that is not in the table',
                                {'entry': repr(entry)})
        del self.entries[entry.orig_addr]
        self._ways[entry.set_index][entry.way] = None
        entry.state = SubState.UNSUBSCRIBED

    def pick_victim(self, set_index: int) -> Optional[SubscriptionEntry]:
        """Least frequently used Subscribed entry of a set, the least recently
        used one on ties. Pending entries can't be evicted."""
        best = None
        for entry in self._ways[set_index]:
            if entry is None or entry.state != SubState.SUBSCRIBED:
                continue
            if best is None or ((entry.freq, entry.last_touch) <
                                (best.freq, best.last_touch)):
                best = entry

        return best

    def age(self):
        """Halves every frequency counter."""
        for entry in self.entries.values():
            entry.freq >>= 1

    def pending(self) -> list[SubscriptionEntry]:
        return [e for e in self.entries.values() if e.state.pending]


@dataclass(eq=False)
class BufferEntry:
    """A subscription request waiting for room in its table set."""
    from_vault: int
    to_vault: int
    addr: int
    set_index: int
    home_side: bool
    valid: bool = False
    victim: Optional[SubscriptionEntry] = None


class SubscriptionBuffer:
    """Small fully associative store of subscription requests that found
    their table set full."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self.entries: list[BufferEntry] = []

    def __len__(self):
        return len(self.entries)

    def is_full(self) -> bool:
        return len(self.entries) >= self.capacity

    def add(self, entry: BufferEntry):
        if self.is_full():
            raise ProtocolError('Subscription buffer overflow')
        self.entries.append(entry)

    def remove(self, entry: BufferEntry):
        self.entries.remove(entry)

    def contains(self, addr: int, home_side: bool) -> bool:
        return any(e.addr == addr and e.home_side == home_side
                   for e in self.entries)

    def buffered(self, set_index: int) -> int:
        return sum(1 for e in self.entries if e.set_index == set_index)

    def valid(self, set_index: int) -> int:
        return sum(1 for e in self.entries
                   if e.set_index == set_index and e.valid)


class SubscriptionProtocol:
    """The subscription state machine. Every handler runs when a vault
    dequeues the packet, so each one sees a consistent snapshot of the
    vault it runs on."""

    def __init__(self, sim: Simulator, logger: Logger = None):
        self.sim = sim
        self.amap = sim.amap
        self.topology = sim.topology
        self.config = sim.config.subscription
        self.t_array = sim.config.memory.t_array
        self.data_flits = sim.data_flits
        self.counters = sim.counters
        self._gen = 0

        # Create our logger if needed.
        if logger is None:
            self.logger = Logger('dlpim', 'protocol')
        else:
            self.logger = logger.for_subsystem('protocol')

    def dispatch(self, vault: Vault, packet: Packet, cycle: int):
        """Handles a packet dequeued by a vault."""
        match packet.kind:
            case RequestKind.MEM_READ | RequestKind.MEM_WRITE:
                self.handle_mem_request(vault, packet, cycle)
            case RequestKind.SUBSCRIPTION_REQUEST:
                if vault.id == self.amap.home(packet.addr):
                    self.handle_subscription_request(vault, packet, cycle)
                else:
                    self.handle_resubscription(vault, packet, cycle)
            case RequestKind.SUBSCRIPTION_DATA_TRANSFER:
                self.handle_data_transfer(vault, packet, cycle)
            case RequestKind.SUBSCRIPTION_TRANSFER_ACK:
                self.handle_transfer_ack(vault, packet, cycle)
            case RequestKind.SUBSCRIPTION_NACK:
                self.handle_nack(vault, packet, cycle)
            case RequestKind.UNSUBSCRIPTION_REQUEST:
                self.handle_unsubscription_request(vault, packet, cycle)
            case RequestKind.UNSUBSCRIPTION_TRANSFER_ACK:
                self.handle_return(vault, packet, cycle)
            case _:
                raise ProtocolError(f'Vault {vault.id} can not service a '
                                    f'{packet.kind.value} packet',
                                    logger=self.logger)

    # Memory accesses.

    def handle_mem_request(self, vault: Vault, packet: Packet, cycle: int):
        """Serves, redirects or bounces a memory access."""
        entry = vault.table.lookup(packet.addr)
        if (entry is not None and not entry.home and
                entry.state == SubState.SUBSCRIBED):
            self._serve_from_slot(vault, entry, packet, cycle)
        elif vault.id == self.amap.home(packet.addr):
            self.lookup_and_redirect(vault, packet, cycle)
        else:
            self._bounce(vault, entry, packet, cycle)

    def lookup_and_redirect(self, vault: Vault, packet: Packet, cycle: int):
        """Serves an access at the block's home or sends it after the block."""
        entry = vault.table.lookup(packet.addr)
        if entry is None:
            self.sim.serve_access(vault, packet, cycle, slot=None)
            return

        # A bounce from a holder that is still returning the block waits
        # for the block to arrive.
        if entry.state.pending or (
                packet.bounced and packet.gen is not None and
                entry.state == SubState.SUBSCRIBED and
                entry.current_vault == packet.from_vault and
                entry.gen == packet.gen):
            vault.park(packet, cycle)
            return

        # Subscribed elsewhere.
        entry.touch(cycle, self.config.freq_bits)
        fwd = Packet(vault.id, entry.current_vault, packet.addr, packet.kind,
                     flits=packet.flits, meta=packet.requester,
                     payload=packet.payload, gen=entry.gen,
                     acked=packet.acked, request=packet.request)
        ack = (packet.kind == RequestKind.MEM_WRITE and
               self.config.write_ack_on_forward and not packet.acked)
        fwd.acked = fwd.acked or ack
        self.sim.send(fwd, cycle)

        # The ack follows the forward onto the link, one cycle later.
        if ack:
            self.sim.acknowledge_write(vault, packet.request, cycle, delay=1)

    def _serve_from_slot(self, vault: Vault, entry: SubscriptionEntry,
                         packet: Packet, cycle: int):
        entry.touch(cycle, self.config.freq_bits)
        if packet.requester == vault.id:
            entry.local_hits += 1
        else:
            entry.remote_hits += 1
        self.sim.serve_access(vault, packet, cycle, slot=entry.slot)

    def _bounce(self, vault: Vault, entry: Optional[SubscriptionEntry],
                packet: Packet, cycle: int):
        """Sends an access that reached a vault no longer holding the block
        back to the block's home."""
        gen = None
        if entry is not None and not entry.home:
            gen = entry.gen
        bounce = Packet(vault.id, self.amap.home(packet.addr), packet.addr,
                        packet.kind, flits=packet.flits,
                        meta=packet.requester, payload=packet.payload,
                        gen=gen, bounced=True, acked=packet.acked,
                        request=packet.request)
        self.logger.debug('bounce', f'Vault {vault.id} bounced an access to '
                          f'{packet.addr:#x} back home')
        self.sim.send(bounce, cycle)

    # Subscription initiation.

    def policy_allows(self, vault: Vault, addr: int) -> bool:
        """Whether the policy of the block's set wants a subscription."""
        match self.sim.leader_of(self.amap.set_index(addr)):
            case LeaderClass.ALWAYS_ON_LEADER:
                return True
            case LeaderClass.ALWAYS_OFF_LEADER:
                return False

        return vault.policy_on

    def on_first_remote_access(self, vault: Vault, addr: int, cycle: int):
        """Starts a subscription for a block a core accessed remotely."""
        if not self.policy_allows(vault, addr):
            return

        entry = vault.table.lookup(addr)
        if vault.id == self.amap.home(addr):
            # The home core wants its own block back.
            if entry is not None:
                self.counters.conversions += 1
                self.request_unsubscription(vault, entry, cycle)
            return
        if entry is not None or vault.buffer.contains(addr, False):
            return

        self.counters.attempted += 1
        set_index = self.amap.set_index(addr)
        if self._free(vault, set_index) > 0:
            self._start_subscription(vault, addr, set_index, cycle)
            return

        # Wait for room in the set, making some if we can.
        if vault.buffer.is_full():
            self.counters.buffer_overflows += 1
            self.logger.debug('buffer_full', f'Vault {vault.id} dropped a '
                              f'subscription to {addr:#x}')
            return
        victim = vault.table.pick_victim(set_index)
        if victim is not None:
            self.evict(vault, victim, cycle)
        vault.buffer.add(BufferEntry(vault.id, self.amap.home(addr), addr,
                                     set_index, home_side=False,
                                     victim=victim))
        self.counters.buffered += 1

    def _free(self, vault: Vault, set_index: int) -> int:
        return (vault.table.ways - vault.table.live(set_index) -
                vault.buffer.buffered(set_index))

    def _start_subscription(self, vault: Vault, addr: int, set_index: int,
                            cycle: int):
        vault.table.allocate(addr, set_index, SubState.PENDING_SUBSCRIPTION,
                             vault.id, home=False, cycle=cycle,
                             leader=self.sim.leader_of(set_index))
        self.sim.send(Packet(vault.id, self.amap.home(addr), addr,
                             RequestKind.SUBSCRIPTION_REQUEST, meta=vault.id),
                      cycle)

    def _next_gen(self) -> int:
        self._gen += 1
        return self._gen

    # Home side.

    def handle_subscription_request(self, vault: Vault, packet: Packet,
                                    cycle: int, reserved: bool = False):
        """Grants, redirects, buffers or refuses a subscription request at
        the block's home."""
        addr = packet.addr
        requester = packet.requester
        entry = vault.table.lookup(addr)

        # Subscribing to our own block means taking it back.
        if requester == vault.id:
            if entry is not None:
                self.counters.conversions += 1
                self.request_unsubscription(vault, entry, cycle)
            return

        if entry is None:
            set_index = self.amap.set_index(addr)
            if reserved or self._free(vault, set_index) > 0:
                self._grant(vault, addr, set_index, requester, cycle)
                return

            if vault.buffer.is_full():
                self.counters.buffer_overflows += 1
                self._nack(vault.id, requester, addr, cycle)
                return

            # A set of pending entries defers the request until one settles.
            victim = vault.table.pick_victim(set_index)
            if victim is not None:
                self.evict(vault, victim, cycle)
            vault.buffer.add(BufferEntry(requester, vault.id, addr, set_index,
                                         home_side=True,
                                         victim=victim))
            self.counters.buffered += 1
        elif (entry.state == SubState.SUBSCRIBED and
              entry.current_vault != requester):
            # Resubscription: the holder passes the block on.
            entry.state = SubState.PENDING_RESUBSCRIPTION
            entry.requester = requester
            entry.new_gen = self._next_gen()
            self.sim.send(Packet(vault.id, entry.current_vault, addr,
                                 RequestKind.SUBSCRIPTION_REQUEST,
                                 meta=requester, gen=entry.gen,
                                 new_gen=entry.new_gen), cycle)
        else:
            self._nack(vault.id, requester, addr, cycle)

    def _grant(self, vault: Vault, addr: int, set_index: int, requester: int,
               cycle: int):
        entry = vault.table.allocate(addr, set_index,
                                     SubState.PENDING_SUBSCRIPTION, requester,
                                     home=True, cycle=cycle,
                                     leader=self.sim.leader_of(set_index))
        entry.gen = self._next_gen()
        payload = vault.memory.read_home(addr)
        self.sim.send(Packet(vault.id, requester, addr,
                             RequestKind.SUBSCRIPTION_DATA_TRANSFER,
                             flits=self.data_flits, payload=payload,
                             gen=entry.gen), cycle, delay=self.t_array)

    def _nack(self, src: int, requester: int, addr: int, cycle: int,
              gen: Optional[int] = None):
        self.sim.send(Packet(src, requester, addr,
                             RequestKind.SUBSCRIPTION_NACK, meta=requester,
                             gen=gen), cycle)

    def handle_nack(self, vault: Vault, packet: Packet, cycle: int):
        """Rolls back a subscription that could not happen."""
        entry = vault.table.lookup(packet.addr)
        if vault.id == self.amap.home(packet.addr):
            # The holder refused to pass the block on.
            if (entry is None or
                    entry.state != SubState.PENDING_RESUBSCRIPTION or
                    entry.requester != packet.requester):
                raise ProtocolError('Unexpected resubscription NACK',
                                    {'entry': repr(entry), 'vault': vault.id},
                                    logger=self.logger)

            requester = entry.requester
            if entry.returned:
                vault.table.remove(entry)
            else:
                entry.state = SubState.SUBSCRIBED
                entry.requester = None
                entry.new_gen = None
                if entry.deferred_unsub:
                    entry.deferred_unsub = False
                    self.request_unsubscription(vault, entry, cycle)
            self._nack(vault.id, requester, packet.addr, cycle)
            self.settle(vault, packet.addr, cycle)
            return

        if (entry is None or entry.home or
                entry.state != SubState.PENDING_SUBSCRIPTION):
            raise ProtocolError('NACK for a subscription that is not pending',
                                {'entry': repr(entry), 'vault': vault.id},
                                logger=self.logger)
        vault.table.remove(entry)
        self.counters.nacked += 1
        self.logger.debug('nack', f'Vault {vault.id} subscription to '
                          f'{packet.addr:#x} was refused')

    # Holder side.

    def handle_resubscription(self, vault: Vault, packet: Packet,
                              cycle: int):
        """Passes a held block on to a new requester."""
        entry = vault.table.lookup(packet.addr)
        if (entry is None or entry.home or
                entry.state != SubState.SUBSCRIBED or
                entry.gen != packet.gen):
            self.sim.send(Packet(vault.id, packet.from_vault, packet.addr,
                                 RequestKind.SUBSCRIPTION_NACK,
                                 meta=packet.requester, gen=packet.gen),
                          cycle)
            return

        entry.state = SubState.PENDING_RESUBSCRIPTION
        self._end_tenure(entry)
        payload, dirty = vault.memory.read_slot(entry.slot, packet.addr)
        self.sim.send(Packet(vault.id, packet.requester, packet.addr,
                             RequestKind.SUBSCRIPTION_DATA_TRANSFER,
                             flits=self.data_flits, dirty=dirty,
                             payload=payload, gen=packet.new_gen),
                      cycle, delay=self.t_array)

    def handle_data_transfer(self, vault: Vault, packet: Packet, cycle: int):
        """Installs a freshly subscribed block and acknowledges it."""
        addr = packet.addr
        entry = vault.table.lookup(addr)
        if (entry is None or entry.home or
                entry.state != SubState.PENDING_SUBSCRIPTION):
            raise ProtocolError('Data transfer without a pending '
                                'subscription',
                                {'entry': repr(entry), 'vault': vault.id},
                                logger=self.logger)

        entry.state = SubState.SUBSCRIBED
        entry.gen = packet.gen
        entry.freq = 0
        entry.last_touch = cycle
        entry.local_hits = 0
        entry.remote_hits = 0
        vault.memory.fill_slot(entry.slot, addr, packet.payload, packet.dirty)

        home = self.amap.home(addr)
        self.sim.send(Packet(vault.id, home, addr,
                             RequestKind.SUBSCRIPTION_TRANSFER_ACK,
                             gen=packet.gen), cycle)
        if packet.from_vault != home:
            self.counters.resubscriptions += 1
            self.sim.send(Packet(vault.id, packet.from_vault, addr,
                                 RequestKind.SUBSCRIPTION_TRANSFER_ACK,
                                 gen=packet.gen), cycle)
        self.counters.completed += 1

        # Moving the block cost hops nobody would have paid otherwise.
        self.sim.record_hop_feedback(
            vault.id, packet.from_vault, addr,
            actual_hops=self.topology.manhattan(packet.from_vault, vault.id),
            estimated_hops=0)

    def handle_transfer_ack(self, vault: Vault, packet: Packet, cycle: int):
        """Completes a transition. What it completes depends on the state of
        the entry it reaches."""
        entry = vault.table.lookup(packet.addr)
        if entry is None:
            raise ProtocolError('Transfer acknowledgment for a missing entry',
                                {'addr': packet.addr, 'vault': vault.id},
                                logger=self.logger)

        if entry.home:
            match entry.state:
                case SubState.PENDING_SUBSCRIPTION:
                    if packet.from_vault != entry.current_vault:
                        raise ProtocolError('Subscription acknowledged by '
                                            'the wrong vault',
                                            {'entry': repr(entry)},
                                            logger=self.logger)
                case SubState.PENDING_RESUBSCRIPTION:
                    if packet.from_vault != entry.requester:
                        raise ProtocolError('Resubscription acknowledged by '
                                            'the wrong vault',
                                            {'entry': repr(entry)},
                                            logger=self.logger)
                    entry.current_vault = entry.requester
                    entry.gen = entry.new_gen
                case _:
                    raise ProtocolError('Unexpected acknowledgment at home',
                                        {'entry': repr(entry)},
                                        logger=self.logger)

            entry.state = SubState.SUBSCRIBED
            entry.requester = None
            entry.new_gen = None
            entry.returned = False
            if entry.deferred_unsub:
                entry.deferred_unsub = False
                self.request_unsubscription(vault, entry, cycle)
            self.settle(vault, packet.addr, cycle)
            return

        # Holder side: either the new holder took the block or the home got
        # it back. Both mean our copy is gone.
        if entry.state not in (SubState.PENDING_RESUBSCRIPTION,
                               SubState.PENDING_UNSUBSCRIPTION):
            raise ProtocolError('Unexpected acknowledgment at holder',
                                {'entry': repr(entry)}, logger=self.logger)
        vault.memory.release_slot(entry.slot, transferred=True)
        vault.table.remove(entry)

    # Unsubscription.

    def request_unsubscription(self, vault: Vault, entry: SubscriptionEntry,
                               cycle: int):
        """Home side request for a block to come back."""
        match entry.state:
            case SubState.SUBSCRIBED:
                entry.state = SubState.PENDING_UNSUBSCRIPTION
                self.sim.send(Packet(vault.id, entry.current_vault,
                                     entry.orig_addr,
                                     RequestKind.UNSUBSCRIPTION_REQUEST,
                                     gen=entry.gen), cycle)
            case SubState.PENDING_SUBSCRIPTION | \
                    SubState.PENDING_RESUBSCRIPTION:
                # Wait until the subscription flow completes.
                entry.deferred_unsub = True

    def evict(self, vault: Vault, victim: SubscriptionEntry, cycle: int):
        """Frees the way of a victim entry, whichever side it lives on."""
        self.logger.debug('evict', f'Vault {vault.id} evicts '
                          f'{victim.orig_addr:#x}', {'entry': repr(victim)})
        if victim.home:
            self.request_unsubscription(vault, victim, cycle)
        else:
            self.unsubscribe(vault, victim, cycle)

    def handle_unsubscription_request(self, vault: Vault, packet: Packet,
                                      cycle: int):
        """The home wants its block back. Stale requests are dropped."""
        entry = vault.table.lookup(packet.addr)
        if (entry is None or entry.home or
                entry.state != SubState.SUBSCRIBED or
                entry.gen != packet.gen):
            self.logger.debug('stale_unsubscription', f'Vault {vault.id} '
                              f'ignored an unsubscription of '
                              f'{packet.addr:#x}')
            return

        self.unsubscribe(vault, entry, cycle)

    def unsubscribe(self, vault: Vault, entry: SubscriptionEntry, cycle: int):
        """Returns a held block home. Only dirty blocks travel with their
        data, clean ones just need an acknowledgment."""
        if entry.state != SubState.SUBSCRIBED:
            raise ProtocolError('Unsubscribing an entry that is not '
                                'subscribed', {'entry': repr(entry)},
                                logger=self.logger)

        entry.state = SubState.PENDING_UNSUBSCRIPTION
        self._end_tenure(entry)
        payload, dirty = vault.memory.read_slot(entry.slot, entry.orig_addr)
        packet = Packet(vault.id, self.amap.home(entry.orig_addr),
                        entry.orig_addr,
                        RequestKind.UNSUBSCRIPTION_TRANSFER_ACK,
                        flits=self.data_flits if dirty else 1, dirty=dirty,
                        payload=payload, gen=entry.gen)
        if dirty:
            self.counters.writebacks += 1
            self.sim.send(packet, cycle, delay=self.t_array)
        else:
            self.counters.clean_releases += 1
            self.sim.send(packet, cycle)

    def handle_return(self, vault: Vault, packet: Packet, cycle: int):
        """A block came back home."""
        entry = vault.table.lookup(packet.addr)
        if (entry is None or not entry.home or
                entry.current_vault != packet.from_vault or
                entry.gen != packet.gen):
            raise ProtocolError('Block returned by a vault that does not '
                                'hold it', {'entry': repr(entry),
                                            'from': packet.from_vault},
                                logger=self.logger)

        if packet.dirty:
            vault.memory.write_home(packet.addr, packet.payload)
        release = Packet(vault.id, packet.from_vault, packet.addr,
                         RequestKind.SUBSCRIPTION_TRANSFER_ACK,
                         gen=packet.gen)
        self.sim.send(release, cycle,
                      delay=self.t_array if packet.dirty else 0)

        match entry.state:
            case SubState.SUBSCRIBED | SubState.PENDING_UNSUBSCRIPTION:
                vault.table.remove(entry)
                self.counters.unsubscriptions += 1
                self.settle(vault, packet.addr, cycle)
            case SubState.PENDING_RESUBSCRIPTION:
                # The holder left before it saw the resubscription, its NACK
                # is on the way.
                entry.returned = True
                self.counters.unsubscriptions += 1
            case _:
                raise ProtocolError('Block returned during a subscription',
                                    {'entry': repr(entry)},
                                    logger=self.logger)

    def settle(self, vault: Vault, addr: int, cycle: int):
        """Replays the accesses that waited for a block to settle."""
        entry = vault.table.lookup(addr)
        if entry is not None and entry.state.pending:
            return
        vault.replay(addr)

    def _end_tenure(self, entry: SubscriptionEntry):
        self.sim.record_reuse(entry.local_hits, entry.remote_hits)
        entry.local_hits = 0
        entry.remote_hits = 0

    # Subscription buffers.

    def process_buffers(self, cycle: int) -> bool:
        """Moves at most one buffered request per vault forward. Returns True
        if any vault could make progress on the next cycle as well."""
        again = False
        for vault in self.sim.vaults:
            if not vault.buffer.entries:
                continue

            processed = False
            for buffered in list(vault.buffer.entries):
                table = vault.table
                space = (table.ways - table.live(buffered.set_index) -
                         vault.buffer.valid(buffered.set_index))
                if not buffered.valid and space > 0:
                    buffered.valid = True

                if buffered.valid and not processed:
                    vault.buffer.remove(buffered)
                    self._process_buffered(vault, buffered, cycle)
                    processed = True
                elif buffered.valid:
                    again = True
                elif (buffered.victim is None or buffered.victim.state !=
                      SubState.PENDING_UNSUBSCRIPTION):
                    # Make room once there is something to evict.
                    victim = table.pick_victim(buffered.set_index)
                    if victim is not None:
                        buffered.victim = victim
                        self.evict(vault, victim, cycle)

        return again

    def _process_buffered(self, vault: Vault, buffered: BufferEntry,
                          cycle: int):
        if buffered.home_side:
            request = Packet(buffered.from_vault, vault.id, buffered.addr,
                             RequestKind.SUBSCRIPTION_REQUEST,
                             meta=buffered.from_vault)
            self.handle_subscription_request(vault, request, cycle,
                                             reserved=True)
            return

        # The requester may have lost interest or got the block meanwhile.
        if (vault.table.lookup(buffered.addr) is not None or
                not self.policy_allows(vault, buffered.addr)):
            self.counters.abandoned += 1
            return
        self._start_subscription(vault, buffered.addr, buffered.set_index,
                                 cycle)

    def abandon_requests(self):
        """Drops the requester side buffered subscriptions. Used once the
        cores have nothing left to run."""
        for vault in self.sim.vaults:
            for buffered in list(vault.buffer.entries):
                if not buffered.home_side:
                    vault.buffer.remove(buffered)
                    self.counters.abandoned += 1

    # Audits.

    def audit(self, strict: bool = False):
        """Checks the protocol invariants. The relaxed audit holds at any
        point in time, the strict one only once everything has drained."""
        ways = self.config.ways
        for vault in self.sim.vaults:
            table = vault.table
            for set_index in range(table.sets):
                if table.live(set_index) > ways:
                    raise ProtocolError('Subscription table set over '
                                        'capacity', {'vault': vault.id,
                                                     'set': set_index},
                                        logger=self.logger)
            if len(vault.buffer) > vault.buffer.capacity:
                raise ProtocolError('Subscription buffer over capacity',
                                    {'vault': vault.id}, logger=self.logger)

            # Slots hold data exactly while a holder entry points at them.
            holding = {}
            for entry in table:
                if not entry.home and entry.state in (
                        SubState.SUBSCRIBED, SubState.PENDING_RESUBSCRIPTION,
                        SubState.PENDING_UNSUBSCRIPTION):
                    holding[entry.slot] = entry
            for index, slot in enumerate(vault.memory.slots):
                if slot.dirty and not slot.valid:
                    raise ProtocolError('Dirty slot without data',
                                        {'vault': vault.id, 'slot': index},
                                        logger=self.logger)
                if slot.valid != (index in holding):
                    raise ProtocolError('Reserved slot out of sync with the '
                                        'subscription table',
                                        {'vault': vault.id, 'slot': index},
                                        logger=self.logger)
                if slot.valid and slot.orig_addr != holding[index].orig_addr:
                    raise ProtocolError('Reserved slot holds the wrong block',
                                        {'vault': vault.id, 'slot': index},
                                        logger=self.logger)

        if strict:
            self._audit_quiescent()

    def _audit_quiescent(self):
        for vault in self.sim.vaults:
            pending = vault.table.pending()
            if pending:
                raise ProtocolError('Pending entries left after drain',
                                    {'vault': vault.id,
                                     'entries': [repr(e) for e in pending]},
                                    logger=self.logger)
            if vault.buffer.entries or vault.parked():
                raise ProtocolError('Buffered or parked requests left after '
                                    'drain', {'vault': vault.id},
                                    logger=self.logger)

            # Every subscription has exactly one matching partner.
            for entry in vault.table:
                if entry.home:
                    partner = self.sim.vaults[entry.current_vault] \
                        .table.lookup(entry.orig_addr)
                    ok = (partner is not None and not partner.home and
                          partner.state == SubState.SUBSCRIBED and
                          partner.gen == entry.gen)
                else:
                    home = self.sim.vaults[self.amap.home(entry.orig_addr)]
                    partner = home.table.lookup(entry.orig_addr)
                    ok = (partner is not None and partner.home and
                          partner.current_vault == vault.id and
                          partner.gen == entry.gen)
                if not ok:
                    raise ProtocolError('Unpaired subscription entry',
                                        {'vault': vault.id,
                                         'entry': repr(entry),
                                         'partner': repr(partner)},
                                        logger=self.logger)
