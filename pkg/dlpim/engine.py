#!/usr/bin/env python3

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Optional

from dlpim.adaptive import AdaptivePolicy, LeaderClass, PolicyReport, \
    leader_sets
from dlpim.cache import L1Filter
from dlpim.config import SimConfig
from dlpim.exceptions import ProtocolError, SimulationError
from dlpim.internal_utils import digest
from dlpim.logger import Logger
from dlpim.network import LatencyTally, Network, Packet, RequestKind, \
    flits_for
from dlpim.protocol import SubState, SubscriptionProtocol
from dlpim.stats import LatencyBreakdown, ProtocolCounters, ReuseStats, \
    StatsReport, TrafficStats, empty_packet_counts
from dlpim.topology import Topology
from dlpim.trace import Op, TraceRecord, trace_digest
from dlpim.vault import AddressMap, Vault

EpochListener = Callable[['Simulator', int, int], None]

REPORT_FLITS = 2


@dataclass(eq=False)
class Request:
    """A memory request in flight, with its latency ledger."""
    id: int
    core: int
    op: Op
    addr: int
    issue_cycle: int
    measured: bool
    version: int = 0
    tally: LatencyTally = field(default_factory=LatencyTally)
    complete_cycle: Optional[int] = None
    unblock_cycle: Optional[int] = None
    hops: int = 0
    holder: Optional[int] = None
    served_from_slot: bool = False
    value: Optional[int] = None
    retired: bool = False

    @property
    def is_write(self) -> bool:
        return self.op == Op.WRITE

    @property
    def latency(self) -> Optional[int]:
        if self.complete_cycle is None:
            return None
        return self.complete_cycle - self.issue_cycle

    def as_dict(self) -> dict:
        return {
            'id': self.id,
            'core': self.core,
            'op': self.op.value,
            'addr': hex(self.addr),
            'issue_cycle': self.issue_cycle,
            'complete_cycle': self.complete_cycle,
            'latency': self.latency,
            'network_cycles': self.tally.network_cycles,
            'queuing_cycles': self.tally.queuing_cycles,
            'array_cycles': self.tally.array_cycles,
            'hops': self.hops,
            'holder': self.holder,
            'served_from_slot': self.served_from_slot,
        }


@dataclass
class CoreState:
    """A PIM core replaying its share of the trace."""
    vault: int
    records: deque[TraceRecord] = field(default_factory=deque)
    outstanding: int = 0
    ready_at: Optional[int] = None
    issued: int = 0
    l1: Optional[L1Filter] = None

    @property
    def done(self) -> bool:
        return not self.records and self.outstanding == 0


class Simulator:
    """Cycle driven simulation of the vault network. Each cycle runs, in
    order: packet delivery, timers, vault service, subscription buffers,
    core issue, network arbitration and epoch bookkeeping. Cycles where
    nothing can happen are skipped."""

    def __init__(self, config: SimConfig, trace: Iterable[TraceRecord],
                 seed: Optional[int] = None, logger: Logger = None,
                 listeners: Iterable[EpochListener] = ()):
        self.config = config.validate()
        self.seed = config.simulation.seed if seed is None else seed
        self.topology = Topology.from_config(config.topology)
        self.vault_count = self.topology.vault_count
        sub, pol = config.subscription, config.policy

        self.amap = AddressMap(config.memory.block_bytes, self.vault_count,
                               sub.sets)
        self.data_flits = flits_for(config.memory.block_bytes,
                                    config.network.flit_bytes)
        self.t_array = config.memory.t_array
        self.counters = ProtocolCounters()
        self.listeners: list[EpochListener] = list(listeners)

        # Load the trace and fingerprint the run.
        records = list(trace)
        for record in records:
            if record.core >= self.vault_count:
                raise SimulationError(f'Trace uses core {record.core} but '
                                      f'the topology only has '
                                      f'{self.vault_count} vaults')
        self.trace_digest = trace_digest(records)
        self.config_digest = digest(config.as_dict())
        self.run_id = digest([self.config_digest, self.trace_digest,
                              self.seed])

        # Create our logger if needed.
        level = config.simulation.log_level
        if logger is None:
            self.logger = Logger('dlpim', 'engine',
                                 log_dir=config.simulation.log_dir,
                                 uuid=self.run_id, level=level)
        else:
            self.logger = logger.with_uuid(self.run_id)

        # Build the machine.
        self.vaults = [Vault(v, sub.sets, sub.ways, sub.buffer_entries,
                             self.t_array) for v in range(self.vault_count)]
        self.protocol = SubscriptionProtocol(self, self.logger)
        for vault in self.vaults:
            vault.handler = self.protocol.dispatch
        self.network = Network(self.topology, config.network.buffer_entries,
                               config.network.flit_bytes, self.logger)
        self.network.sink = self._on_delivery
        self.network.observer = self._observe

        # Policy engine.
        self.adaptive = AdaptivePolicy(pol, self.topology, self.logger)
        sampling = pol.sampling_enabled and pol.kind.adaptive
        self.leaders = leader_sets(sub.sets, sampling, pol.leader_stride)
        self.central = self.topology.central_vault
        self.local_policies: Optional[list[AdaptivePolicy]] = None
        if pol.kind.adaptive and not pol.global_decision:
            self.local_policies = [
                AdaptivePolicy(pol, self.topology, self.logger)
                for _ in range(self.vault_count)]
        for vault in self.vaults:
            vault.policy_on = self.adaptive.policy_on

        # Cores.
        self.cores = [CoreState(v) for v in range(self.vault_count)]
        for record in records:
            self.cores[record.core].records.append(record)
        if config.simulation.l1_filter:
            for core in self.cores:
                core.l1 = L1Filter(line_bytes=config.memory.block_bytes)
        for core in self.cores:
            if core.records:
                core.ready_at = core.records[0].delta
        self.request_total = len(records)

        # Event and request state.
        self.cycle = 0
        self._timers: list[tuple[int, int, Callable, tuple]] = []
        self._seq = 0
        self._issued = 0
        self.l1_filtered = 0
        self._version = 0
        self.inflight = 0
        self.oracle: dict[int, int] = {}
        self.draining = False

        # Epochs.
        self.epoch = 0
        self.epoch_cycles = pol.epoch_cycles
        self.report_lead = self.adaptive.report_lead
        self._boundary = self.epoch_cycles
        self._reported = False
        self._reports: dict[int, tuple[PolicyReport, int]] = {}
        self.policy_timeline: list[dict] = []

        self._reset_stats()
        self.measuring = False
        self.warmup_cycle = 0
        self.last_done = 0

    # Hooks used by the protocol.

    def leader_of(self, set_index: int) -> LeaderClass:
        return self.leaders[set_index]

    def send(self, packet: Packet, cycle: int, delay: int = 0):
        """Injects a packet now or once a data access finishes."""
        if delay > 0:
            self._at(cycle + delay, self.network.send, packet, cycle + delay)
        else:
            self.network.send(packet, cycle)

    def serve_access(self, vault: Vault, packet: Packet, cycle: int,
                     slot: Optional[int]):
        """Performs a memory access at the vault holding the block."""
        req: Request = packet.request
        addr = packet.addr
        req.tally.array_cycles += self.t_array
        if slot is not None:
            req.served_from_slot = True
        req.holder = vault.id
        if self.measuring and req.measured:
            self.vault_accesses[vault.id] += 1

        done = cycle + self.t_array
        if packet.kind == RequestKind.MEM_READ:
            value = vault.local_read(addr, slot)
            self._check_read(vault, addr, value)
            req.value = value
            if packet.requester == vault.id:
                self._at(done, self._complete, req, done)
                return

            self.send(Packet(vault.id, packet.requester, addr,
                             RequestKind.MEM_READ_REPLY,
                             flits=self.data_flits, payload=value,
                             request=req), cycle, delay=self.t_array)
            return

        vault.local_write(addr, req.version, slot)
        self.oracle[addr] = req.version
        self._at(done, self._complete, req, done)
        if not packet.acked:
            self.acknowledge_write(vault, req, cycle, delay=self.t_array)

    def acknowledge_write(self, vault: Vault, request: Request, cycle: int,
                          delay: int = 0):
        """Lets the writing core move on."""
        if request.core == vault.id:
            self._at(cycle + delay, self._unblock, request, cycle + delay)
            return

        self.send(Packet(vault.id, request.core, request.addr,
                         RequestKind.MEM_WRITE_ACK, request=request),
                  cycle, delay=delay)

    def record_hop_feedback(self, requester_id: int, holder_id: int,
                            addr: int, actual_hops: int,
                            estimated_hops: int):
        leader = self.leader_of(self.amap.set_index(addr))
        self.adaptive.record_hop_feedback(
            self.vaults[requester_id].registers,
            self.vaults[holder_id].registers,
            actual_hops, estimated_hops, leader)

    def record_reuse(self, local: int, remote: int):
        if self.measuring:
            self.reuse.record(local, remote)

    def add_listener(self, listener: EpochListener):
        """Registers a callback run at every epoch boundary, after the
        registers were cleared."""
        self.listeners.append(listener)

    # Main loop.

    def run(self) -> StatsReport:
        """Runs the whole trace and drains the system."""
        self.logger.info('run_start', f'Simulating {self.request_total} '
                         f'records on {self.topology!r} with the '
                         f'{self.adaptive.kind.value} policy',
                         {'seed': self.seed, 'trace': self.trace_digest})

        cycle = 0
        while True:
            self.cycle = cycle
            self.network.deliver(cycle)
            self._run_timers(cycle)
            for vault in self.vaults:
                if vault.queue.queue:
                    vault.serve_one(cycle)
            again = self.protocol.process_buffers(cycle)
            self._issue(cycle)
            self.network.step(cycle)
            self._epoch_tick(cycle)

            if not self.draining and self._cores_done():
                self._start_drain(cycle)
            if self.draining and self._quiescent():
                break

            nxt = self._next_cycle(cycle, again)
            if nxt is None:
                raise SimulationError(
                    f'Simulation stalled at cycle {cycle} with '
                    f'{self.inflight} requests and '
                    f'{self.network.in_flight()} packets in flight',
                    logger=self.logger)
            cycle = nxt

        self._final_audit()
        report = self._build_report()
        self.logger.info('run_finish', f'Finished after {cycle} cycles, '
                         f'{report.requests} measured requests',
                         {'avg_latency': report.avg_latency,
                          'total_cycles': report.total_cycles})

        return report

    def _next_cycle(self, cycle: int, again: bool) -> Optional[int]:
        if (again or self.network.has_ready_work() or
                any(v.queue.queue for v in self.vaults)):
            return cycle + 1

        candidates = [self.network.next_arrival()]
        if self._timers:
            candidates.append(self._timers[0][0])
        candidates.extend(c.ready_at for c in self.cores)
        candidates = [c for c in candidates if c is not None]

        # Epoch events alone never unblock anything.
        if not candidates:
            return None
        if not self.draining:
            if self._reporting() and not self._reported:
                candidates.append(self._boundary - self.report_lead)
            candidates.append(self._boundary)

        return max(min(candidates), cycle + 1)

    def _at(self, time: int, fn: Callable, *args: Any):
        """Runs a callback at a later cycle, or right away if it is due."""
        if time <= self.cycle:
            fn(*args)
            return

        self._seq += 1
        heapq.heappush(self._timers, (time, self._seq, fn, args))

    def _run_timers(self, cycle: int):
        while self._timers and self._timers[0][0] <= cycle:
            _, _, fn, args = heapq.heappop(self._timers)
            fn(*args)

    # Deliveries.

    def _on_delivery(self, packet: Packet, cycle: int):
        match packet.kind:
            case RequestKind.MEM_READ_REPLY:
                req = packet.request
                req.tally.add(packet.latency_tally)
                req.hops += packet.hops
                self._complete(req, cycle)
            case RequestKind.MEM_WRITE_ACK:
                self._unblock(packet.request, cycle)
            case RequestKind.TURN_ON_SUBSCRIPTION:
                self.vaults[packet.to_vault].policy_on = True
            case RequestKind.TURN_OFF_SUBSCRIPTION:
                self.vaults[packet.to_vault].policy_on = False
            case RequestKind.POLICY_STATS_REPORT:
                self._receive_report(packet, cycle)
            case _:
                if packet.request is not None:
                    packet.request.tally.add(packet.latency_tally)
                    packet.request.hops += packet.hops
                self.vaults[packet.to_vault].enqueue(packet, cycle)

    def _observe(self, packet: Packet, cycle: int):
        tally = packet.latency_tally
        if cycle - packet.issue_cycle != tally.network_cycles + \
                tally.queuing_cycles:
            raise ProtocolError('Packet latency ledger does not add up',
                                {'packet': repr(packet), 'cycle': cycle,
                                 'issued': packet.issue_cycle},
                                logger=self.logger)
        if not self.measuring:
            return

        self.packets[packet.kind.value] += 1
        self.traffic.record(packet.flits, packet.hops,
                            self.config.network.flit_bytes)

    # Requests.

    def _issue(self, cycle: int):
        limit = self.config.simulation.max_outstanding
        for core in self.cores:
            while (core.ready_at is not None and core.ready_at <= cycle and
                   core.outstanding < limit and core.records):
                record = core.records.popleft()
                if self._filtered(core, record):
                    core.ready_at = cycle + 1
                else:
                    self.issue_request(core, record, cycle)
                    core.ready_at = cycle

                if not core.records or core.outstanding >= limit:
                    core.ready_at = None
                else:
                    core.ready_at += core.records[0].delta

    def _filtered(self, core: CoreState, record: TraceRecord) -> bool:
        """Whether the core's L1 absorbs the access."""
        if core.l1 is None:
            return False
        hit = core.l1.access(record.addr, write=record.is_write)
        if hit and not record.is_write:
            self.l1_filtered += 1
            if self.measuring:
                self.l1_hits += 1
            return True

        return False

    def issue_request(self, core: CoreState, record: TraceRecord,
                      cycle: int) -> Request:
        """Starts a memory request of a core."""
        if self._issued == self.config.simulation.warmup_requests:
            self._start_measuring(cycle)

        addr = self.amap.align(record.addr)
        req = Request(self._issued, core.vault, record.op, addr, cycle,
                      measured=self.measuring)
        self._issued += 1
        core.issued += 1
        core.outstanding += 1
        self.inflight += 1
        if req.is_write:
            self._version += 1
            req.version = self._version

        kind = RequestKind.MEM_WRITE if req.is_write else RequestKind.MEM_READ
        flits = self.data_flits if req.is_write else 1
        vault = self.vaults[core.vault]
        home = self.amap.home(addr)
        entry = vault.table.lookup(addr)
        holds = (entry is not None and not entry.home and
                 entry.state == SubState.SUBSCRIBED)
        packet = Packet(core.vault, home, addr, kind, flits=flits,
                        meta=core.vault, payload=req.version, request=req)

        if holds or home == core.vault:
            packet.to_vault = core.vault
            vault.submit_local(packet, cycle)
        else:
            self.send(packet, cycle)

        # A remote access, or the home core finding its block away.
        wants = not req.is_write or self.config.subscription.subscribe_on_write
        if wants and not holds and (home != core.vault or entry is not None):
            self.protocol.on_first_remote_access(vault, addr, cycle)

        return req

    def _check_read(self, vault: Vault, addr: int, value: int):
        expected = self.oracle.get(addr, 0)
        self.oracle_checks += 1
        if value != expected:
            raise ProtocolError(f'Stale read of {addr:#x} at vault '
                                f'{vault.id}', {'read': value,
                                                'expected': expected},
                                logger=self.logger)

    def _complete(self, req: Request, cycle: int):
        """Finishes a request once its data was read or committed."""
        req.complete_cycle = cycle
        if req.latency != req.tally.total:
            raise ProtocolError('Request latency ledger does not add up',
                                req.as_dict(), logger=self.logger)

        set_index = self.amap.set_index(req.addr)
        leader = self.leader_of(set_index)
        AdaptivePolicy.record_latency(self.vaults[req.core].registers,
                                      req.latency, leader)
        if req.served_from_slot:
            home = self.amap.home(req.addr)
            actual = req.hops
            if req.is_write and req.holder != req.core:
                actual += self.topology.manhattan(req.holder, req.core)
            self.record_hop_feedback(
                req.core, req.holder, req.addr, actual_hops=actual,
                estimated_hops=2 * self.topology.manhattan(req.core, home))

        if req.measured:
            self.breakdown.add(req.tally)
            if req.is_write:
                self.writes += 1
            else:
                self.reads += 1
            if self.requests_log is not None:
                self.requests_log.append(req.as_dict())

        self.last_done = max(self.last_done, cycle)
        if req.is_write:
            self._retire(req)
        else:
            self._unblock(req, cycle)

    def _unblock(self, req: Request, cycle: int):
        """Lets the core issue again."""
        req.unblock_cycle = cycle
        self.last_done = max(self.last_done, cycle)
        core = self.cores[req.core]
        core.outstanding -= 1
        if core.records and core.ready_at is None:
            core.ready_at = cycle + core.records[0].delta
        self._retire(req)

    def _retire(self, req: Request):
        """Drops a request once it is both complete and unblocked."""
        if req.retired or req.complete_cycle is None or \
                req.unblock_cycle is None:
            return
        req.retired = True
        self.inflight -= 1

    # Warmup and statistics.

    def _reset_stats(self):
        self.breakdown = LatencyBreakdown()
        self.vault_accesses = [0] * self.vault_count
        self.traffic = TrafficStats()
        self.packets = empty_packet_counts()
        self.reuse = ReuseStats()
        self.reads = 0
        self.writes = 0
        self.l1_hits = 0
        self.oracle_checks = 0
        self.requests_log: Optional[list[dict]] = \
            [] if self.config.simulation.record_requests else None
        for name in vars(self.counters):
            setattr(self.counters, name, 0)
        for vault in self.vaults:
            vault.queue.max_occupancy = len(vault.queue)
        for buf in self.network.buffers.values():
            buf.max_occupancy = len(buf)

    def _start_measuring(self, cycle: int):
        self._reset_stats()
        self.measuring = True
        self.warmup_cycle = cycle
        self.logger.info('warmup_done', f'Warmup finished at cycle {cycle} '
                         f'after {self._issued} requests')

    # Epochs.

    def _reporting(self) -> bool:
        return (self.adaptive.kind.adaptive and
                self.local_policies is None)

    def _epoch_tick(self, cycle: int):
        if self.draining:
            return

        if (self._reporting() and not self._reported and
                cycle >= self._boundary - self.report_lead):
            self._send_reports(cycle)
        if cycle >= self._boundary:
            self._end_epoch(cycle)

    def _send_reports(self, cycle: int):
        self._reported = True
        for vault in self.vaults:
            self.send(Packet(vault.id, self.central, 0,
                             RequestKind.POLICY_STATS_REPORT,
                             flits=REPORT_FLITS, payload=self.epoch,
                             report=vault.registers.snapshot()), cycle)

    def _receive_report(self, packet: Packet, cycle: int):
        epoch = packet.payload
        merged, count = self._reports.get(epoch, (PolicyReport.empty(), 0))
        merged.merge(packet.report)
        count += 1
        self._reports[epoch] = (merged, count)
        if count == self.vault_count:
            del self._reports[epoch]
            at = cycle + self.config.policy.central_decision_latency
            self._at(at, self._decide, epoch, merged, at)

    def _decide(self, epoch: int, report: PolicyReport, cycle: int):
        """Central vault decision, broadcast to every vault."""
        decision = self.adaptive.epoch_decide(epoch, report)
        entry = decision.as_dict()
        entry['decided_at'] = cycle
        self.policy_timeline.append(entry)

        kind = (RequestKind.TURN_ON_SUBSCRIPTION if decision.policy_on
                else RequestKind.TURN_OFF_SUBSCRIPTION)
        for vault in self.vaults:
            self.send(Packet(self.central, vault.id, 0, kind,
                             payload=epoch), cycle)

    def _decide_locally(self, cycle: int):
        on = 0
        for vault, policy in zip(self.vaults, self.local_policies):
            decision = policy.epoch_decide(self.epoch,
                                           vault.registers.snapshot())
            vault.policy_on = decision.policy_on
            on += decision.policy_on

        policy = 'on' if on == self.vault_count else \
            'off' if on == 0 else 'mixed'
        self.policy_timeline.append({'epoch': self.epoch, 'policy': policy,
                                     'rule': 'local', 'vaults_on': on,
                                     'decided_at': cycle})

    def _end_epoch(self, cycle: int):
        if self.local_policies is not None:
            self._decide_locally(cycle)

        for vault in self.vaults:
            vault.registers.clear()
            vault.table.age()
        if self.config.simulation.audit:
            self.protocol.audit(strict=False)
            self.network.check_conservation()
        for listener in self.listeners:
            listener(self, self.epoch, cycle)

        self.logger.debug('epoch_end', f'Epoch {self.epoch} ended at cycle '
                          f'{cycle}')
        self.epoch += 1
        self._boundary += self.epoch_cycles
        self._reported = False

    # Drain.

    def _cores_done(self) -> bool:
        return self.inflight == 0 and all(c.done for c in self.cores)

    def _start_drain(self, cycle: int):
        self.draining = True
        self.protocol.abandon_requests()
        self.logger.debug('drain', f'Cores finished at cycle {cycle}, '
                          'draining the network')

    def _quiescent(self) -> bool:
        return (self.network.is_idle() and not self._timers and
                not any(v.queue.queue or v.conflicts or v.buffer.entries
                        for v in self.vaults))

    def _final_audit(self):
        """Checks the drained machine against the memory oracle."""
        self.protocol.audit(strict=True)
        self.network.check_conservation()
        if self.network.in_flight() != 0:
            raise ProtocolError('Packets left in flight after drain',
                                logger=self.logger)
        if self._issued + self.l1_filtered != self.request_total:
            raise ProtocolError('Not every trace record was issued',
                                {'issued': self._issued,
                                 'records': self.request_total},
                                logger=self.logger)

        # Exactly one copy of every block, holding the last committed data.
        copies: dict[int, int] = {}
        for vault in self.vaults:
            for slot in vault.memory.slots:
                if slot.valid:
                    if slot.orig_addr in copies:
                        raise ProtocolError('Block subscribed twice',
                                            {'addr': slot.orig_addr},
                                            logger=self.logger)
                    copies[slot.orig_addr] = vault.id

        for addr, version in self.oracle.items():
            value = self.authoritative_value(addr)
            if value != version:
                raise ProtocolError(f'Block {addr:#x} lost a write',
                                    {'value': value, 'expected': version},
                                    logger=self.logger)

    def authoritative_value(self, addr: int) -> int:
        """Data of a block wherever it currently lives."""
        home = self.vaults[self.amap.home(addr)]
        entry = home.table.lookup(addr)
        if entry is None:
            return home.memory.read_home(addr)

        holder = self.vaults[entry.current_vault]
        held = holder.table.lookup(addr)
        return holder.memory.read_slot(held.slot, addr)[0]

    def _build_report(self) -> StatsReport:
        if self.measuring:
            for vault in self.vaults:
                for entry in vault.table:
                    if not entry.home and entry.state == SubState.SUBSCRIBED:
                        self.reuse.record(entry.local_hits,
                                          entry.remote_hits)
            total = self.last_done - self.warmup_cycle
        else:
            total = 0

        if not self.breakdown.is_consistent():
            raise ProtocolError('Latency breakdown does not add up',
                                self.breakdown.as_dict(), logger=self.logger)

        return StatsReport(
            run_id=self.run_id,
            trace_digest=self.trace_digest,
            config_digest=self.config_digest,
            seed=self.seed,
            policy=self.adaptive.kind.value,
            topology=f'{self.topology.grid_rows}x{self.topology.grid_cols}'
                     f'/{self.vault_count}',
            total_cycles=total,
            warmup_cycles=self.warmup_cycle if self.measuring else 0,
            reads=self.reads,
            writes=self.writes,
            breakdown=self.breakdown,
            vault_accesses=list(self.vault_accesses),
            traffic=self.traffic,
            packets=dict(self.packets),
            subscriptions=self.counters,
            reuse=self.reuse,
            max_queue_occupancy=[v.queue.max_occupancy for v in self.vaults],
            max_link_occupancy=self.network.max_buffer_occupancy(),
            policy_timeline=list(self.policy_timeline),
            l1_hits=self.l1_hits,
            oracle_checks=self.oracle_checks,
            requests_log=self.requests_log)


def run(config: SimConfig, trace: Iterable[TraceRecord],
        seed: Optional[int] = None, logger: Logger = None,
        listeners: Iterable[EpochListener] = ()) -> StatsReport:
    """Simulates a trace and returns its statistics."""
    return Simulator(config, trace, seed, logger, listeners).run()


def generate_trace(spec: str, vault_count: int, block_bytes: int,
                   seed: int = 0) -> list[TraceRecord]:
    """Records of a synthetic workload given as `name:key=val,...`."""
    from dlpim import generators
    return generators.from_spec(spec, vault_count, block_bytes, seed) \
        .records()
