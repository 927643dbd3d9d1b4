#!/usr/bin/env python3

from __future__ import annotations

import csv
import dataclasses
import io
import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional, TextIO

import numpy as np

from dlpim.exceptions import SimulationError
from dlpim.network import LatencyTally, RequestKind

SCHEMA_VERSION = 1
FORMATS = ('json', 'csv')


def cov(counts: Iterable[int]) -> float:
    """Coefficient of variation (population standard deviation over mean) of
    the per vault request counts. An idle system is perfectly balanced."""
    arr = np.asarray(list(counts), dtype=np.float64)
    if arr.size == 0:
        return 0.0

    mean = arr.mean()
    if mean == 0:
        return 0.0
    return float(arr.std(ddof=0) / mean)


def _avg(total: int, count: int) -> float:
    return round(total / count, 4) if count else 0.0


@dataclass
class LatencyBreakdown:
    """Latency of the measured requests split in its three components."""
    requests: int = 0
    network_cycles: int = 0
    queuing_cycles: int = 0
    array_cycles: int = 0
    total_cycles: int = 0

    def add(self, tally: LatencyTally):
        self.requests += 1
        self.network_cycles += tally.network_cycles
        self.queuing_cycles += tally.queuing_cycles
        self.array_cycles += tally.array_cycles
        self.total_cycles += tally.total

    @property
    def avg_latency(self) -> float:
        return _avg(self.total_cycles, self.requests)

    def is_consistent(self) -> bool:
        """The three components add up to the total, exactly."""
        return (self.network_cycles + self.queuing_cycles +
                self.array_cycles == self.total_cycles)

    def as_dict(self) -> dict:
        return {
            'requests': self.requests,
            'network_cycles': self.network_cycles,
            'queuing_cycles': self.queuing_cycles,
            'array_cycles': self.array_cycles,
            'total_cycles': self.total_cycles,
            'avg_network': _avg(self.network_cycles, self.requests),
            'avg_queuing': _avg(self.queuing_cycles, self.requests),
            'avg_array': _avg(self.array_cycles, self.requests),
            'avg_latency': self.avg_latency,
        }

    @staticmethod
    def from_dict(data: dict) -> LatencyBreakdown:
        return LatencyBreakdown(data['requests'], data['network_cycles'],
                                data['queuing_cycles'], data['array_cycles'],
                                data['total_cycles'])


def reuse_bucket(accesses: int) -> str:
    """Power of two histogram bucket label."""
    if accesses < 2:
        return str(accesses)
    low = 1 << (accesses.bit_length() - 1)
    return f'{low}-{2 * low - 1}'


@dataclass
class ReuseStats:
    """Accesses a block received while it was subscribed, per subscription."""
    subscriptions: int = 0
    local_accesses: int = 0
    remote_accesses: int = 0
    histogram: dict[str, int] = field(default_factory=dict)

    def record(self, local: int, remote: int):
        self.subscriptions += 1
        self.local_accesses += local
        self.remote_accesses += remote
        bucket = reuse_bucket(local + remote)
        self.histogram[bucket] = self.histogram.get(bucket, 0) + 1

    @property
    def avg_local(self) -> float:
        return _avg(self.local_accesses, self.subscriptions)

    @property
    def avg_remote(self) -> float:
        return _avg(self.remote_accesses, self.subscriptions)

    def as_dict(self) -> dict:
        order = sorted(self.histogram, key=lambda b: int(b.split('-')[0]))
        return {
            'subscriptions': self.subscriptions,
            'local_accesses': self.local_accesses,
            'remote_accesses': self.remote_accesses,
            'avg_local': self.avg_local,
            'avg_remote': self.avg_remote,
            'histogram': {b: self.histogram[b] for b in order},
        }

    @staticmethod
    def from_dict(data: dict) -> ReuseStats:
        return ReuseStats(data['subscriptions'], data['local_accesses'],
                          data['remote_accesses'], dict(data['histogram']))


@dataclass
class ProtocolCounters:
    """Subscription protocol event counters."""
    attempted: int = 0
    completed: int = 0
    nacked: int = 0
    resubscriptions: int = 0
    unsubscriptions: int = 0
    writebacks: int = 0
    clean_releases: int = 0
    buffered: int = 0
    buffer_overflows: int = 0
    conversions: int = 0
    abandoned: int = 0

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class TrafficStats:
    """Network load. Hop weighted bytes count every link a flit crosses,
    injected bytes count every packet once."""
    hop_bytes: int = 0
    injected_bytes: int = 0
    packets: int = 0

    def record(self, flits: int, hops: int, flit_bytes: int):
        if hops == 0:
            return
        self.packets += 1
        self.hop_bytes += flits * flit_bytes * hops
        self.injected_bytes += flits * flit_bytes

    def as_dict(self, cycles: int) -> dict:
        return {
            'packets': self.packets,
            'hop_bytes': self.hop_bytes,
            'injected_bytes': self.injected_bytes,
            'bytes_per_cycle': _avg(self.hop_bytes, cycles),
            'injected_bytes_per_cycle': _avg(self.injected_bytes, cycles),
        }


@dataclass
class StatsReport:
    """Everything measured in a single simulation run."""
    run_id: str
    trace_digest: str
    config_digest: str
    seed: int
    policy: str
    topology: str
    total_cycles: int = 0
    warmup_cycles: int = 0
    reads: int = 0
    writes: int = 0
    breakdown: LatencyBreakdown = field(default_factory=LatencyBreakdown)
    vault_accesses: list[int] = field(default_factory=list)
    traffic: TrafficStats = field(default_factory=TrafficStats)
    packets: dict[str, int] = field(default_factory=dict)
    subscriptions: ProtocolCounters = field(default_factory=ProtocolCounters)
    reuse: ReuseStats = field(default_factory=ReuseStats)
    max_queue_occupancy: list[int] = field(default_factory=list)
    max_link_occupancy: int = 0
    policy_timeline: list[dict] = field(default_factory=list)
    l1_hits: int = 0
    oracle_checks: int = 0
    requests_log: Optional[list[dict]] = None

    @property
    def requests(self) -> int:
        return self.breakdown.requests

    @property
    def avg_latency(self) -> float:
        return self.breakdown.avg_latency

    @property
    def cov(self) -> float:
        return cov(self.vault_accesses)

    @property
    def bytes_per_cycle(self) -> float:
        return _avg(self.traffic.hop_bytes, self.total_cycles)

    def as_dict(self) -> dict:
        """Nested document with a stable field order."""
        data = {
            'schema_version': SCHEMA_VERSION,
            'run_id': self.run_id,
            'trace_digest': self.trace_digest,
            'config_digest': self.config_digest,
            'seed': self.seed,
            'policy': self.policy,
            'topology': self.topology,
            'total_cycles': self.total_cycles,
            'warmup_cycles': self.warmup_cycles,
            'requests': self.requests,
            'reads': self.reads,
            'writes': self.writes,
            'latency': self.breakdown.as_dict(),
            'vault_accesses': list(self.vault_accesses),
            'cov': round(self.cov, 6),
            'traffic': self.traffic.as_dict(self.total_cycles),
            'packets': dict(self.packets),
            'subscriptions': self.subscriptions.as_dict(),
            'reuse': self.reuse.as_dict(),
            'max_queue_occupancy': list(self.max_queue_occupancy),
            'max_link_occupancy': self.max_link_occupancy,
            'policy_timeline': list(self.policy_timeline),
            'l1_hits': self.l1_hits,
            'oracle_checks': self.oracle_checks,
        }
        if self.requests_log is not None:
            data['requests_log'] = self.requests_log

        return data

    @staticmethod
    def from_dict(data: dict) -> StatsReport:
        """Rebuilds a report from its JSON document."""
        if data.get('schema_version') != SCHEMA_VERSION:
            raise SimulationError(f'Unsupported report schema version '
                                  f'{data.get("schema_version")!r}')

        try:
            traffic = data['traffic']
            return StatsReport(
                run_id=data['run_id'],
                trace_digest=data['trace_digest'],
                config_digest=data['config_digest'],
                seed=data['seed'],
                policy=data['policy'],
                topology=data['topology'],
                total_cycles=data['total_cycles'],
                warmup_cycles=data['warmup_cycles'],
                reads=data['reads'],
                writes=data['writes'],
                breakdown=LatencyBreakdown.from_dict(data['latency']),
                vault_accesses=list(data['vault_accesses']),
                traffic=TrafficStats(traffic['hop_bytes'],
                                     traffic['injected_bytes'],
                                     traffic['packets']),
                packets=dict(data['packets']),
                subscriptions=ProtocolCounters(**data['subscriptions']),
                reuse=ReuseStats.from_dict(data['reuse']),
                max_queue_occupancy=list(data['max_queue_occupancy']),
                max_link_occupancy=data['max_link_occupancy'],
                policy_timeline=list(data['policy_timeline']),
                l1_hits=data['l1_hits'],
                oracle_checks=data['oracle_checks'],
                requests_log=data.get('requests_log'))
        except (KeyError, TypeError) as e:
            raise SimulationError(f'Malformed report document: {e}')

    def csv_rows(self) -> list[tuple[str, Any]]:
        """One metric per row, nested names joined with dots."""
        rows = []
        data = self.as_dict()
        data.pop('requests_log', None)
        _flatten('', data, rows)
        return rows


def _flatten(prefix: str, value: Any, rows: list[tuple[str, Any]]):
    if isinstance(value, dict):
        for key, item in value.items():
            _flatten(f'{prefix}.{key}' if prefix else str(key), item, rows)
    elif isinstance(value, list):
        for i, item in enumerate(value):
            _flatten(f'{prefix}.{i}', item, rows)
    else:
        rows.append((prefix, value))


def empty_packet_counts() -> dict[str, int]:
    return {kind.value: 0 for kind in RequestKind}


def speedup(baseline: StatsReport, candidate: StatsReport) -> float:
    """Execution cycles of the baseline divided by the candidate's."""
    if candidate.total_cycles == 0:
        raise SimulationError('Cannot compute a speedup against a run with '
                              'zero execution cycles')
    return baseline.total_cycles / candidate.total_cycles


def latency_improvement(baseline: StatsReport,
                        candidate: StatsReport) -> float:
    """Average memory latency reduction in percent."""
    if baseline.avg_latency == 0:
        return 0.0
    return ((baseline.avg_latency - candidate.avg_latency) /
            baseline.avg_latency * 100)


def compare(baseline: StatsReport, candidate: StatsReport) -> dict:
    """Speedup and deltas between two runs of the same trace."""
    if baseline.trace_digest != candidate.trace_digest:
        raise SimulationError('Reports were produced from different traces '
                              f'({baseline.trace_digest} and '
                              f'{candidate.trace_digest})')

    return {
        'baseline': baseline.policy,
        'candidate': candidate.policy,
        'trace_digest': baseline.trace_digest,
        'speedup': round(speedup(baseline, candidate), 6),
        'latency_improvement_pct': round(
            latency_improvement(baseline, candidate), 4),
        'avg_latency_delta': round(candidate.avg_latency -
                                   baseline.avg_latency, 4),
        'cov_delta': round(candidate.cov - baseline.cov, 6),
        'traffic_delta': round(candidate.bytes_per_cycle -
                               baseline.bytes_per_cycle, 4),
        'hop_bytes_delta': (candidate.traffic.hop_bytes -
                            baseline.traffic.hop_bytes),
    }


def emit(report: StatsReport, fmt: str = 'json',
         out: Optional[TextIO] = None) -> str:
    """Serializes a report as JSON or CSV. Writes to the stream if one is
    given and returns the text either way."""
    match fmt:
        case 'json':
            text = json.dumps(report.as_dict(), indent=2) + '\n'
        case 'csv':
            text = rows_to_csv([('name', 'value')] + report.csv_rows())
        case _:
            raise SimulationError(f'Unknown report format {fmt!r}, expected '
                                  f'one of {FORMATS}')

    if out is not None:
        out.write(text)
    return text


def rows_to_csv(rows: Iterable[Iterable[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator='\n')
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def load_report(path: str) -> StatsReport:
    """Reads a JSON report written by a previous run."""
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return StatsReport.from_dict(json.load(f))
    except FileNotFoundError:
        raise SimulationError(f'Report file {path} does not exist')
    except json.JSONDecodeError as e:
        raise SimulationError(f'Report file {path} is not valid JSON: {e}')
