#!/usr/bin/env python3

import io
import json
import math

import pytest

from dlpim.exceptions import SimulationError
from dlpim.network import LatencyTally
from dlpim.stats import LatencyBreakdown, ReuseStats, StatsReport, \
    TrafficStats, compare, cov, emit, load_report, reuse_bucket, speedup


def make_report(total_cycles=100, digest='abc', **kwargs) -> StatsReport:
    return StatsReport(run_id='r', trace_digest=digest, config_digest='c',
                       seed=0, policy=kwargs.pop('policy', 'always_off'),
                       topology='hmc6x6', total_cycles=total_cycles, **kwargs)


def test_cov():
    assert cov([]) == 0.0
    assert cov([0, 0, 0]) == 0.0
    assert cov([5, 5, 5, 5]) == 0.0
    assert cov([0, 0, 0, 40]) == pytest.approx(math.sqrt(3))


def test_breakdown_adds_up():
    breakdown = LatencyBreakdown()
    breakdown.add(LatencyTally(network_cycles=18, array_cycles=45))
    breakdown.add(LatencyTally(network_cycles=10, queuing_cycles=5,
                               array_cycles=45))
    assert breakdown.requests == 2
    assert breakdown.total_cycles == 123
    assert breakdown.avg_latency == 61.5
    assert breakdown.is_consistent()
    assert breakdown.as_dict()['avg_queuing'] == 2.5


@pytest.mark.parametrize('accesses, bucket', [
    (0, '0'), (1, '1'), (2, '2-3'), (3, '2-3'), (4, '4-7'), (64, '64-127'),
])
def test_reuse_buckets(accesses, bucket):
    assert reuse_bucket(accesses) == bucket


def test_reuse_histogram():
    reuse = ReuseStats()
    reuse.record(10, 1)
    reuse.record(0, 1)
    reuse.record(2, 0)
    assert reuse.subscriptions == 3
    assert reuse.avg_local == 4.0
    assert list(reuse.as_dict()['histogram']) == ['1', '2-3', '8-15']


def test_traffic_ignores_local_packets():
    traffic = TrafficStats()
    traffic.record(5, 0, 16)
    traffic.record(5, 3, 16)
    assert traffic.packets == 1
    assert traffic.hop_bytes == 240
    assert traffic.injected_bytes == 80


def test_speedup_and_comparison():
    base = make_report(205, vault_accesses=[0, 0, 0, 40])
    cand = make_report(100, policy='always_on', vault_accesses=[10] * 4)
    assert speedup(base, cand) == pytest.approx(2.05)

    result = compare(base, cand)
    assert result['speedup'] == 2.05
    assert result['baseline'] == 'always_off'
    assert result['candidate'] == 'always_on'
    assert result['cov_delta'] == pytest.approx(-math.sqrt(3), abs=1e-6)


def test_zero_cycle_speedup():
    with pytest.raises(SimulationError):
        speedup(make_report(10), make_report(0))


def test_compare_needs_the_same_trace():
    with pytest.raises(SimulationError):
        compare(make_report(digest='aaa'), make_report(digest='bbb'))


def test_emit_formats():
    report = make_report(vault_accesses=[1, 2])
    out = io.StringIO()
    text = emit(report, 'json', out)
    assert out.getvalue() == text
    doc = json.loads(text)
    assert doc['schema_version'] == 1
    assert doc['total_cycles'] == 100
    assert 'requests_log' not in doc

    rows = emit(report, 'csv').splitlines()
    assert rows[0] == 'name,value'
    assert 'vault_accesses.1,2' in rows
    assert 'latency.avg_latency,0.0' in rows

    with pytest.raises(SimulationError):
        emit(report, 'xml')


def test_load_report(tmp_path):
    report = make_report(vault_accesses=[3, 4], packets={'read_req': 2})
    report.reuse.record(3, 0)
    path = tmp_path / 'report.json'
    path.write_text(emit(report), encoding='utf-8')
    assert load_report(str(path)).as_dict() == report.as_dict()

    with pytest.raises(SimulationError):
        load_report(str(tmp_path / 'missing.json'))

    path.write_text('{"schema_version": 99}', encoding='utf-8')
    with pytest.raises(SimulationError):
        load_report(str(path))

    path.write_text('{nope', encoding='utf-8')
    with pytest.raises(SimulationError):
        load_report(str(path))
