#!/usr/bin/env python3

import numpy as np
import pytest

from dlpim.engine import generate_trace
from dlpim.stats import speedup

pytestmark = pytest.mark.slow

# A short array access keeps network effects visible in small runs. Local
# accesses still pay it in full.
FAST_ARRAY = {'memory.t_array': 5}
BASE = {**FAST_ARRAY, 'policy.policy_kind': 'always_off'}
ON = {**FAST_ARRAY, 'policy.policy_kind': 'always_on'}
EPOCHS = {'policy.epoch_cycles': 10_000}
ADAPTIVE = ['hops_adaptive', 'latency_adaptive']


def pair(simulate, trace, overrides=None):
    overrides = overrides or {}
    return (simulate(trace, {**BASE, **overrides}),
            simulate(trace, {**ON, **overrides}))


def decided_by(timeline: list[dict], epoch: int) -> set[str]:
    return {entry['policy'] for entry in timeline if entry['epoch'] <= epoch}


def test_hotspot_load_spreads_out(simulate):
    # Room at the hot vault for every core's 64 hot blocks.
    cov_drops, latency_gains = [], []
    for seed in range(5):
        trace = generate_trace('hotspot:n=100000,p=0.8,hot_blocks=64', 32,
                               64, seed)
        base, on = pair(simulate, trace, {'subscription.sets': 1024})
        assert base.cov > 2
        cov_drops.append(1 - on.cov / base.cov)
        latency_gains.append(base.avg_latency - on.avg_latency)

    assert np.mean(cov_drops) >= 0.5
    assert np.mean(latency_gains) > 0


def test_reuse_pays_off(simulate):
    trace = generate_trace('single_consumer:blocks=16,reuse=64', 32, 64, 0)
    base, on = pair(simulate, trace)

    assert on.avg_latency <= 0.3 * base.avg_latency
    assert on.reuse.local_accesses > 15 * 60


def test_streams_gain_nothing(simulate):
    trace = generate_trace('stream:n=6400,delta=50', 32, 64, 0)
    base, on = pair(simulate, trace)

    assert speedup(base, on) == pytest.approx(1.0, abs=0.05)
    assert on.traffic.hop_bytes > base.traffic.hop_bytes
    assert on.reuse.avg_local == 0


@pytest.mark.parametrize('kind', ADAPTIVE)
def test_adaptive_policies_drop_useless_subscriptions(simulate, kind):
    trace = generate_trace('stream:n=32000,delta=50', 32, 64, 0)
    never = simulate(trace, {**BASE, **EPOCHS})
    adaptive = simulate(trace, {**FAST_ARRAY, **EPOCHS,
                                'policy.policy_kind': kind})

    timeline = adaptive.policy_timeline
    assert len(timeline) >= 3
    assert 'off' in decided_by(timeline, 2)
    assert timeline[0]['feedback'] < 0
    assert adaptive.avg_latency <= 1.05 * never.avg_latency
    if kind == 'hops_adaptive':
        assert all(entry['policy'] == 'off' for entry in timeline)


@pytest.mark.parametrize('kind', ADAPTIVE)
def test_adaptive_policies_keep_useful_subscriptions(simulate, kind):
    trace = generate_trace('single_consumer:blocks=16,reuse=640', 32, 64, 0)
    always = simulate(trace, {**ON, **EPOCHS})
    adaptive = simulate(trace, {**FAST_ARRAY, **EPOCHS,
                                'policy.policy_kind': kind})

    timeline = adaptive.policy_timeline
    assert len(timeline) >= 3
    assert decided_by(timeline, 2) == {'on'}
    assert timeline[-1]['policy'] == 'on'
    assert adaptive.avg_latency <= 1.10 * always.avg_latency


def test_sampling_follows_a_phase_change(simulate):
    stream_rows = 6400
    epoch = 10_000
    trace = generate_trace(f'phase_change:n={stream_rows},blocks=16,'
                           'reuse=640', 32, 64, 0)
    report = simulate(trace, {**FAST_ARRAY, 'policy.epoch_cycles': epoch,
                              'policy.policy_kind': 'latency_adaptive',
                              'policy.sampling_enabled': True})

    streamed = {r.addr for r in trace[:stream_rows]}
    boundary = max(r['complete_cycle'] for r in report.requests_log
                   if int(r['addr'], 16) in streamed)
    phase_epoch = boundary // epoch

    after = [entry for entry in report.policy_timeline
             if entry['epoch'] in (phase_epoch, phase_epoch + 1)]
    assert any(entry['policy'] == 'on' for entry in after)
    assert report.policy_timeline[-1]['policy'] == 'on'
    assert report.policy_timeline[-1]['rule'] == 'sampled_latency'


def test_larger_tables_help_until_the_working_set_fits(simulate):
    # Every vault needs room for its core's 24 blocks plus about as many
    # home entries of blocks other cores took away.
    trace = generate_trace('working_set:n=10240,blocks=24', 32, 64, 0)
    base = simulate(trace, BASE)

    gains = []
    for entries in (32, 64, 128, 256):
        report = simulate(trace, {**ON, 'subscription.sets': entries // 4,
                                  'subscription.ways': 4})
        gains.append(speedup(base, report))

    for smaller, larger in zip(gains[:3], gains[1:3]):
        assert larger >= smaller - 0.02
    assert gains[2] > gains[0]
    assert abs(gains[3] - gains[2]) / gains[2] < 0.02
