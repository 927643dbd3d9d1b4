#!/usr/bin/env python3

from fractions import Fraction

import pytest

from dlpim.adaptive import Accumulators, AdaptivePolicy, EpochConfig, \
    LeaderClass, PolicyKind, PolicyRegisters, PolicyReport, leader_sets
from dlpim.topology import Topology


def make_policy(**kwargs) -> AdaptivePolicy:
    return AdaptivePolicy(EpochConfig(**kwargs), Topology.preset('hmc6x6'))


def report_of(feedback=0, events=0, latency=0, count=0) -> PolicyReport:
    report = PolicyReport.empty()
    report.normal = Accumulators(feedback, events, latency, count)
    return report


@pytest.mark.parametrize('name, kind', [
    ('always-on', PolicyKind.ALWAYS_ON),
    ('ON', PolicyKind.ALWAYS_ON),
    ('baseline', PolicyKind.ALWAYS_OFF),
    ('never', PolicyKind.ALWAYS_OFF),
    ('hops', PolicyKind.HOPS_ADAPTIVE),
    ('latency_adaptive', PolicyKind.LATENCY_ADAPTIVE),
])
def test_policy_names(name, kind):
    assert PolicyKind.parse(name) == kind


def test_unknown_policy_name():
    with pytest.raises(ValueError):
        PolicyKind.parse('sometimes')


def test_leader_sets():
    assert set(leader_sets(16, False)) == {LeaderClass.NORMAL}

    small = leader_sets(16, True)
    assert small[0] == LeaderClass.ALWAYS_ON_LEADER
    assert small[1] == LeaderClass.ALWAYS_OFF_LEADER
    assert small[2:] == [LeaderClass.NORMAL] * 14

    large = leader_sets(2048, True)
    assert large.count(LeaderClass.ALWAYS_ON_LEADER) == 32
    assert large.count(LeaderClass.ALWAYS_OFF_LEADER) == 32
    assert large[64] == LeaderClass.ALWAYS_ON_LEADER
    assert large[65] == LeaderClass.ALWAYS_OFF_LEADER

    with pytest.raises(ValueError):
        leader_sets(1, True)


def test_report_lead():
    assert make_policy().report_lead == 1000 + 3 * 8
    assert make_policy(epoch_cycles=20,
                       central_decision_latency=10).report_lead == 19


def test_hop_feedback_rewards_and_penalties():
    policy = make_policy(policy_kind='hops')
    requester, holder = PolicyRegisters(), PolicyRegisters()

    assert policy.record_hop_feedback(requester, holder, 0, 6) == 1
    assert requester.feedback == 1
    assert holder.feedback == 0

    assert policy.record_hop_feedback(requester, holder, 4, 4) == 0
    assert requester.normal.feedback_events == 1

    # Penalties land on the holder as well.
    assert policy.record_hop_feedback(requester, holder, 5, 0) == -1
    assert requester.feedback == 0
    assert holder.feedback == -1
    assert holder.normal.feedback_events == 1

    # A vault holding its own block is only charged once.
    policy.record_hop_feedback(requester, requester, 5, 0)
    assert requester.feedback == -1


def test_feedback_goes_to_the_leader_bucket():
    policy = make_policy(policy_kind='hops', sampling_enabled=True)
    registers = PolicyRegisters()
    policy.record_hop_feedback(registers, None, 0, 2,
                               LeaderClass.ALWAYS_OFF_LEADER)
    assert registers.feedback == 0
    assert registers.leaders[LeaderClass.ALWAYS_OFF_LEADER].feedback == 1


def test_latency_accumulation():
    registers = PolicyRegisters()
    AdaptivePolicy.record_latency(registers, 40)
    AdaptivePolicy.record_latency(registers, 50)
    assert registers.latency_acc == 90
    assert registers.request_count == 2
    assert registers.normal.avg_latency() == Fraction(45)

    registers.prev_avg_latency = Fraction(45)
    registers.clear()
    assert registers.is_clear()
    assert registers.prev_avg_latency == Fraction(45)


@pytest.mark.parametrize('kind, expected', [
    ('always_on', True),
    ('always_off', False),
])
def test_fixed_policies_never_change(kind, expected):
    policy = make_policy(policy_kind=kind)
    assert policy.policy_on == expected
    decision = policy.epoch_decide(0, report_of(-10, 10, 1000, 10))
    assert decision.policy_on == expected
    assert decision.rule == 'fixed'


def test_hops_decisions():
    policy = make_policy(policy_kind='hops_adaptive')
    assert policy.epoch_decide(0, report_of()).rule == 'hops_idle'
    assert policy.policy_on

    decision = policy.epoch_decide(1, report_of(-3, 5))
    assert (decision.policy_on, decision.rule) == (False, 'hops')

    # With subscriptions off nothing feeds the register, so it stays off.
    idle = policy.epoch_decide(2, report_of())
    assert (idle.policy_on, idle.rule) == (False, 'hops_idle')

    # A tie between rewards and penalties turns subscriptions on.
    assert policy.epoch_decide(3, report_of(0, 4)).policy_on


def test_latency_decisions():
    policy = make_policy(policy_kind='latency_adaptive', bootstrap_epochs=1)

    # The first epoch bootstraps with the hop rule.
    first = policy.epoch_decide(0, report_of(2, 2, 1000, 10))
    assert (first.policy_on, first.rule) == (True, 'hops')
    assert policy.prev_avg_latency == Fraction(100)

    # Within two percent of the previous epoch: keep.
    keep = policy.epoch_decide(1, report_of(0, 0, 1020, 10))
    assert (keep.policy_on, keep.rule) == (True, 'latency_keep')

    # Worse than the threshold: flip.
    flip = policy.epoch_decide(2, report_of(0, 0, 1100, 10))
    assert (flip.policy_on, flip.rule) == (False, 'latency_flip')

    # An epoch without requests keeps the current decision.
    idle = policy.epoch_decide(3, report_of())
    assert (idle.policy_on, idle.rule) == (False, 'latency_idle')
    assert policy.prev_avg_latency == Fraction(110)

    assert [d.epoch for d in policy.decisions] == [0, 1, 2, 3]


def test_sampled_latency_decision():
    policy = make_policy(policy_kind='latency', sampling_enabled=True)
    report = report_of(0, 0, 500, 10)
    report.on_leader = Accumulators(0, 0, 200, 10)
    report.off_leader = Accumulators(0, 0, 600, 10)
    decision = policy.epoch_decide(0, report)
    assert (decision.policy_on, decision.rule) == (True, 'sampled_latency')

    report.on_leader = Accumulators(0, 0, 900, 10)
    assert not policy.epoch_decide(1, report).policy_on

    # Falls back to the plain latency rule while a leader is idle.
    report.off_leader = Accumulators()
    assert policy.epoch_decide(2, report).rule.startswith('latency')


def test_sampled_hops_decision():
    policy = make_policy(policy_kind='hops', sampling_enabled=True)
    report = report_of()
    report.on_leader = Accumulators(-4, 4, 0, 0)
    report.off_leader = Accumulators(0, 0, 0, 0)
    assert policy.epoch_decide(0, report).rule == 'sampled_hops'
    assert not policy.policy_on

    report.on_leader = Accumulators(0, 0, 0, 0)
    assert policy.epoch_decide(1, report).rule == 'sampled_idle'
    assert not policy.policy_on


def test_decision_document():
    policy = make_policy(policy_kind='latency')
    decision = policy.epoch_decide(0, report_of(1, 1, 10, 3))
    assert decision.as_dict() == {
        'epoch': 0,
        'policy': 'on',
        'rule': 'hops',
        'feedback': 1,
        'avg_latency': 3.3333,
    }
