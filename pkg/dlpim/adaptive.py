#!/usr/bin/env python3

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional, TYPE_CHECKING

from dlpim.logger import Logger

# Ensure we have modules available only for type checking.
if TYPE_CHECKING:
    from dlpim.topology import Topology


class PolicyKind(Enum):
    """Which subscription policy drives the normal sets."""
    ALWAYS_ON = 'always_on'
    ALWAYS_OFF = 'always_off'
    HOPS_ADAPTIVE = 'hops_adaptive'
    LATENCY_ADAPTIVE = 'latency_adaptive'

    @property
    def adaptive(self) -> bool:
        return self in (PolicyKind.HOPS_ADAPTIVE, PolicyKind.LATENCY_ADAPTIVE)

    @staticmethod
    def parse(name: str) -> PolicyKind:
        """Parses the policy names accepted in files and on the command
        line, such as always-on, on, hops or latency_adaptive."""
        key = str(name).strip().lower().replace('-', '_')
        aliases = {
            'on': 'always_on',
            'off': 'always_off',
            'baseline': 'always_off',
            'never': 'always_off',
            'hops': 'hops_adaptive',
            'latency': 'latency_adaptive',
        }
        key = aliases.get(key, key)
        for kind in PolicyKind:
            if kind.value == key:
                return kind

        raise ValueError(f'Unknown subscription policy {name!r}')


class LeaderClass(Enum):
    """Set sampling class of a subscription table set."""
    NORMAL = 'normal'
    ALWAYS_ON_LEADER = 'always_on_leader'
    ALWAYS_OFF_LEADER = 'always_off_leader'


@dataclass(frozen=True)
class EpochConfig:
    """Parameters of the epoch driven policy engine."""
    policy_kind: str = 'latency_adaptive'
    epoch_cycles: int = 1_000_000
    latency_threshold: float = 0.02
    central_decision_latency: int = 1000
    sampling_enabled: bool = False
    leader_stride: int = 64
    global_decision: bool = True
    bootstrap_epochs: int = 1

    @property
    def kind(self) -> PolicyKind:
        return PolicyKind.parse(self.policy_kind)


@dataclass
class Accumulators:
    """One copy of the accumulating registers."""
    feedback: int = 0
    feedback_events: int = 0
    latency_acc: int = 0
    request_count: int = 0

    def clear(self):
        self.feedback = 0
        self.feedback_events = 0
        self.latency_acc = 0
        self.request_count = 0

    def merge(self, other: Accumulators):
        self.feedback += other.feedback
        self.feedback_events += other.feedback_events
        self.latency_acc += other.latency_acc
        self.request_count += other.request_count

    def snapshot(self) -> Accumulators:
        return Accumulators(self.feedback, self.feedback_events,
                            self.latency_acc, self.request_count)

    def avg_latency(self) -> Optional[Fraction]:
        if self.request_count == 0:
            return None
        return Fraction(self.latency_acc, self.request_count)

    def is_zero(self) -> bool:
        return (self.feedback == 0 and self.feedback_events == 0 and
                self.latency_acc == 0 and self.request_count == 0)


@dataclass
class PolicyRegisters:
    """Per vault performance registers used by the adaptive policies."""
    normal: Accumulators = field(default_factory=Accumulators)
    leaders: dict[LeaderClass, Accumulators] = field(default_factory=lambda: {
        LeaderClass.ALWAYS_ON_LEADER: Accumulators(),
        LeaderClass.ALWAYS_OFF_LEADER: Accumulators(),
    })
    prev_avg_latency: Optional[Fraction] = None

    @property
    def feedback(self) -> int:
        return self.normal.feedback

    @property
    def latency_acc(self) -> int:
        return self.normal.latency_acc

    @property
    def request_count(self) -> int:
        return self.normal.request_count

    def bucket(self, leader: LeaderClass) -> Accumulators:
        if leader == LeaderClass.NORMAL:
            return self.normal
        return self.leaders[leader]

    def clear(self):
        """Clears everything but the previous latency register."""
        self.normal.clear()
        for acc in self.leaders.values():
            acc.clear()

    def is_clear(self) -> bool:
        return self.normal.is_zero() and all(
            acc.is_zero() for acc in self.leaders.values())

    def snapshot(self) -> PolicyReport:
        return PolicyReport(
            normal=self.normal.snapshot(),
            on_leader=self.leaders[LeaderClass.ALWAYS_ON_LEADER].snapshot(),
            off_leader=self.leaders[LeaderClass.ALWAYS_OFF_LEADER].snapshot())


@dataclass
class PolicyReport:
    """Contents of a policy statistics report packet."""
    normal: Accumulators
    on_leader: Accumulators
    off_leader: Accumulators

    @staticmethod
    def empty() -> PolicyReport:
        return PolicyReport(Accumulators(), Accumulators(), Accumulators())

    def merge(self, other: PolicyReport):
        self.normal.merge(other.normal)
        self.on_leader.merge(other.on_leader)
        self.off_leader.merge(other.off_leader)


@dataclass
class Decision:
    """The outcome of an epoch decision."""
    epoch: int
    policy_on: bool
    rule: str
    feedback: int
    avg_latency: Optional[Fraction]

    def as_dict(self) -> dict:
        return {
            'epoch': self.epoch,
            'policy': 'on' if self.policy_on else 'off',
            'rule': self.rule,
            'feedback': self.feedback,
            'avg_latency': (None if self.avg_latency is None
                            else round(float(self.avg_latency), 4)),
        }


def leader_sets(sets: int, sampling: bool,
                stride: int = 64) -> list[LeaderClass]:
    """Assigns a sampling class to every subscription table set. With the
    default stride every 64th set leads for each class, tables smaller than
    two strides get exactly one leader per class."""
    classes = [LeaderClass.NORMAL] * sets
    if not sampling:
        return classes
    if sets < 2:
        raise ValueError('Set sampling requires at least two table sets')

    # Small tables only get a single leader of each kind.
    if sets < 2 * stride:
        classes[0] = LeaderClass.ALWAYS_ON_LEADER
        classes[1] = LeaderClass.ALWAYS_OFF_LEADER
        return classes

    for s in range(sets):
        if s % stride == 0:
            classes[s] = LeaderClass.ALWAYS_ON_LEADER
        elif s % stride == 1:
            classes[s] = LeaderClass.ALWAYS_OFF_LEADER

    return classes


class AdaptivePolicy:
    """Epoch driven subscription policy engine. Registers live in each vault,
    this object holds the decision logic and the central vault's state."""

    def __init__(self, epoch: EpochConfig, topology: Topology,
                 logger: Logger = None):
        self.config = epoch
        self.kind = epoch.kind
        self.topology = topology
        self.policy_on = self.kind != PolicyKind.ALWAYS_OFF
        self.prev_avg_latency: Optional[Fraction] = None
        self.decisions: list[Decision] = []

        # Create our logger if needed.
        if logger is None:
            self.logger = Logger('dlpim', 'adaptive')
        else:
            self.logger = logger.for_subsystem('adaptive')

    @property
    def report_lead(self) -> int:
        """How many cycles before an epoch ends vaults must send their
        reports so the broadcast lands at the boundary. Reports are two flits
        and the broadcast is one flit over at most the network diameter."""
        lead = (self.config.central_decision_latency +
                3 * self.topology.diameter)
        return min(lead, self.config.epoch_cycles - 1)

    def record_hop_feedback(self, requester: PolicyRegisters,
                            holder: Optional[PolicyRegisters],
                            actual_hops: int, estimated_hops: int,
                            leader: LeaderClass = LeaderClass.NORMAL) -> int:
        """Compares the hops a subscribed access actually needed with the
        estimate had the block stayed home. Penalties are charged to the
        holder as well. Returns the applied delta."""
        if estimated_hops == actual_hops:
            return 0

        delta = 1 if estimated_hops > actual_hops else -1
        req = requester.bucket(leader)
        req.feedback += delta
        req.feedback_events += 1
        if delta < 0 and holder is not None and holder is not requester:
            hold = holder.bucket(leader)
            hold.feedback -= 1
            hold.feedback_events += 1

        return delta

    @staticmethod
    def record_latency(registers: PolicyRegisters, latency: int,
                       leader: LeaderClass = LeaderClass.NORMAL):
        """Accumulates the latency of a completed request."""
        acc = registers.bucket(leader)
        acc.latency_acc += latency
        acc.request_count += 1

    def epoch_decide(self, epoch: int, report: PolicyReport) -> Decision:
        """Decides the normal set policy of the next epoch from the aggregated
        reports of the epoch that just ended."""
        current = self.policy_on
        feedback = report.normal.feedback
        avg = report.normal.avg_latency()
        rule = 'fixed'
        nxt = current

        if not self.kind.adaptive:
            nxt = self.kind == PolicyKind.ALWAYS_ON
        elif self.config.sampling_enabled:
            nxt, rule = self._decide_sampled(report, current)
        elif (self.kind == PolicyKind.HOPS_ADAPTIVE or
              epoch < self.config.bootstrap_epochs):
            nxt, rule = self._decide_hops(report.normal, current)
        else:
            nxt, rule = self._decide_latency(avg, current)

        # Remember this epoch's latency for the next comparison.
        if avg is not None:
            self.prev_avg_latency = avg

        decision = Decision(epoch, nxt, rule, feedback, avg)
        self.decisions.append(decision)
        self.policy_on = nxt
        self.logger.info('epoch_decide', f'Epoch {epoch} decided subscription '
                         f'{"ON" if nxt else "OFF"} ({rule})',
                         decision.as_dict())

        return decision

    @staticmethod
    def _decide_hops(acc: Accumulators, current: bool) -> tuple[bool, str]:
        # An epoch without subscribed accesses keeps the policy.
        if acc.feedback_events == 0:
            return current, 'hops_idle'
        return acc.feedback >= 0, 'hops'

    def _decide_latency(self, avg: Optional[Fraction],
                        current: bool) -> tuple[bool, str]:
        if avg is None or self.prev_avg_latency is None:
            return current, 'latency_idle'

        limit = self.prev_avg_latency * (
            1 + Fraction(self.config.latency_threshold).limit_denominator())
        if avg <= limit:
            return current, 'latency_keep'
        return not current, 'latency_flip'

    def _decide_sampled(self, report: PolicyReport,
                        current: bool) -> tuple[bool, str]:
        on, off = report.on_leader, report.off_leader
        if self.kind == PolicyKind.HOPS_ADAPTIVE:
            if on.feedback > off.feedback:
                return True, 'sampled_hops'
            if on.feedback < off.feedback:
                return False, 'sampled_hops'
            return current, 'sampled_idle'

        # Latency mode needs both leaders to have seen traffic.
        on_avg, off_avg = on.avg_latency(), off.avg_latency()
        if on_avg is None or off_avg is None:
            return self._decide_latency(report.normal.avg_latency(), current)
        if on_avg == off_avg:
            return current, 'sampled_idle'
        return on_avg < off_avg, 'sampled_latency'
