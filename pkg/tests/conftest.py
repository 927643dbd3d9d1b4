#!/usr/bin/env python3

from typing import Callable, Iterable, Optional

import pytest

from dlpim.config import SimConfig
from dlpim.engine import Simulator
from dlpim.stats import StatsReport
from dlpim.trace import Op, TraceRecord

# No warmup, small tables and every consistency check switched on.
TEST_OVERRIDES = {
    'subscription.sets': 16,
    'simulation.warmup_requests': 0,
    'simulation.audit': True,
    'simulation.record_requests': True,
    'simulation.log_level': 'WARNING',
}


def build_config(overrides: Optional[dict] = None) -> SimConfig:
    return SimConfig().with_overrides({**TEST_OVERRIDES, **(overrides or {})})


def read(core: int, addr: int, delta: int = 0) -> TraceRecord:
    return TraceRecord(delta, core, Op.READ, addr)


def write(core: int, addr: int, delta: int = 0) -> TraceRecord:
    return TraceRecord(delta, core, Op.WRITE, addr)


@pytest.fixture
def make_config() -> Callable[..., SimConfig]:
    return build_config


@pytest.fixture
def make_sim() -> Callable[..., Simulator]:
    def _make(records: Iterable[TraceRecord], overrides: dict = None,
              seed: int = 0, listeners=()) -> Simulator:
        return Simulator(build_config(overrides), records, seed,
                         listeners=listeners)

    return _make


@pytest.fixture
def simulate(make_sim) -> Callable[..., StatsReport]:
    def _simulate(records: Iterable[TraceRecord], overrides: dict = None,
                  seed: int = 0, listeners=(),
                  setup: Callable[[Simulator], None] = None) -> StatsReport:
        sim = make_sim(records, overrides, seed, listeners)
        if setup is not None:
            setup(sim)
        return sim.run()

    return _simulate


def request_of(report: StatsReport, core: int, index: int = 0) -> dict:
    """Logged request of a core, in completion order."""
    return [r for r in report.requests_log if r['core'] == core][index]
