#!/usr/bin/env python3

from dlpim.cache import L1Filter


def test_read_miss_then_hit():
    l1 = L1Filter()
    assert not l1.access(0x1000)
    assert l1.access(0x1000)
    assert l1.access(0x1020)
    assert (l1.hits, l1.misses) == (2, 1)


def test_writes_do_not_allocate():
    l1 = L1Filter()
    assert not l1.access(0x40, write=True)
    assert not l1.access(0x40)
    assert l1.access(0x40, write=True)


def test_least_recently_used_line_goes_first():
    l1 = L1Filter(size_bytes=2 * 64, ways=2, line_bytes=64)
    assert l1.set_count == 1
    l1.access(0)
    l1.access(64)
    l1.access(0)
    l1.access(128)

    assert l1.access(0)
    assert not l1.access(64)
