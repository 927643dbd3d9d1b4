#!/usr/bin/env python3

import hashlib
import json


def ceil_div(a: int, b: int) -> int:
    """Integer division rounding towards positive infinity."""
    return -(-a // b)


def saturating_inc(value: int, bits: int = 8) -> int:
    """Increments a counter that sticks at its maximum value."""
    return min(value + 1, (1 << bits) - 1)


def digest(obj) -> str:
    """Stable short fingerprint of any JSON serializable object."""
    data = json.dumps(obj, sort_keys=True, default=str).encode('utf-8')
    return hashlib.sha256(data).hexdigest()[:16]
