"""Directed rounding helpers.

A threshold is only useful if it is an over-estimate, so real values are
nudged upward by a margin well above their accumulated rounding error before
the integer ceiling is taken.
"""

from __future__ import annotations

import mpmath
from mpmath import mp
from mpmath.libmp import from_int

# Relative slack in bits left for rounding error accumulated by a formula.
SLACK_BITS = 16


def nudge_up(x, precision_bits: int):
    """x enlarged by a relative 2^-(precision_bits - SLACK_BITS)."""
    rel = mpmath.mpf(2) ** -(precision_bits - SLACK_BITS)
    return x + abs(x) * rel


def nudge_down(x, precision_bits: int):
    rel = mpmath.mpf(2) ** -(precision_bits - SLACK_BITS)
    return x - abs(x) * rel


def ceil_certified(x, precision_bits: int, minimum: int = 1) -> int:
    """Smallest integer >= an upward-nudged copy of x, and at least ``minimum``."""
    if not mpmath.isfinite(x):
        raise OverflowError(f"cannot take the ceiling of {x}")
    n = int(mpmath.ceil(nudge_up(mpmath.mpf(x), precision_bits)))
    return max(minimum, n)


def int_to_mpf(n: int, direction: str, precision_bits: int | None = None):
    """Exact integer as an mpf rounded toward +inf ('up') or -inf ('down')."""
    prec = precision_bits or mp.prec
    rnd = {"up": "c", "down": "f"}[direction]
    return mp.make_mpf(from_int(n, prec, rnd))
