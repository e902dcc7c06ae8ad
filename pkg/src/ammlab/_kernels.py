"""Constant-product kernels with backend selection.

Pure-Python reference implementations live here.  When the compiled
extension :mod:`ammlab._speedups` imports cleanly (and ``AMMLAB_PURE`` is
unset), calls whose operands fit the C fast range are routed to it; larger
operands silently fall back to the exact big-int path, so results are
bit-identical either way.

The fast range keeps every intermediate product inside a signed 128-bit
word: operands below 2**56 with a fee denominator of at most 10**4.
"""

from __future__ import annotations

import os

try:  # compiled extension is optional
    from . import _speedups  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover - depends on build environment
    _speedups = None

_FORCE_PURE = os.environ.get("AMMLAB_PURE", "") not in ("", "0")

HAVE_SPEEDUPS = _speedups is not None
BACKEND = "compiled" if (HAVE_SPEEDUPS and not _FORCE_PURE) else "pure"

FAST_LIMIT = 1 << 56
FAST_FEE_DEN = 10_000


def quote_out_py(res_in: int, res_out: int, amount_in: int, fee_num: int, fee_den: int) -> int:
    """Floor output of a fee-bearing constant-product swap."""
    scaled = amount_in * fee_num
    return scaled * res_out // (res_in * fee_den + scaled)


def arb_profit_py(x1: int, y1: int, x2: int, y2: int, fee_num: int, fee_den: int, dx: int) -> int:
    """Executed profit of swapping dx X->Y on pool 1 then Y->X on pool 2."""
    out1 = quote_out_py(x1, y1, dx, fee_num, fee_den)
    out2 = quote_out_py(y2, x2, out1, fee_num, fee_den)
    return out2 - dx


def arb_best_on_grid_py(
    x1: int, y1: int, x2: int, y2: int, fee_num: int, fee_den: int, lo: int, hi: int, step: int
) -> tuple[int, int]:
    """Scan dx in [lo, hi] by step; return (dx, profit) of the first maximum."""
    best_dx = lo
    best_profit = arb_profit_py(x1, y1, x2, y2, fee_num, fee_den, lo)
    dx = lo + step
    while dx <= hi:
        p = arb_profit_py(x1, y1, x2, y2, fee_num, fee_den, dx)
        if p > best_profit:
            best_profit = p
            best_dx = dx
        dx += step
    return best_dx, best_profit


def route2_out_py(
    xa: int, ya: int, xb: int, yb: int, fee_num: int, fee_den: int, s: int, total: int
) -> int:
    """Combined output of splitting an in-amount ``total`` as s / total-s."""
    out = 0
    if s > 0:
        out += quote_out_py(xa, ya, s, fee_num, fee_den)
    r = total - s
    if r > 0:
        out += quote_out_py(xb, yb, r, fee_num, fee_den)
    return out


def route2_best_on_grid_py(
    xa: int,
    ya: int,
    xb: int,
    yb: int,
    fee_num: int,
    fee_den: int,
    lo: int,
    hi: int,
    step: int,
    total: int,
) -> tuple[int, int]:
    """Scan split s in [lo, hi] by step; return (s, out) of the first maximum."""
    best_s = lo
    best_out = route2_out_py(xa, ya, xb, yb, fee_num, fee_den, lo, total)
    s = lo + step
    while s <= hi:
        o = route2_out_py(xa, ya, xb, yb, fee_num, fee_den, s, total)
        if o > best_out:
            best_out = o
            best_s = s
        s += step
    return best_s, best_out


def _fast_ok(fee_den: int, *values: int) -> bool:
    if fee_den > FAST_FEE_DEN:
        return False
    for v in values:
        if v >= FAST_LIMIT:
            return False
    return True


if HAVE_SPEEDUPS and not _FORCE_PURE:

    def quote_out(res_in, res_out, amount_in, fee_num, fee_den):
        if _fast_ok(fee_den, res_in, res_out, amount_in):
            return _speedups.quote_out(res_in, res_out, amount_in, fee_num, fee_den)
        return quote_out_py(res_in, res_out, amount_in, fee_num, fee_den)

    def arb_profit(x1, y1, x2, y2, fee_num, fee_den, dx):
        if _fast_ok(fee_den, x1, y1, x2, y2, dx):
            return _speedups.arb_profit(x1, y1, x2, y2, fee_num, fee_den, dx)
        return arb_profit_py(x1, y1, x2, y2, fee_num, fee_den, dx)

    def arb_best_on_grid(x1, y1, x2, y2, fee_num, fee_den, lo, hi, step):
        if _fast_ok(fee_den, x1, y1, x2, y2, hi):
            return _speedups.arb_best_on_grid(x1, y1, x2, y2, fee_num, fee_den, lo, hi, step)
        return arb_best_on_grid_py(x1, y1, x2, y2, fee_num, fee_den, lo, hi, step)

    def route2_out(xa, ya, xb, yb, fee_num, fee_den, s, total):
        if _fast_ok(fee_den, xa, ya, xb, yb, total):
            return _speedups.route2_out(xa, ya, xb, yb, fee_num, fee_den, s, total)
        return route2_out_py(xa, ya, xb, yb, fee_num, fee_den, s, total)

    def route2_best_on_grid(xa, ya, xb, yb, fee_num, fee_den, lo, hi, step, total):
        if _fast_ok(fee_den, xa, ya, xb, yb, total):
            return _speedups.route2_best_on_grid(
                xa, ya, xb, yb, fee_num, fee_den, lo, hi, step, total
            )
        return route2_best_on_grid_py(xa, ya, xb, yb, fee_num, fee_den, lo, hi, step, total)

else:
    quote_out = quote_out_py
    arb_profit = arb_profit_py
    arb_best_on_grid = arb_best_on_grid_py
    route2_out = route2_out_py
    route2_best_on_grid = route2_best_on_grid_py
