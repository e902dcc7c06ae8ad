"""Shared test constructions: random universes, plans and leg sequences."""

from __future__ import annotations

import random

from ammlab.engine import Leg
from ammlab.oracle import log_uniform_int
from ammlab.pool import Direction, PoolState, SwapAction, apply_swap


def pool(market_id: str, x: int, y: int) -> PoolState:
    return PoolState(market_id, x, y)


def ladder_universe(rng: random.Random, n: int) -> list[PoolState]:
    """Universe whose gap-narrowing arbitrage exercises every aggregation.

    A cheap shallow end with close-packed huggers above it is absorbed
    first (small sync volumes); one hugger just below a deeper expensive
    end is absorbed last.  That ordering yields n-1 arbitrage
    computations, 2n-5 synchronize-volume computations and n swaps.
    """
    price_lo = rng.uniform(0.5, 2.0)
    price_hi = price_lo * rng.uniform(8.0, 15.0)
    pools: list[PoolState] = []

    def mk(price: float, lo: int, hi: int) -> PoolState:
        x = log_uniform_int(rng, lo, hi)
        return PoolState(f"m{len(pools)}", x, max(1, int(price * x)))

    pools.append(mk(price_lo, 3 * 10**8, 5 * 10**8))
    for k in range(n - 3):
        pools.append(mk(price_lo * (1.02 + 0.015 * k), 10**8, 2 * 10**8))
    pools.append(mk(price_hi * rng.uniform(0.94, 0.96), 10**8, 2 * 10**8))
    pools.append(mk(price_hi, 8 * 10**8, 12 * 10**8))
    return pools


def desynced_pair(rng: random.Random, lo: int = 10**6, hi: int = 10**9) -> list[PoolState]:
    """Two pools of one pair with a material price gap."""
    x1 = log_uniform_int(rng, lo, hi)
    y1 = log_uniform_int(rng, lo, hi)
    gap = rng.uniform(1.2, 3.0)
    x2 = log_uniform_int(rng, lo, hi)
    y2 = max(1, int(y1 / x1 / gap * x2))
    return [PoolState("a", x1, y1), PoolState("b", x2, y2)]


def random_leg_sequence(
    rng: random.Random, pools: list[PoolState], n_legs: int
) -> tuple[list[Leg], dict[str, PoolState]]:
    """Flow-consistent random legs, mixing directions per market.

    Re-sales are capped by what the sequence bought on that market, so the
    per-market nets stay representable as single swaps.  Returns the legs
    and the final states of sequential execution.
    """
    working = {p.market_id: p for p in pools}
    bought = {p.market_id: 0 for p in pools}
    ids = sorted(working)
    legs: list[Leg] = []
    for _ in range(n_legs):
        mid = rng.choice(ids)
        p = working[mid]
        if bought[mid] > 0 and rng.random() < 0.5:
            direction = Direction.Y_TO_X
            amount = rng.randint(1, bought[mid])
            bought[mid] -= amount
        else:
            direction = Direction.X_TO_Y
            amount = rng.randint(1, max(1, p.x // 20))
        new_pool, out = apply_swap(p, SwapAction(mid, direction, amount))
        if direction is Direction.X_TO_Y:
            bought[mid] += out
        working[mid] = new_pool
        legs.append(Leg(mid, direction, amount, out, "synthetic"))
    return legs, working
