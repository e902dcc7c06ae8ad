"""Optimal split of one swap across pools of the same pair.

The split is a greedy waterfall: volume flows into the best-priced pool
until its price falls to the next pool's, the two then fill together in
proportion to their reserves, and so on.  Thresholds come from an exact
integer quadratic, never from decimal approximations, so any configured
fee works.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Sequence

from .amounts import AssetAmount, FeeRate, ensure_amount
from .errors import InternalError, PreconditionError
from .pool import (
    Direction,
    PoolState,
    SwapAction,
    apply_swap,
    common_fee,
    marginal_price,
    quote,
    synchronized,
)


@dataclass(frozen=True)
class RouteLeg:
    market_id: str
    amount_in: AssetAmount


@dataclass(frozen=True)
class RoutePlan:
    direction: Direction
    legs: tuple[RouteLeg, ...]
    total_in: AssetAmount
    expected_total_out: AssetAmount

    def __post_init__(self) -> None:
        if sum(leg.amount_in for leg in self.legs) != self.total_in:
            raise InternalError("route legs do not sum to total_in")
        if any(leg.amount_in < 0 for leg in self.legs):
            raise InternalError("negative route leg")
        if self.total_in > 0 and not any(leg.amount_in > 0 for leg in self.legs):
            raise InternalError("route plan moves no volume")

    def to_json_obj(self) -> dict:
        return {
            "direction": self.direction.value,
            "legs": [
                {"market_id": leg.market_id, "amount_in": str(leg.amount_in)}
                for leg in self.legs
            ],
            "total_in": str(self.total_in),
            "expected_total_out": str(self.expected_total_out),
        }


def threshold_to_price(
    res_in: int, res_out: int, fee: FeeRate, target: Fraction
) -> int:
    """Input volume that moves a pool's marginal price down to ``target``.

    Solves fn*t_n*d^2 + (fd+fn)*res_in*t_n*d + fd*(t_n*res_in^2 -
    t_d*res_in*res_out) = 0 for the positive root, rounded to nearest.
    Returns 0 when the pool already trades at or below the target.
    """
    if Fraction(res_out, res_in) <= target:
        return 0
    fn, fd = fee.numerator, fee.denominator
    t_n, t_d = target.numerator, target.denominator
    a = fn * t_n
    b = (fd + fn) * res_in * t_n
    c = fd * (t_n * res_in * res_in - t_d * res_in * res_out)
    disc = b * b - 4 * a * c
    if disc < 0:
        raise InternalError("negative discriminant in threshold quadratic")
    num = isqrt(disc) - b
    q, r = divmod(num, 2 * a)
    if 2 * r >= 2 * a:
        q += 1
    return max(q, 0)


def sync_threshold(rich: PoolState, poor: PoolState, direction: Direction = Direction.X_TO_Y) -> int:
    """Volume into ``rich`` that levels its price with ``poor``.

    Returns 0 when the prices are already inside one fee band (nothing to
    synchronize).  Both pools must charge the same fee.
    """
    fee = common_fee((rich, poor))
    p_rich = marginal_price(rich, direction)
    p_poor = marginal_price(poor, direction)
    if p_rich <= p_poor or synchronized(rich, poor, direction):
        return 0
    res_in, res_out = rich.reserves(direction)
    return threshold_to_price(res_in, res_out, fee, p_poor)


def split_ratio(pool1: PoolState, pool2: PoolState) -> Fraction:
    """Share of remaining volume for pool1 once prices are level: q/(1+q).

    q is the reserve ratio x1/x2; requires the pools to be synchronized
    (their y1/y2 then agrees with q up to the fee band).
    """
    common_fee((pool1, pool2))
    pool1.require_active()
    pool2.require_active()
    if not synchronized(pool1, pool2):
        raise PreconditionError(
            "pools must be price-synchronized before computing a split ratio"
        )
    q = Fraction(pool1.x, pool2.x)
    return q / (1 + q)


def apportion(total: int, weights: Sequence[int]) -> list[int]:
    """Largest-remainder split of ``total`` proportional to ``weights``.

    Parts sum to total exactly.  Ties go to the earlier index.
    """
    if total < 0:
        raise PreconditionError("cannot apportion a negative total")
    w_sum = sum(weights)
    if w_sum <= 0:
        raise PreconditionError("weights must sum to a positive value")
    parts = []
    remainders = []
    for i, w in enumerate(weights):
        share, rem = divmod(total * w, w_sum)
        parts.append(share)
        remainders.append((-rem, i))
    leftover = total - sum(parts)
    for _, i in sorted(remainders)[:leftover]:
        parts[i] += 1
    return parts


def _sorted_by_price(pools: Sequence[PoolState], direction: Direction) -> list[PoolState]:
    return sorted(
        pools,
        key=lambda p: (-marginal_price(p, direction), p.market_id),
    )


def _waterfall(
    pools: Sequence[PoolState],
    direction: Direction,
    budget: int | None,
) -> tuple[dict[str, int], int, int]:
    """Greedy fill.  Returns (allocation by market, spent, threshold evals).

    With budget=None the fill runs until every pool is absorbed, which
    yields the total synchronization volume.
    """
    fee = common_fee(pools)
    order = _sorted_by_price(pools, direction)
    working = {p.market_id: p for p in order}
    alloc = {p.market_id: 0 for p in order}
    active = [order[0].market_id]
    spent = 0
    threshold_evals = 0

    def pour(market_id: str, amount: int) -> None:
        nonlocal spent
        if amount <= 0:
            return
        pool = working[market_id]
        new_pool, _ = apply_swap(
            pool, SwapAction(market_id, direction, amount)
        )
        working[market_id] = new_pool
        alloc[market_id] += amount
        spent += amount

    for nxt in order[1:]:
        target = marginal_price(working[nxt.market_id], direction)
        step: list[tuple[str, int]] = []
        for mid in active:
            res_in, res_out = working[mid].reserves(direction)
            threshold_evals += 1
            step.append((mid, threshold_to_price(res_in, res_out, fee, target)))
        step_total = sum(d for _, d in step)
        if budget is not None and budget - spent < step_total:
            break
        for mid, d in step:
            pour(mid, d)
        active.append(nxt.market_id)

    if budget is not None and budget > spent:
        remaining = budget - spent
        weights = [working[mid].reserves(direction)[0] for mid in active]
        for mid, part in zip(active, apportion(remaining, weights)):
            pour(mid, part)
    return alloc, spent, threshold_evals


def total_sync_threshold(pools: Sequence[PoolState], direction: Direction) -> int:
    """Volume that levels every pool's price (sum of waterfall steps)."""
    if not pools:
        raise PreconditionError("need at least one pool")
    if len(pools) == 1:
        return 0
    _, spent, _ = _waterfall(pools, direction, budget=None)
    return spent


def route_with_stats(
    pools: Sequence[PoolState], direction: Direction, total_in: int
) -> tuple[RoutePlan, int]:
    """route() plus the number of threshold computations performed."""
    if not pools:
        raise PreconditionError("need at least one pool")
    ensure_amount(total_in, "total_in")
    if total_in <= 0:
        raise PreconditionError("total_in must be positive")
    for p in pools:
        p.require_active()
    common_fee(pools)
    by_id = {p.market_id: p for p in pools}
    if len(by_id) != len(pools):
        raise PreconditionError("duplicate market_id in pool set")

    alloc, _, threshold_evals = _waterfall(pools, direction, budget=total_in)
    waterfall_out = sum(
        quote(by_id[mid], direction, amount)
        for mid, amount in alloc.items()
        if amount > 0
    )

    # Integer flooring can make a one-pool fill beat a marginal split, so the
    # plan falls back to the best single pool whenever that quotes higher.
    singles = sorted(
        ((quote(p, direction, total_in), p.market_id) for p in pools),
        key=lambda t: (-t[0], t[1]),
    )
    best_single_out, best_single_mid = singles[0]
    if best_single_out > waterfall_out:
        alloc = {mid: 0 for mid in alloc}
        alloc[best_single_mid] = total_in
        waterfall_out = best_single_out

    legs = tuple(
        RouteLeg(mid, alloc[mid]) for mid in sorted(alloc) if alloc[mid] > 0
    )
    plan = RoutePlan(
        direction=direction,
        legs=legs,
        total_in=total_in,
        expected_total_out=waterfall_out,
    )
    return plan, threshold_evals


def route(pools: Sequence[PoolState], direction: Direction, total_in: int) -> RoutePlan:
    """Optimal greedy split of ``total_in`` across ``pools``."""
    plan, _ = route_with_stats(pools, direction, total_in)
    return plan
