"""Two-point arbitrage between constant-product pools.

The two-pool optimum has an exact closed form; every closed-form result is
refined by a +-1 integer hill climb on executed profit because floor
division shifts the argmax by a unit or two.  The N-pool strategy narrows
the price gap from both ends, aggregating synchronized pools into virtual
exchanges until no pair is profitable.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from math import isqrt
from typing import Callable, Sequence

from ._kernels import arb_best_on_grid, arb_profit
from .amounts import FeeRate
from .errors import InternalError, NotProfitableError, PreconditionError, UnsynchronizedError
from .pool import (
    Direction,
    PoolState,
    SwapAction,
    apply_swap,
    common_fee,
    marginal_price,
    quote,
    quote_in,
    synchronized,
)
from .routing import apportion, threshold_to_price


@dataclass(frozen=True)
class ArbPlan:
    """Ordered swap legs of one executed arbitrage step."""

    legs: tuple[SwapAction, ...]
    leg_outputs: tuple[int, ...]
    expected_profit: int
    profit_asset: str  # "x" or "y"

    def __post_init__(self) -> None:
        if len(self.legs) != len(self.leg_outputs):
            raise InternalError("leg/output length mismatch")
        if self.expected_profit <= 0:
            raise InternalError("arbitrage plan must carry positive profit")

    def to_json_obj(self) -> dict:
        return {
            "profit_asset": self.profit_asset,
            "expected_profit": str(self.expected_profit),
            "legs": [
                {
                    "market_id": leg.market_id,
                    "direction": leg.direction.value,
                    "amount_in": str(leg.amount_in),
                    "amount_out": str(out),
                }
                for leg, out in zip(self.legs, self.leg_outputs)
            ],
        }


@dataclass(frozen=True)
class VirtualPool:
    """Several synchronized pools treated as one exchange.

    A swap against the aggregate is routed to the members in proportion to
    their reserves, which keeps their prices moving in lockstep.
    """

    members: tuple[PoolState, ...]

    def __post_init__(self) -> None:
        if not self.members:
            raise PreconditionError("virtual pool needs at least one member")
        common_fee(self.members)
        for m in self.members[1:]:
            if not synchronized(self.members[0], m):
                raise UnsynchronizedError(
                    f"virtual pool members {self.members[0].market_id} and "
                    f"{m.market_id} are outside the fee band"
                )

    @property
    def x(self) -> int:
        return sum(m.x for m in self.members)

    @property
    def y(self) -> int:
        return sum(m.y for m in self.members)

    @property
    def fee(self) -> FeeRate:
        return self.members[0].fee

    @property
    def market_ids(self) -> tuple[str, ...]:
        return tuple(m.market_id for m in self.members)

    def as_pool(self) -> PoolState:
        """Aggregate reserves as a plain pool, for price and quote math."""
        return PoolState("+".join(self.market_ids), self.x, self.y, self.fee)

    def price(self) -> Fraction:
        return Fraction(self.y, self.x)

    def swap(self, direction: Direction, amount_in: int) -> tuple[tuple[PoolState, ...], int, list[tuple[SwapAction, int]]]:
        """Distribute a swap across members proportional to in-reserves.

        Returns (new members, total output, executed legs).
        """
        weights = [m.reserves(direction)[0] for m in self.members]
        parts = apportion(amount_in, weights)
        new_members = []
        legs: list[tuple[SwapAction, int]] = []
        total_out = 0
        for member, part in zip(self.members, parts):
            if part <= 0:
                new_members.append(member)
                continue
            action = SwapAction(member.market_id, direction, part)
            new_member, out = apply_swap(member, action)
            new_members.append(new_member)
            legs.append((action, out))
            total_out += out
        return tuple(new_members), total_out, legs


def is_profitable(pool1: PoolState, pool2: PoolState) -> bool:
    """True when buying Y on pool1 and selling it on pool2 can profit.

    Exact integer form of the fee-band constraint: y2*x1*fd**2 <
    fn**2*y1*x2, i.e. pool2's price is below gamma**2 times pool1's.
    The opposite direction is the same test with swapped arguments.
    """
    pool1.require_active()
    pool2.require_active()
    fee = common_fee((pool1, pool2))
    fn, fd = fee.numerator, fee.denominator
    return pool2.y * pool1.x * fd * fd < fn * fn * pool1.y * pool2.x


def _closed_form_input(x1: int, y1: int, x2: int, y2: int, fee: FeeRate) -> int:
    """Positive root of d(profit)/d(input) = 0 for X->Y on 1, Y->X on 2."""
    fn, fd = fee.numerator, fee.denominator
    root = isqrt(x1 * x2 * y1 * y2)
    num = fd * (fn * root - fd * x1 * y2)
    den = fn * (fn * y1 + fd * y2)
    return num // den


def _hill_climb(profit_fn: Callable[[int], int], start: int, lo: int = 1) -> tuple[int, int]:
    """Walk to the nearest integer argmax from ``start`` (unimodal profit)."""
    d = max(start, lo)
    p = profit_fn(d)
    while True:
        up = profit_fn(d + 1)
        if up > p:
            d, p = d + 1, up
            continue
        if d - 1 >= lo:
            down = profit_fn(d - 1)
            if down > p:
                d, p = d - 1, down
                continue
        return d, p


def _refine_argmax(
    x1: int, y1: int, x2: int, y2: int, fee: FeeRate, start: int
) -> tuple[int, int]:
    """Integer argmax near the analytic optimum.

    Floor division makes the executed profit oscillate by a couple of units
    across the flat top, so a plain +-1 climb can stall behind a one-unit
    dip.  After climbing we sweep a unit-step window sized from the
    curvature (capped), then climb once more from the window's best point.
    """
    fn, fd = fee.numerator, fee.denominator

    def profit(d: int) -> int:
        return arb_profit(x1, y1, x2, y2, fn, fd, d)

    anchor, anchor_profit = _hill_climb(profit, start)
    # Flooring noise spreads near-max candidates over ~4*sqrt(w1) integers
    # around the real peak (w1 = inverse curvature); sweep that span, with
    # a cap that keeps the hot path cheap.  The analytic-adjacent anchor
    # wins ties so the returned input tracks the closed form.
    w1 = isqrt(x1 * x2 * y1 * y2) // (2 * (y1 + y2)) if (y1 + y2) else 0
    window = min(1 << 16, 4 * isqrt(max(w1, 1)) + 64)
    lo = max(1, anchor - window)
    hi = anchor + window
    swept, swept_profit = arb_best_on_grid(x1, y1, x2, y2, fn, fd, lo, hi, 1)
    if swept_profit > anchor_profit:
        return _hill_climb(profit, swept)
    return anchor, anchor_profit


def optimal_input_unchecked(pool1: PoolState, pool2: PoolState) -> tuple[int, int]:
    """(input, executed profit) maximizing the two-point round trip.

    Works for unprofitable pairs too, in which case the profit is <= 0.
    """
    fee = common_fee((pool1, pool2))
    pool1.require_active()
    pool2.require_active()
    start = _closed_form_input(pool1.x, pool1.y, pool2.x, pool2.y, fee)
    return _refine_argmax(pool1.x, pool1.y, pool2.x, pool2.y, fee, start)


def optimal_input(pool1: PoolState, pool2: PoolState) -> int:
    """Revenue-maximizing first-leg input for a profitable pool pair."""
    if not is_profitable(pool1, pool2):
        raise NotProfitableError(
            f"no profitable arbitrage from {pool1.market_id} to {pool2.market_id}"
        )
    best, _ = optimal_input_unchecked(pool1, pool2)
    return best


def execute_two_point(
    pool1: PoolState, pool2: PoolState, amount_in: int
) -> tuple[PoolState, PoolState, int]:
    """Swap X->Y on pool1, route the output Y->X through pool2.

    Returns the two new states and the realized profit in X, which is
    negative for a mis-sized input; sizing is the caller's concern.
    """
    if amount_in <= 0:
        raise PreconditionError("arbitrage input must be positive")
    new1, out1 = apply_swap(pool1, SwapAction(pool1.market_id, Direction.X_TO_Y, amount_in))
    new2, out2 = apply_swap(pool2, SwapAction(pool2.market_id, Direction.Y_TO_X, out1))
    return new1, new2, out2 - amount_in


@dataclass
class NPoolStats:
    arb_computations: int = 0
    sync_computations: int = 0
    swaps: int = 0
    iterations: int = 0
    profit: int = 0


@dataclass(frozen=True)
class NPoolResult:
    plans: tuple[ArbPlan, ...]
    pools: tuple[PoolState, ...]
    stats: NPoolStats
    legs: tuple[tuple[SwapAction, int], ...] = ()


def _price_y(pool: PoolState) -> Fraction:
    return Fraction(pool.y, pool.x)


def _profitable_for_y(left: VirtualPool, right: VirtualPool) -> bool:
    """Profit in Y from buying X on ``left`` and selling it on ``right``."""
    fee = left.fee
    fn, fd = fee.numerator, fee.denominator
    return left.y * right.x * fd * fd < fn * fn * right.y * left.x


def _optimal_y_input(left: VirtualPool, right: VirtualPool) -> tuple[int, int]:
    """(Y input into left, profit in Y) on the aggregate reserves.

    The X-convention closed form applied to axis-swapped aggregates yields
    the Y-flavour optimum.
    """
    fee = left.fee
    x1, y1 = left.y, left.x
    x2, y2 = right.y, right.x
    start = _closed_form_input(x1, y1, x2, y2, fee)
    return _refine_argmax(x1, y1, x2, y2, fee, start)


def _simulated_prices_after(
    left: VirtualPool, right: VirtualPool, y_in: int
) -> tuple[Fraction, Fraction]:
    """Aggregate prices (y/x) after ArbitrageForY with first-leg input y_in."""
    lp = left.as_pool()
    rp = right.as_pool()
    x_out = quote(lp, Direction.Y_TO_X, y_in)
    p_left = Fraction(lp.y + y_in, lp.x - x_out)
    y_back = quote(rp, Direction.X_TO_Y, x_out)
    p_right = Fraction(rp.y - y_back, rp.x + x_out)
    return p_left, p_right


def n_pool_arbitrage(pools: Sequence[PoolState], profit_in: str = "y") -> NPoolResult:
    """Drain every profitable price gap among N pools of one pair.

    Pools are sorted by price; the cheapest and dearest ends trade against
    each other, partially when a full-size arbitrage would overshoot the
    next pool's price (that pool is then absorbed into the nearer end).
    Afterwards no ordered pool pair is profitable in either direction.

    profit_in selects the asset the arbitrageur accumulates ("y" runs the
    strategy as published; "x" runs it on mirrored axes).
    """
    if len(pools) < 2:
        raise PreconditionError("n_pool_arbitrage needs at least 2 pools")
    if profit_in not in ("x", "y"):
        raise PreconditionError("profit_in must be 'x' or 'y'")
    common_fee(pools)
    if len({p.market_id for p in pools}) != len(pools):
        raise PreconditionError("duplicate market_id in pool set")

    if profit_in == "x":
        mirrored = n_pool_arbitrage([p.mirrored() for p in pools], profit_in="y")
        plans = tuple(
            ArbPlan(
                legs=tuple(
                    SwapAction(a.market_id, a.direction.reverse, a.amount_in, a.min_amount_out)
                    for a in plan.legs
                ),
                leg_outputs=plan.leg_outputs,
                expected_profit=plan.expected_profit,
                profit_asset="x",
            )
            for plan in mirrored.plans
        )
        return NPoolResult(
            plans=plans,
            pools=tuple(p.mirrored() for p in mirrored.pools),
            stats=mirrored.stats,
            legs=tuple(
                (SwapAction(a.market_id, a.direction.reverse, a.amount_in, a.min_amount_out), out)
                for a, out in mirrored.legs
            ),
        )

    working = sorted(pools, key=lambda p: (_price_y(p), p.market_id))
    n = len(working)
    l, r = 0, n - 1
    stats = NPoolStats()
    plans: list[ArbPlan] = []
    all_legs: list[tuple[SwapAction, int]] = []
    touched: dict[str, int] = {}

    def execute_for_y(y_in: int) -> None:
        nonlocal working
        left = VirtualPool(tuple(working[: l + 1]))
        right = VirtualPool(tuple(working[r:]))
        new_left, x_out, legs1 = left.swap(Direction.Y_TO_X, y_in)
        new_right, y_back, legs2 = right.swap(Direction.X_TO_Y, x_out)
        working = list(new_left) + working[l + 1 : r] + list(new_right)
        profit = y_back - y_in
        stats.profit += profit
        for action, out in legs1 + legs2:
            touched[action.market_id] = touched.get(action.market_id, 0) + action.amount_in
            all_legs.append((action, out))
        if profit > 0:
            plans.append(
                ArbPlan(
                    legs=tuple(a for a, _ in legs1 + legs2),
                    leg_outputs=tuple(o for _, o in legs1 + legs2),
                    expected_profit=profit,
                    profit_asset="y",
                )
            )
        # A unit-scale synchronization step can round its profit away; the
        # pools still need the nudge, only the plan emission is skipped.

    while True:
        stats.iterations += 1
        if stats.iterations > 2 * n:
            raise InternalError("n-pool arbitrage exceeded its iteration bound")
        left = VirtualPool(tuple(working[: l + 1]))
        right = VirtualPool(tuple(working[r:]))
        if not _profitable_for_y(left, right):
            break
        stats.arb_computations += 1
        d_full, gain = _optimal_y_input(left, right)
        if d_full < 1 or gain <= 0:
            break
        p_left_sim, p_right_sim = _simulated_prices_after(left, right, d_full)
        shift_left = l + 1 < r and p_left_sim > _price_y(working[l + 1])
        shift_right = l < r - 1 and p_right_sim < _price_y(working[r - 1])
        d_left: int | None = None
        d_right: int | None = None
        fee = left.fee
        if shift_left:
            stats.sync_computations += 1
            # Y volume into the left aggregate lifting its price to the
            # next pool up (quadratic on mirrored axes).
            target = _price_y(working[l + 1])
            d_left = threshold_to_price(
                left.y, left.x, fee, Fraction(target.denominator, target.numerator)
            )
        if shift_right:
            stats.sync_computations += 1
            # X volume that drags the right aggregate down to the next pool,
            # then the Y input on the left that produces exactly that X.
            target = _price_y(working[r - 1])
            x_needed = threshold_to_price(right.x, right.y, fee, target)
            if x_needed >= left.x:
                raise InternalError("overshoot detected but sync volume infeasible")
            d_right = (
                quote_in(left.as_pool(), Direction.Y_TO_X, x_needed)
                if x_needed > 0
                else 0
            )
        if shift_left and d_left is not None and (d_right is None or d_left <= d_right):
            if d_left >= 1:
                execute_for_y(d_left)
            l += 1
            continue
        if shift_right and d_right is not None and (d_left is None or d_left >= d_right):
            if d_right >= 1:
                execute_for_y(d_right)
            r -= 1
            continue
        execute_for_y(d_full)
        break

    stats.swaps = sum(1 for v in touched.values() if v > 0)
    final = tuple(sorted(working, key=lambda p: p.market_id))
    return NPoolResult(plans=tuple(plans), pools=final, stats=stats, legs=tuple(all_legs))


@dataclass(frozen=True)
class CostPrediction:
    n_pools: int
    arb_computations: int
    sync_computations: int
    swaps: int
    total_cost_pct: Decimal


def count_cost(n_pools: int) -> CostPrediction:
    """Predicted operation counts and relative cost of an N-pool arbitrage.

    Percentages are relative to one average plain-swap cost.  Values follow
    the published cost table, including its fixed swap-execution term for
    N > 3.
    """
    if n_pools < 2:
        raise PreconditionError("cost prediction needs at least 2 pools")
    if n_pools == 2:
        return CostPrediction(2, 1, 0, 2, Decimal("160.22"))
    if n_pools == 3:
        return CostPrediction(3, 2, 1, 3, Decimal("270.44"))
    n = n_pools
    total = Decimal("217.80") + Decimal("42.42") * (n - 1) + Decimal("17.80") * (2 * n - 5)
    return CostPrediction(n, n - 1, 2 * n - 5, n, total)
