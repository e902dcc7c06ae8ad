"""Swap front door: plan a request, compress it, execute it, replay streams.

A request is first routed optimally; when the amount is too small to level
the pool prices, best-effort arbitrage legs are appended.  The resulting
leg sequence is compressed to at most one net swap per market, which by
market independence can execute in any order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Callable, Iterable, Sequence

from .amounts import ensure_amount
from .arbitrage import is_profitable, n_pool_arbitrage
from .errors import CompressionError, PreconditionError, SlippageError
from .pool import (
    Direction,
    PoolState,
    SwapAction,
    apply_swap,
    apply_swap_with_out,
    common_fee,
    quote,
)
from .routing import route_with_stats, total_sync_threshold

# Cost units relative to one average plain swap: each batched sub-swap,
# one arbitrage-parameter computation, one synchronize-volume computation,
# and a flat routing-parameter charge.
SWAP_UNIT = Decimal("0.5")
ARB_UNIT = Decimal("0.4242")
SYNC_UNIT = Decimal("0.1780")
ROUTE_UNIT = Decimal("0.1780")

SandwichCheck = Callable[["A2mmRequest", Sequence[PoolState]], bool]


@dataclass(frozen=True)
class A2mmRequest:
    direction: Direction
    amount_in: int
    min_amount_out: int = 0
    arbitrage_enabled: bool = True

    def __post_init__(self) -> None:
        ensure_amount(self.amount_in, "amount_in")
        ensure_amount(self.min_amount_out, "min_amount_out")
        if self.amount_in <= 0:
            raise PreconditionError("amount_in must be positive")

    @property
    def asset_in(self) -> str:
        return "x" if self.direction is Direction.X_TO_Y else "y"


@dataclass(frozen=True)
class Leg:
    """One planned swap with its simulated output and origin tag."""

    market_id: str
    direction: Direction
    amount_in: int
    amount_out: int
    provenance: str  # "route" or "arb"


@dataclass(frozen=True)
class NetSwap:
    """Per-market net of a leg sequence; withdraws a specific output."""

    market_id: str
    direction: Direction
    amount_in: int
    amount_out: int


@dataclass(frozen=True)
class CostUnits:
    swaps: int
    arb_computations: int
    sync_computations: int
    routed: bool

    @property
    def total(self) -> Decimal:
        units = SWAP_UNIT * self.swaps
        units += ARB_UNIT * self.arb_computations
        units += SYNC_UNIT * self.sync_computations
        if self.routed:
            units += ROUTE_UNIT
        return units


@dataclass(frozen=True)
class BatchPlan:
    leaf: str
    request: A2mmRequest
    legs: tuple[Leg, ...]
    net: tuple[NetSwap, ...]
    routing_out: int
    arb_profit: int
    profit_asset: str
    cost: CostUnits
    pre_fingerprint: tuple[tuple[str, int, int], ...]

    def to_json_obj(self) -> dict:
        return {
            "leaf": self.leaf,
            "routing_out": str(self.routing_out),
            "arb_profit": str(self.arb_profit),
            "profit_asset": self.profit_asset,
            "cost_units": str(self.cost.total),
            "counts": {
                "swaps": self.cost.swaps,
                "arb_computations": self.cost.arb_computations,
                "sync_computations": self.cost.sync_computations,
            },
            "net": [
                {
                    "market_id": n.market_id,
                    "direction": n.direction.value,
                    "amount_in": str(n.amount_in),
                    "amount_out": str(n.amount_out),
                }
                for n in self.net
            ],
            "legs": [
                {
                    "market_id": leg.market_id,
                    "direction": leg.direction.value,
                    "amount_in": str(leg.amount_in),
                    "amount_out": str(leg.amount_out),
                    "provenance": leg.provenance,
                }
                for leg in self.legs
            ],
        }


@dataclass(frozen=True)
class ExecutionReport:
    leaf: str
    amount_out: int
    arb_profit: int
    profit_asset: str
    legs_executed: int
    cost_units: Decimal
    pre_pools: tuple[PoolState, ...]
    post_pools: tuple[PoolState, ...]

    def to_json_obj(self) -> dict:
        return {
            "leaf": self.leaf,
            "amount_out": str(self.amount_out),
            "arb_profit": str(self.arb_profit),
            "profit_asset": self.profit_asset,
            "legs_executed": self.legs_executed,
            "cost_units": str(self.cost_units),
            "pre_pools": [p.to_json_obj() for p in self.pre_pools],
            "post_pools": [p.to_json_obj() for p in self.post_pools],
        }


def _fingerprint(pools: Iterable[PoolState]) -> tuple[tuple[str, int, int], ...]:
    return tuple(sorted((p.market_id, p.x, p.y) for p in pools))


def compress(legs: Sequence[Leg]) -> tuple[NetSwap, ...]:
    """Fold a leg sequence into at most one net swap per market.

    Same-direction legs net to (sum of inputs, sum of outputs), which
    withdraws exactly what the sequence did and reproduces its final state
    bit for bit.  Mixed-direction legs net to the signed flow totals.
    """
    flows: dict[str, list[int]] = {}
    order: list[str] = []
    for leg in legs:
        if leg.market_id not in flows:
            flows[leg.market_id] = [0, 0]  # pool's [x gain, y gain]
            order.append(leg.market_id)
        dx, dy = flows[leg.market_id]
        if leg.direction is Direction.X_TO_Y:
            dx += leg.amount_in
            dy -= leg.amount_out
        else:
            dy += leg.amount_in
            dx -= leg.amount_out
        flows[leg.market_id] = [dx, dy]
    net: list[NetSwap] = []
    for market_id in sorted(order):
        dx, dy = flows[market_id]
        if dx == 0 and dy == 0:
            continue
        if dx > 0 and dy <= 0:
            net.append(NetSwap(market_id, Direction.X_TO_Y, dx, -dy))
        elif dy > 0 and dx <= 0:
            net.append(NetSwap(market_id, Direction.Y_TO_X, dy, -dx))
        else:
            raise CompressionError(
                f"market {market_id} nets to a donation ({dx}, {dy}); "
                "no single swap represents it"
            )
    return tuple(net)


def plan(
    request: A2mmRequest,
    pools: Sequence[PoolState],
    sandwich_check: SandwichCheck | None = None,
) -> BatchPlan:
    """Decide and price the leg sequence for one incoming swap.

    Decision order: a configurable sandwich predicate (absent by default),
    then pure routing when the amount can level all prices, otherwise
    routing plus best-effort arbitrage on the routed state.
    """
    if not pools:
        raise PreconditionError("need at least one pool")
    common_fee(pools)
    by_id = {p.market_id: p for p in pools}
    if len(by_id) != len(pools):
        raise PreconditionError("duplicate market_id in pool set")

    legs: list[Leg] = []
    arb_profit = 0
    arb_comp = 0
    sync_comp = 0

    sandwichable = bool(sandwich_check(request, pools)) if sandwich_check else False
    threshold = total_sync_threshold(pools, request.direction)

    route_plan, route_sync_evals = route_with_stats(pools, request.direction, request.amount_in)
    sync_comp += route_sync_evals
    working = dict(by_id)
    for rleg in route_plan.legs:
        pool = working[rleg.market_id]
        new_pool, out = apply_swap(
            pool, SwapAction(rleg.market_id, request.direction, rleg.amount_in)
        )
        working[rleg.market_id] = new_pool
        legs.append(Leg(rleg.market_id, request.direction, rleg.amount_in, out, "route"))
    routing_out = sum(leg.amount_out for leg in legs)

    if sandwichable:
        leaf = "sandwich_risk"
    elif request.amount_in >= threshold:
        leaf = "route_sync"
    else:
        leaf = "route_only"
        if request.arbitrage_enabled:
            post_pools = [working[mid] for mid in sorted(working)]
            gap = any(
                is_profitable(a, b) or is_profitable(b, a)
                for i, a in enumerate(post_pools)
                for b in post_pools[i + 1 :]
            )
            if gap:
                result = n_pool_arbitrage(post_pools, profit_in=request.asset_in)
                # Best-effort only: a gap so small that flooring eats the
                # arbitrage is left alone.
                if result.stats.profit > 0:
                    for action, out in result.legs:
                        legs.append(
                            Leg(action.market_id, action.direction, action.amount_in, out, "arb")
                        )
                    arb_profit = result.stats.profit
                    arb_comp = result.stats.arb_computations
                    sync_comp += result.stats.sync_computations
                    leaf = "route_arb"

    net = compress(legs)
    cost = CostUnits(
        swaps=len(net),
        arb_computations=arb_comp,
        sync_computations=sync_comp,
        routed=bool(legs),
    )
    return BatchPlan(
        leaf=leaf,
        request=request,
        legs=tuple(legs),
        net=net,
        routing_out=routing_out,
        arb_profit=arb_profit,
        profit_asset=request.asset_in,
        cost=cost,
        pre_fingerprint=_fingerprint(pools),
    )


def apply_net(
    pools_by_id: dict[str, PoolState], net: Sequence[NetSwap]
) -> tuple[dict[str, PoolState], int]:
    """Apply net swaps to a pool map; returns (new map, swaps executed).

    A requested output may exceed the single-swap cap by one base unit of
    flooring slack and is then clamped; a larger gap raises (stale plan).
    Input pools are never mutated.
    """
    working = dict(pools_by_id)
    executed = 0
    for swap in net:
        if swap.market_id not in working:
            raise PreconditionError(f"plan references unknown market {swap.market_id}")
        if swap.amount_in == 0:
            continue
        pool = working[swap.market_id]
        cap = quote(pool, swap.direction, swap.amount_in)
        out = swap.amount_out
        if out > cap:
            if out - cap > 1:
                raise SlippageError(
                    f"net output {out} exceeds cap {cap} on {swap.market_id}"
                )
            out = cap
        working[swap.market_id] = apply_swap_with_out(pool, swap.direction, swap.amount_in, out)
        executed += 1
    return working, executed


def execute(
    batch: BatchPlan, pools: Sequence[PoolState]
) -> tuple[tuple[PoolState, ...], ExecutionReport]:
    """Apply a plan's net swaps in market order; all-or-nothing.

    Aborts atomically (inputs untouched) on a stale plan or a violated
    slippage guard.
    """
    by_id = {p.market_id: p for p in pools}
    if batch.pre_fingerprint != _fingerprint(pools):
        raise PreconditionError("plan was produced against different pool states")
    if batch.routing_out < batch.request.min_amount_out:
        raise SlippageError(
            f"plan output {batch.routing_out} below requested minimum "
            f"{batch.request.min_amount_out}"
        )
    working, executed = apply_net(by_id, batch.net)
    pre = tuple(sorted(pools, key=lambda p: p.market_id))
    post = tuple(working[mid] for mid in sorted(working))
    report = ExecutionReport(
        leaf=batch.leaf,
        amount_out=batch.routing_out,
        arb_profit=batch.arb_profit,
        profit_asset=batch.profit_asset,
        legs_executed=executed,
        cost_units=batch.cost.total,
        pre_pools=pre,
        post_pools=post,
    )
    return post, report


def plan_and_execute(
    request: A2mmRequest,
    pools: Sequence[PoolState],
    sandwich_check: SandwichCheck | None = None,
) -> tuple[tuple[PoolState, ...], ExecutionReport]:
    batch = plan(request, pools, sandwich_check)
    return execute(batch, pools)


@dataclass
class ReplayEntry:
    seq: int | None
    ok: bool
    mode: str
    amount_out: int = 0
    single_pool_out: int = 0
    routing_gain: int = 0
    arb_profit: int = 0
    leaf: str = ""
    cost_units: str = "0"
    error: str | None = None

    def to_json_obj(self) -> dict:
        obj: dict = {"seq": self.seq, "ok": self.ok, "mode": self.mode}
        if self.ok:
            obj.update(
                {
                    "amount_out": str(self.amount_out),
                    "single_pool_out": str(self.single_pool_out),
                    "routing_gain": str(self.routing_gain),
                    "arb_profit": str(self.arb_profit),
                    "leaf": self.leaf,
                    "cost_units": self.cost_units,
                }
            )
        else:
            obj["error"] = self.error
        return obj


def parse_stream_record(line: str) -> tuple[int | None, str, A2mmRequest]:
    obj = json.loads(line)
    seq = obj.get("seq")
    market_hint = obj["market_hint"]
    request = A2mmRequest(
        direction=Direction.parse(obj["direction"]),
        amount_in=int(obj["amount_in"]),
        min_amount_out=int(obj.get("min_amount_out", 0)),
        arbitrage_enabled=bool(obj.get("arbitrage_enabled", True)),
    )
    return seq, str(market_hint), request


def replay(
    lines: Iterable[str],
    pools: Sequence[PoolState],
    mode: str = "a2mm",
) -> tuple[list[ReplayEntry], tuple[PoolState, ...]]:
    """Run a swap stream in plain per-pool mode or through the planner.

    Each stream record keeps its original input amount; the planner mode
    also reports the counterfactual single-pool output so per-swap routing
    gain and arbitrage profit can be aggregated.
    """
    if mode not in ("amm", "a2mm"):
        raise PreconditionError("mode must be 'amm' or 'a2mm'")
    working = {p.market_id: p for p in pools}
    entries: list[ReplayEntry] = []
    for line in lines:
        text = line.strip()
        if not text:
            continue
        seq = None
        try:
            seq, hint, request = parse_stream_record(text)
            if hint not in working:
                raise PreconditionError(f"unknown market_hint {hint!r}")
            hinted = working[hint]
            single_out = quote(hinted, request.direction, request.amount_in)
            if mode == "amm":
                if single_out < request.min_amount_out:
                    raise SlippageError(
                        f"quote {single_out} below minimum {request.min_amount_out}"
                    )
                new_pool, out = apply_swap(
                    hinted,
                    SwapAction(hint, request.direction, request.amount_in, request.min_amount_out),
                )
                working[hint] = new_pool
                entries.append(
                    ReplayEntry(
                        seq=seq,
                        ok=True,
                        mode=mode,
                        amount_out=out,
                        single_pool_out=out,
                        routing_gain=0,
                        arb_profit=0,
                        leaf="single_pool",
                    )
                )
            else:
                pool_list = [working[mid] for mid in sorted(working)]
                post, report = plan_and_execute(request, pool_list)
                for p in post:
                    working[p.market_id] = p
                entries.append(
                    ReplayEntry(
                        seq=seq,
                        ok=True,
                        mode=mode,
                        amount_out=report.amount_out,
                        single_pool_out=single_out,
                        routing_gain=report.amount_out - single_out,
                        arb_profit=report.arb_profit,
                        leaf=report.leaf,
                        cost_units=str(report.cost_units),
                    )
                )
        except Exception as exc:  # noqa: BLE001 - stream keeps going per record
            entries.append(ReplayEntry(seq=seq, ok=False, mode=mode, error=str(exc)))
    final = tuple(working[mid] for mid in sorted(working))
    return entries, final
