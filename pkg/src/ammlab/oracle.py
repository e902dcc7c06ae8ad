"""Brute-force verifiers for the closed forms.

These searches know nothing about the quadratics and derivative roots they
check: they walk integer grids over executed swaps and keep the best point.
Fixture generation freezes their answers (with seeds) into JSON so the
fast tests replay committed expectations.
"""

from __future__ import annotations

import json
import math
import random
from math import isqrt
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from ._kernels import (
    arb_best_on_grid,
    arb_profit,
    route2_best_on_grid,
    route2_out,
    quote_out,
)
from .amounts import FeeRate
from .errors import OracleError, PreconditionError
from .pool import Direction, PoolState, SwapAction, common_fee


@dataclass(frozen=True)
class SearchSpec:
    """Grid description: range, coarse step, refinement and objective."""

    lo: int
    hi: int
    coarse_step: int
    refine_passes: int = 0  # 0 means: as many as the step needs
    objective: str = "arb-profit"

    def __post_init__(self) -> None:
        if self.lo >= self.hi:
            raise PreconditionError("search range must satisfy lo < hi")
        if self.coarse_step <= 0:
            raise PreconditionError("coarse step must be positive")

    @property
    def passes(self) -> int:
        if self.refine_passes > 0:
            return self.refine_passes
        # step shrinks by 8x per pass; bit_length comfortably covers log8
        return self.coarse_step.bit_length() + 1


def _descend(evaluate, best_point: int, lo: int, hi: int, step: int, passes: int) -> tuple[int, int]:
    """Shrink the bracket around the best grid point down to unit step.

    Ends with a full unit-step sweep of a +-1024 window so flooring
    wiggles near the top cannot hide the integer maximum.
    """
    best_val = evaluate(best_point)
    while step > 1:
        if passes <= 0:
            raise OracleError("search spec too coarse to refine to unit step")
        passes -= 1
        step = max(1, step // 8)
        lo_b = max(lo, best_point - 8 * step)
        hi_b = min(hi, best_point + 8 * step)
        p = lo_b
        while p <= hi_b:
            v = evaluate(p)
            if v > best_val:
                best_val = v
                best_point = p
            p += step
    p = max(lo, best_point - 1024)
    hi_b = min(hi, best_point + 1024)
    while p <= hi_b:
        v = evaluate(p)
        if v > best_val:
            best_val = v
            best_point = p
        p += 1
    return best_point, best_val


def brute_arb(
    pool1: PoolState, pool2: PoolState, spec: SearchSpec | None = None
) -> tuple[int, int]:
    """Exhaustive-search argmax of the two-point round trip.

    Returns (input, profit) under exact integer execution; the profit can
    be non-positive for unprofitable pairs.

    The search is scale-free: a geometric probe ladder plus a coarse
    linear grid locate the hump, nested grids narrow it, and a final
    unit-step sweep sized from the profit curvature (wide enough to span
    the whole flooring-noise plateau) pins the exact integer maximum.
    """
    fee = common_fee((pool1, pool2))
    pool1.require_active()
    pool2.require_active()
    fn, fd = fee.numerator, fee.denominator
    x1, y1, x2, y2 = pool1.x, pool1.y, pool2.x, pool2.y
    if spec is None:
        hi = max(pool2.x, 2)
        spec = SearchSpec(lo=1, hi=hi, coarse_step=max(1, (hi - 1) // 4096))
    lo, hi = max(1, spec.lo), spec.hi

    def evaluate(d: int) -> int:
        return arb_profit(x1, y1, x2, y2, fn, fd, d)

    # Geometric probes catch optima far below the linear grid's resolution.
    best_dx, best_val = lo, evaluate(lo)
    probe = lo * 2
    while probe <= hi:
        v = evaluate(probe)
        if v > best_val:
            best_dx, best_val = probe, v
        probe *= 2
    grid_dx, grid_val = arb_best_on_grid(x1, y1, x2, y2, fn, fd, lo, hi, spec.coarse_step)
    if grid_val > best_val:
        best_dx, best_val = grid_dx, grid_val

    # The real profit loses ~d^2/(2*w1) at distance d from its peak, so
    # integer flooring noise (a couple of units) spreads candidates across
    # a plateau of half-width ~4*sqrt(w1); the final sweep must cover it.
    w1 = isqrt(x1 * x2 * y1 * y2) // (2 * (y1 + y2)) if y1 + y2 else 1
    noise_span = 4 * isqrt(max(w1, 1)) + 4096

    # Nested grids: brackets of x4 both ways cover either probe-ladder or
    # linear-grid placement error, then halve gently (noise can displace
    # the per-pass best, so shrinking must stay far slower than the
    # displacement bound) until a unit sweep of the bracket is affordable.
    bracket_lo = max(lo, min(best_dx // 4, best_dx - 2 * spec.coarse_step))
    bracket_hi = min(hi, max(best_dx * 4, best_dx + 2 * spec.coarse_step))
    width = bracket_hi - bracket_lo
    passes = spec.passes
    while width > 8 * noise_span:
        if passes <= 0:
            raise OracleError("search spec too coarse to refine to unit step")
        passes -= 1
        step = max(1, width // 4096)
        d, v = arb_best_on_grid(x1, y1, x2, y2, fn, fd, bracket_lo, bracket_hi, step)
        if v > best_val:
            best_dx, best_val = d, v
        half = width // 4
        bracket_lo = max(lo, best_dx - half)
        bracket_hi = min(hi, best_dx + half)
        width = bracket_hi - bracket_lo

    sweep_lo = max(lo, min(bracket_lo, best_dx - noise_span))
    sweep_hi = min(hi, max(bracket_hi, best_dx + noise_span))
    d, v = arb_best_on_grid(x1, y1, x2, y2, fn, fd, sweep_lo, sweep_hi, 1)
    if v > best_val:
        best_dx, best_val = d, v
    return best_dx, best_val


def unimodal_scan(pool1: PoolState, pool2: PoolState, samples: int = 1000) -> bool:
    """True when the sampled profit curve has a single rise-then-fall shape."""
    fee = common_fee((pool1, pool2))
    fn, fd = fee.numerator, fee.denominator
    hi = max(pool2.x, samples + 1)
    step = max(1, hi // samples)
    values = [
        arb_profit(pool1.x, pool1.y, pool2.x, pool2.y, fn, fd, d)
        for d in range(1, hi + 1, step)
    ]
    falling = False
    for prev, cur in zip(values, values[1:]):
        if cur < prev:
            falling = True
        elif cur > prev and falling:
            return False
    return True


def brute_route(
    pools: Sequence[PoolState],
    direction: Direction,
    total_in: int,
    spec: SearchSpec | None = None,
) -> tuple[tuple[int, ...], int]:
    """Exhaustive split search over at most three pools.

    Returns (per-pool inputs in the given pool order, combined output).
    """
    if not 1 <= len(pools) <= 3:
        raise PreconditionError("brute route handles 1 to 3 pools")
    if total_in <= 0:
        raise PreconditionError("total_in must be positive")
    fee = common_fee(pools)
    fn, fd = fee.numerator, fee.denominator
    for p in pools:
        p.require_active()

    if len(pools) == 1:
        r_in, r_out = pools[0].reserves(direction)
        return (total_in,), quote_out(r_in, r_out, total_in, fn, fd)

    reserves = [p.reserves(direction) for p in pools]

    if len(pools) == 2:
        (xa, ya), (xb, yb) = reserves
        if spec is None:
            spec = SearchSpec(lo=0, hi=total_in, coarse_step=max(1, total_in // 10_000))
        best_s, _ = route2_best_on_grid(
            xa, ya, xb, yb, fn, fd, spec.lo, spec.hi, spec.coarse_step, total_in
        )

        def evaluate(s: int) -> int:
            return route2_out(xa, ya, xb, yb, fn, fd, s, total_in)

        best_s, best_out = _descend(
            evaluate, best_s, 0, total_in, spec.coarse_step, spec.passes
        )
        return (best_s, total_in - best_s), best_out

    (xa, ya), (xb, yb), (xc, yc) = reserves
    if spec is None:
        spec = SearchSpec(lo=0, hi=total_in, coarse_step=max(1, total_in // 150))

    def eval3(s1: int, s2: int) -> int:
        out = 0
        if s1 > 0:
            out += quote_out(xa, ya, s1, fn, fd)
        if s2 > 0:
            out += quote_out(xb, yb, s2, fn, fd)
        s3 = total_in - s1 - s2
        if s3 > 0:
            out += quote_out(xc, yc, s3, fn, fd)
        return out

    step = spec.coarse_step
    best = (0, 0)
    best_out = eval3(0, 0)
    s1 = 0
    while s1 <= total_in:
        s2 = 0
        limit = total_in - s1
        while s2 <= limit:
            v = eval3(s1, s2)
            if v > best_out:
                best_out = v
                best = (s1, s2)
            s2 += step
        s1 += step

    passes = spec.passes
    while step > 1:
        if passes <= 0:
            raise OracleError("search spec too coarse to refine to unit step")
        passes -= 1
        step = max(1, step // 8)
        improved = True
        while improved:
            improved = False
            s1, s2 = best
            for d1, d2 in (
                (step, 0), (-step, 0), (0, step), (0, -step),
                (step, -step), (-step, step), (step, step), (-step, -step),
            ):
                n1, n2 = s1 + d1, s2 + d2
                if n1 < 0 or n2 < 0 or n1 + n2 > total_in:
                    continue
                v = eval3(n1, n2)
                if v > best_out:
                    best_out = v
                    best = (n1, n2)
                    improved = True
    s1, s2 = best
    return (s1, s2, total_in - s1 - s2), best_out


def rational_swap(pool: PoolState, action: SwapAction) -> Fraction:
    """Exact rational output of one fee-bearing swap (no flooring)."""
    pool.require_active()
    res_in, res_out = pool.reserves(action.direction)
    fn, fd = pool.fee.numerator, pool.fee.denominator
    scaled = action.amount_in * fn
    return Fraction(scaled * res_out, res_in * fd + scaled)


# ---------------------------------------------------------------------------
# Random instance generation and fixture files.

def log_uniform_int(rng: random.Random, lo: int, hi: int) -> int:
    return min(hi, max(lo, round(math.exp(rng.uniform(math.log(lo), math.log(hi))))))


def random_profitable_pair(
    rng: random.Random,
    lo: int = 10**4,
    hi: int = 10**12,
    fee: FeeRate = FeeRate(),
) -> tuple[PoolState, PoolState]:
    """Seeded pool pair where buying Y on pool 1 and selling on pool 2 pays."""
    band = fee.band
    while True:
        x1 = log_uniform_int(rng, lo, hi)
        y1 = log_uniform_int(rng, lo, hi)
        x2 = log_uniform_int(rng, lo, hi)
        margin = rng.uniform(0.30, 0.90)
        y2 = int(Fraction(y1, x1) * band * x2 * Fraction(margin).limit_denominator(10**6))
        if not lo <= y2 <= hi:
            continue
        pool1 = PoolState("m1", x1, y1, fee)
        pool2 = PoolState("m2", x2, y2, fee)
        from .arbitrage import is_profitable  # local import avoids a cycle

        if is_profitable(pool1, pool2):
            return pool1, pool2


def random_route_instance(
    rng: random.Random,
    n_pools: int,
    lo: int = 10**5,
    hi: int = 10**10,
    fee: FeeRate = FeeRate(),
) -> tuple[list[PoolState], int]:
    """Seeded pool set with real price gaps plus a swap size to split."""
    base_x = log_uniform_int(rng, lo, hi)
    base_y = log_uniform_int(rng, lo, hi)
    pools = [PoolState("p0", base_x, base_y, fee)]
    for i in range(1, n_pools):
        gap = rng.uniform(1.05, 3.0)
        x = log_uniform_int(rng, lo, hi)
        y = int(Fraction(base_y, base_x) / Fraction(gap).limit_denominator(10**6) * x)
        y = min(hi, max(lo, y))
        pools.append(PoolState(f"p{i}", x, y, fee))
    depth = sum(p.reserves(Direction.X_TO_Y)[0] for p in pools)
    total_in = max(10, int(depth * rng.uniform(0.01, 0.5)))
    return pools, total_in


def generate_arb_fixtures(count: int, seed: int, lo: int = 10**4, hi: int = 10**12) -> dict:
    rng = random.Random(seed)
    cases = []
    for _ in range(count):
        pool1, pool2 = random_profitable_pair(rng, lo, hi)
        dx, profit = brute_arb(pool1, pool2)
        cases.append(
            {
                "inputs": {
                    "x1": str(pool1.x),
                    "y1": str(pool1.y),
                    "x2": str(pool2.x),
                    "y2": str(pool2.y),
                },
                "oracle_output": {"dx": str(dx), "profit": str(profit)},
            }
        )
    return {
        "kind": "arb",
        "seed": seed,
        "spec": {"lo": lo, "hi": hi, "coarse": "range/1000, descend to 1"},
        "cases": cases,
    }


def generate_route_fixtures(
    count: int, n_pools: int, seed: int, lo: int = 10**5, hi: int = 10**10
) -> dict:
    rng = random.Random(seed)
    cases = []
    for _ in range(count):
        pools, total_in = random_route_instance(rng, n_pools, lo, hi)
        splits, out = brute_route(pools, Direction.X_TO_Y, total_in)
        cases.append(
            {
                "inputs": {
                    "pools": [p.to_json_obj() for p in pools],
                    "total_in": str(total_in),
                },
                "oracle_output": {
                    "splits": [str(s) for s in splits],
                    "out": str(out),
                },
            }
        )
    return {
        "kind": f"route{n_pools}",
        "seed": seed,
        "spec": {"lo": lo, "hi": hi, "coarse": "total/10^4 (2 pools) or total/150 (3)"},
        "cases": cases,
    }


def write_fixtures(fixtures: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(fixtures, indent=1, sort_keys=True) + "\n")


def load_fixtures(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())
