"""Constant-product pool state machine.

A pool holds integer reserves (x, y) of a two-asset market and quotes
fee-bearing swaps with floor division, mirroring production exchanges.
All operations are pure: they return new states and never mutate.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable

from ._kernels import quote_out
from .amounts import U128_MAX, AssetAmount, FeeRate, ensure_amount
from .errors import (
    AmountOverflowError,
    InvalidPoolError,
    MixedFeeError,
    PreconditionError,
    SlippageError,
)


class Direction(enum.Enum):
    """Swap direction relative to the market's (X, Y) asset order."""

    X_TO_Y = "x2y"
    Y_TO_X = "y2x"

    @property
    def reverse(self) -> "Direction":
        return Direction.Y_TO_X if self is Direction.X_TO_Y else Direction.X_TO_Y

    @classmethod
    def parse(cls, text: str) -> "Direction":
        for member in cls:
            if text in (member.value, member.name):
                return member
        raise PreconditionError(f"unknown direction {text!r}")


@dataclass(frozen=True)
class PoolState:
    """Reserves and fee of one market.  Immutable value object."""

    market_id: str
    x: AssetAmount
    y: AssetAmount
    fee: FeeRate = FeeRate()

    def __post_init__(self) -> None:
        ensure_amount(self.x, "reserve x")
        ensure_amount(self.y, "reserve y")

    @property
    def active(self) -> bool:
        return self.x > 0 and self.y > 0

    def require_active(self) -> None:
        if not self.active:
            raise InvalidPoolError(f"pool {self.market_id} has a zero reserve")

    def reserves(self, direction: Direction) -> tuple[int, int]:
        """(reserve_in, reserve_out) for the given swap direction."""
        if direction is Direction.X_TO_Y:
            return self.x, self.y
        return self.y, self.x

    def with_reserves(self, direction: Direction, res_in: int, res_out: int) -> "PoolState":
        if direction is Direction.X_TO_Y:
            return replace(self, x=res_in, y=res_out)
        return replace(self, x=res_out, y=res_in)

    def mirrored(self) -> "PoolState":
        """Same market with the asset axes swapped (x<->y)."""
        return replace(self, x=self.y, y=self.x)

    def to_json_obj(self) -> dict:
        return {
            "market_id": self.market_id,
            "x": str(self.x),
            "y": str(self.y),
            "fee_num": self.fee.numerator,
            "fee_den": self.fee.denominator,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True)

    @classmethod
    def from_json_obj(cls, obj: dict) -> "PoolState":
        return cls(
            market_id=str(obj["market_id"]),
            x=int(obj["x"]),
            y=int(obj["y"]),
            fee=FeeRate(int(obj.get("fee_num", 997)), int(obj.get("fee_den", 1000))),
        )

    @classmethod
    def from_json(cls, text: str) -> "PoolState":
        return cls.from_json_obj(json.loads(text))


@dataclass(frozen=True)
class SwapAction:
    """One directed swap request against a single market.

    min_amount_out defaults to 0: no slippage guard, the taker accepts
    whatever the pool pays out.
    """

    market_id: str
    direction: Direction
    amount_in: AssetAmount
    min_amount_out: AssetAmount = 0

    def __post_init__(self) -> None:
        ensure_amount(self.amount_in, "amount_in")
        ensure_amount(self.min_amount_out, "min_amount_out")
        if self.amount_in <= 0:
            raise PreconditionError("amount_in must be positive")


def quote(pool: PoolState, direction: Direction, amount_in: int) -> int:
    """Output of a fee-bearing swap; pure, pool unchanged.

    Floor of amount_in*fee_num*reserve_out / (reserve_in*fee_den +
    amount_in*fee_num).  Raises if the pool is inactive, the input is not
    positive, or the guarded denominator would overflow 128 bits.
    """
    pool.require_active()
    ensure_amount(amount_in, "amount_in")
    if amount_in <= 0:
        raise PreconditionError("amount_in must be positive")
    res_in, res_out = pool.reserves(direction)
    fee = pool.fee
    if res_in * fee.denominator + amount_in * fee.numerator > U128_MAX:
        raise AmountOverflowError(
            f"swap guard overflows 128 bits on pool {pool.market_id}"
        )
    return quote_out(res_in, res_out, amount_in, fee.numerator, fee.denominator)


def apply_swap(pool: PoolState, action: SwapAction) -> tuple[PoolState, int]:
    """Execute a swap, returning (new_pool, amount_out).

    Reverts (raises SlippageError, pool untouched) when the quote falls
    short of action.min_amount_out.  The full input joins the reserves, so
    x*y never decreases.
    """
    if action.market_id != pool.market_id:
        raise PreconditionError(
            f"action for market {action.market_id!r} applied to pool {pool.market_id!r}"
        )
    amount_out = quote(pool, action.direction, action.amount_in)
    if amount_out < action.min_amount_out:
        raise SlippageError(
            f"quote {amount_out} below min_amount_out {action.min_amount_out}"
        )
    res_in, res_out = pool.reserves(action.direction)
    new_in = ensure_amount(res_in + action.amount_in, "reserve after swap")
    new_pool = pool.with_reserves(action.direction, new_in, res_out - amount_out)
    return new_pool, amount_out


def apply_swap_with_out(pool: PoolState, direction: Direction, amount_in: int, amount_out: int) -> PoolState:
    """Apply a swap that withdraws a caller-specified output.

    The output must not exceed the pool's quote for the input; withdrawing
    less than the maximum is allowed (the taker leaves value in the pool).
    """
    ensure_amount(amount_out, "amount_out")
    max_out = quote(pool, direction, amount_in) if amount_in > 0 else 0
    if amount_in == 0:
        if amount_out != 0:
            raise SlippageError("cannot withdraw output for a zero input")
        return pool
    if amount_out > max_out:
        raise SlippageError(f"requested output {amount_out} exceeds quote {max_out}")
    res_in, res_out = pool.reserves(direction)
    new_in = ensure_amount(res_in + amount_in, "reserve after swap")
    return pool.with_reserves(direction, new_in, res_out - amount_out)


def quote_in(pool: PoolState, direction: Direction, amount_out: int) -> int:
    """Smallest input whose quote reaches amount_out (inverse quote)."""
    pool.require_active()
    ensure_amount(amount_out, "amount_out")
    res_in, res_out = pool.reserves(direction)
    if amount_out <= 0:
        raise PreconditionError("amount_out must be positive")
    if amount_out >= res_out:
        raise PreconditionError(
            f"amount_out {amount_out} not payable from reserve {res_out}"
        )
    fee = pool.fee
    needed = (res_in * fee.denominator * amount_out) // ((res_out - amount_out) * fee.numerator) + 1
    return needed


def marginal_price(pool: PoolState, direction: Direction = Direction.X_TO_Y) -> Fraction:
    """Exact instantaneous exchange rate reserve_out/reserve_in (no fee)."""
    pool.require_active()
    res_in, res_out = pool.reserves(direction)
    return Fraction(res_out, res_in)


def common_fee(pools: Iterable[PoolState]) -> FeeRate:
    """Shared fee of a pool set; mixed fees are rejected."""
    fee = None
    for pool in pools:
        if fee is None:
            fee = pool.fee
        elif pool.fee != fee:
            raise MixedFeeError(
                f"pool {pool.market_id} has fee {pool.fee.numerator}/{pool.fee.denominator}, "
                f"expected {fee.numerator}/{fee.denominator}"
            )
    if fee is None:
        raise PreconditionError("need at least one pool")
    return fee


def synchronized(a: PoolState, b: PoolState, direction: Direction = Direction.X_TO_Y) -> bool:
    """True when the two marginal prices sit within one round-trip fee band.

    Prices p_hi >= p_lo count as synchronized when p_lo > gamma**2 * p_hi:
    no fee-bearing round trip between the pools can profit.
    """
    fee = common_fee((a, b))
    pa = marginal_price(a, direction)
    pb = marginal_price(b, direction)
    hi, lo = (pa, pb) if pa >= pb else (pb, pa)
    return lo > fee.band * hi
