"""Constant-product state machine: swap math, properties, overflow."""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ammlab.amounts import U128_MAX, FeeRate
from ammlab.errors import (
    AmountOverflowError,
    InvalidPoolError,
    MixedFeeError,
    PreconditionError,
    SlippageError,
)
from ammlab.pool import (
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

reserves = st.integers(min_value=10**3, max_value=10**12)
small_amounts = st.integers(min_value=1, max_value=10**9)


def test_quote_reference_value():
    pool = PoolState("m", 10**6, 10**6)
    assert quote(pool, Direction.X_TO_Y, 10**5) == 90_661


def test_quote_is_largest_invariant_preserving_output():
    # Exhaustive boundary check: 90_661 keeps the fee-scaled product,
    # 90_662 would break it.
    x = y = 10**6
    d = 10**5
    fee = FeeRate()
    assert (x * fee.denominator + d * fee.numerator) * (y - 90_661) >= x * y * fee.denominator
    assert (x * fee.denominator + d * fee.numerator) * (y - 90_662) < x * y * fee.denominator


def test_quote_zero_input_rejected():
    pool = PoolState("m", 10**6, 10**6)
    with pytest.raises(PreconditionError):
        quote(pool, Direction.X_TO_Y, 0)


def test_quote_zero_reserve_rejected():
    pool = PoolState("m", 0, 10**6)
    with pytest.raises(InvalidPoolError):
        quote(pool, Direction.X_TO_Y, 10)


@given(x=reserves, y=reserves, d=small_amounts)
def test_round_trip_always_loses(x, y, d):
    pool = PoolState("m", x, y)
    out = quote(pool, Direction.X_TO_Y, d)
    if out == 0:
        return
    back = quote(pool, Direction.Y_TO_X, out)
    assert back < d


def test_apply_swap_reference_state():
    pool = PoolState("m", 10**6, 10**6)
    new_pool, out = apply_swap(pool, SwapAction("m", Direction.X_TO_Y, 10**5, 90_661))
    assert out == 90_661
    assert (new_pool.x, new_pool.y) == (1_100_000, 909_339)


def test_apply_swap_slippage_reverts():
    pool = PoolState("m", 10**6, 10**6)
    with pytest.raises(SlippageError):
        apply_swap(pool, SwapAction("m", Direction.X_TO_Y, 10**5, 90_662))
    # frozen dataclass: the failed call cannot have touched the pool
    assert (pool.x, pool.y) == (10**6, 10**6)


@given(x=reserves, y=reserves, d=small_amounts)
def test_product_never_decreases(x, y, d):
    pool = PoolState("m", x, y)
    new_pool, _ = apply_swap(pool, SwapAction("m", Direction.X_TO_Y, d))
    assert new_pool.x * new_pool.y > x * y  # strict: fee stays in the pool


def test_path_independence_on_small_grids():
    """Splitting a swap in two costs at most one base unit on small grids."""
    for x in (1_000, 5_000, 25_000):
        for y in (1_000, 7_000, 50_000):
            pool = PoolState("m", x, y)
            total = x // 10
            for a in range(1, total, max(1, total // 7)):
                b = total - a
                if b <= 0:
                    continue
                p1, out1 = apply_swap(pool, SwapAction("m", Direction.X_TO_Y, a))
                p2, out2 = apply_swap(p1, SwapAction("m", Direction.X_TO_Y, b))
                _, out_batch = apply_swap(pool, SwapAction("m", Direction.X_TO_Y, total))
                assert 0 <= out_batch - (out1 + out2) <= 1
                assert p2.x == pool.x + total


@given(
    xa=reserves, ya=reserves, xb=reserves, yb=reserves,
    da=small_amounts, db=small_amounts,
)
@settings(max_examples=50)
def test_market_independence_commutes_exactly(xa, ya, xb, yb, da, db):
    a = PoolState("a", xa, ya)
    b = PoolState("b", xb, yb)
    act_a = SwapAction("a", Direction.X_TO_Y, da)
    act_b = SwapAction("b", Direction.Y_TO_X, db)
    a1, out_a1 = apply_swap(a, act_a)
    b1, out_b1 = apply_swap(b, act_b)
    b2, out_b2 = apply_swap(b, act_b)
    a2, out_a2 = apply_swap(a, act_a)
    assert (a1, b1, out_a1, out_b1) == (a2, b2, out_a2, out_b2)


def test_marginal_price_values():
    assert marginal_price(PoolState("m", 10**6, 2 * 10**6), Direction.X_TO_Y) == 2
    assert marginal_price(PoolState("m", 10**6, 10**6), Direction.X_TO_Y) == 1


def test_marginal_price_decreases_after_swap():
    pool = PoolState("m", 10**6, 10**6)
    last = marginal_price(pool, Direction.X_TO_Y)
    for d in (10**3, 10**4, 10**5):
        new_pool, _ = apply_swap(pool, SwapAction("m", Direction.X_TO_Y, d))
        price = marginal_price(new_pool, Direction.X_TO_Y)
        assert price < last
        pool, last = new_pool, price


def test_effective_rate_decreases_over_sweep():
    from fractions import Fraction

    pool = PoolState("m", 10**6, 10**6)
    rates = []
    d = 100
    while d < 10**6:
        rates.append(Fraction(quote(pool, Direction.X_TO_Y, d), d))
        d *= 4
    assert all(r1 > r2 for r1, r2 in zip(rates, rates[1:]))


def test_quote_in_is_exact_inverse():
    pool = PoolState("m", 10**6, 3 * 10**6)
    for want in (1, 100, 54_321, 1_000_000):
        needed = quote_in(pool, Direction.X_TO_Y, want)
        assert quote(pool, Direction.X_TO_Y, needed) >= want
        assert quote(pool, Direction.X_TO_Y, needed - 1) < want


def test_overflow_detected_loudly():
    with pytest.raises(AmountOverflowError):
        PoolState("m", U128_MAX + 1, 10)
    with pytest.raises(AmountOverflowError):
        PoolState("m", -1, 10)
    big = PoolState("m", U128_MAX - 5, 10**6)
    with pytest.raises(AmountOverflowError):
        quote(big, Direction.X_TO_Y, 10**6)  # guard product leaves 128 bits
    near = PoolState("m", U128_MAX - 5, 10**6)
    with pytest.raises(AmountOverflowError):
        apply_swap(near, SwapAction("m", Direction.X_TO_Y, 10))


def test_fee_rate_validation():
    with pytest.raises(PreconditionError):
        FeeRate(0, 1000)
    with pytest.raises(PreconditionError):
        FeeRate(1001, 1000)
    with pytest.raises(PreconditionError):
        FeeRate(1, 0)


def test_mixed_fees_rejected():
    a = PoolState("a", 10**6, 10**6)
    b = PoolState("b", 10**6, 10**6, FeeRate(995, 1000))
    with pytest.raises(MixedFeeError):
        common_fee((a, b))


def test_synchronized_band():
    a = PoolState("a", 10**6, 10**6)
    assert synchronized(a, PoolState("b", 10**6, 10**6))
    assert synchronized(a, PoolState("b", 10**6, 1_003_000))  # inside gamma^2
    assert not synchronized(a, PoolState("b", 10**6, 1_010_000))


def test_json_round_trip():
    pool = PoolState("market-1", 2**100, 17, FeeRate(995, 1000))
    text = pool.to_json()
    again = PoolState.from_json(text)
    assert again == pool
    obj = json.loads(text)
    assert obj["x"] == str(2**100)  # decimal strings survive JSON precision
