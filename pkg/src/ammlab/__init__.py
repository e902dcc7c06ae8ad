"""ammlab: a deterministic laboratory for constant-product exchange design.

Exact-integer pool math, optimal trade routing, closed-form two-point
arbitrage with brute-force oracles, swap-stream replay, MEV-overhead trace
forensics, and a miner-network propagation simulator.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND
from .amounts import AssetAmount, FeeRate, U128_MAX, ensure_amount
from .pool import Direction, PoolState, SwapAction, apply_swap, marginal_price, quote

__all__ = [
    "AssetAmount",
    "BACKEND",
    "Direction",
    "FeeRate",
    "PoolState",
    "SwapAction",
    "U128_MAX",
    "apply_swap",
    "ensure_amount",
    "marginal_price",
    "quote",
]
