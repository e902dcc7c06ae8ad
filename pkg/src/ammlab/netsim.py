"""Miner-network simulator: stale block rate versus bandwidth.

Top-10 miners mine as a hashrate-weighted Poisson race and exchange blocks
over direct point-to-point links.  A block's delivery time is its transfer
time plus a latency sample; the sender's uplink is shared by all nine
recipients, so transfer time is (n_peers) * size / bandwidth.  A miner
that wins a block before receiving the current head forks the chain; the
stale rate is the share of produced blocks that end up off the final
best chain.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from heapq import heappop, heappush
from pathlib import Path

import numpy as np

from .errors import PreconditionError, SaturationError


@dataclass(frozen=True)
class NetSimConfig:
    name: str
    block_interval_min: float
    block_size_mean_kb: float
    block_size_std_kb: float
    latency_percentiles: tuple[tuple[float, float], ...]  # (percentile, ms)
    hashrate_shares: tuple[float, ...]
    bandwidth_mbit: float
    seed: int = 20210421
    n_blocks: int = 10_000
    batches: int = 10

    def __post_init__(self) -> None:
        if self.bandwidth_mbit <= 0:
            raise PreconditionError("bandwidth must be positive")
        if self.block_interval_min <= 0:
            raise PreconditionError("block interval must be positive")
        if not self.hashrate_shares:
            raise PreconditionError("need at least one miner")
        if sum(self.hashrate_shares) > 1.0 + 1e-9:
            raise PreconditionError("hashrate shares must sum to at most 1")
        pct = [p for p, _ in self.latency_percentiles]
        if pct != sorted(pct) or len(pct) < 2:
            raise PreconditionError("latency percentiles must be monotone")

    def with_bandwidth(self, bandwidth_mbit: float) -> "NetSimConfig":
        return NetSimConfig(
            name=self.name,
            block_interval_min=self.block_interval_min,
            block_size_mean_kb=self.block_size_mean_kb,
            block_size_std_kb=self.block_size_std_kb,
            latency_percentiles=self.latency_percentiles,
            hashrate_shares=self.hashrate_shares,
            bandwidth_mbit=bandwidth_mbit,
            seed=self.seed,
            n_blocks=self.n_blocks,
            batches=self.batches,
        )

    @classmethod
    def from_json_obj(cls, obj: dict, **overrides) -> "NetSimConfig":
        data = {
            "name": obj["name"],
            "block_interval_min": float(obj["block_interval_min"]),
            "block_size_mean_kb": float(obj["block_size_mean_kb"]),
            "block_size_std_kb": float(obj["block_size_std_kb"]),
            "latency_percentiles": tuple(
                (float(p), float(ms)) for p, ms in obj["latency_percentiles"]
            ),
            "hashrate_shares": tuple(float(s) for s in obj["hashrate_shares"]),
            "bandwidth_mbit": float(obj.get("bandwidth_mbit", 70.0)),
        }
        data.update(overrides)
        return cls(**data)

    @classmethod
    def from_file(cls, path: str | Path, **overrides) -> "NetSimConfig":
        return cls.from_json_obj(json.loads(Path(path).read_text()), **overrides)


def sample_latency_ms(rng: random.Random, percentiles) -> float:
    """Inverse-CDF draw with linear interpolation between percentile points."""
    u = rng.random() * 100.0
    pts = percentiles
    if u <= pts[0][0]:
        return pts[0][1]
    for (p0, v0), (p1, v1) in zip(pts, pts[1:]):
        if u <= p1:
            if p1 == p0:
                return v1
            return v0 + (v1 - v0) * (u - p0) / (p1 - p0)
    return pts[-1][1]


@dataclass
class SimResult:
    stale_rate: float
    stderr: float
    stale_blocks: int
    total_blocks: int
    batch_rates: list[float] = field(default_factory=list)


@dataclass(frozen=True)
class _Block:
    block_id: int
    height: int
    parent: int


def _run_batch(config: NetSimConfig, seed: int, n_blocks: int) -> tuple[int, int]:
    """One independent race; returns (stale, produced)."""
    rng = random.Random(seed)
    shares = config.hashrate_shares
    total_share = sum(shares)
    weights = [s / total_share for s in shares]
    n = len(shares)
    interval_s = config.block_interval_min * 60.0
    miners = list(range(n))

    genesis = _Block(0, 0, -1)
    blocks: dict[int, _Block] = {0: genesis}
    head: list[_Block] = [genesis] * n
    deliveries: list[tuple[float, int, int, int]] = []  # (time, seq, miner, block)
    seq = 0
    t = 0.0
    first_at_height: dict[int, int] = {0: 0}

    for produced in range(1, n_blocks + 1):
        t += rng.expovariate(1.0 / interval_s)
        while deliveries and deliveries[0][0] <= t:
            _, _, m, block_id = heappop(deliveries)
            block = blocks[block_id]
            if block.height > head[m].height:
                head[m] = block
        winner = rng.choices(miners, weights=weights)[0]
        parent = head[winner]
        block = _Block(produced, parent.height + 1, parent.block_id)
        blocks[produced] = block
        head[winner] = block
        first_at_height.setdefault(block.height, produced)
        size_kb = max(1.0, rng.gauss(config.block_size_mean_kb, config.block_size_std_kb))
        transfer_s = (n - 1) * size_kb * 8.0 / (config.bandwidth_mbit * 1000.0)
        for m in miners:
            if m == winner:
                continue
            latency_s = sample_latency_ms(rng, config.latency_percentiles) / 1000.0
            seq += 1
            heappush(deliveries, (t + transfer_s + latency_s, seq, m, block.block_id))

    best_height = max(b.height for b in blocks.values())
    tip = blocks[first_at_height[best_height]]
    on_chain = 0
    cursor: _Block | None = tip
    while cursor is not None and cursor.block_id != 0:
        on_chain += 1
        cursor = blocks.get(cursor.parent)
    return n_blocks - on_chain, n_blocks


def simulate(config: NetSimConfig) -> SimResult:
    """Stale rate with a batch-means standard error.

    The run splits into ``batches`` independent seeded races; the stale
    rate is the mean batch rate and stderr the batch-mean standard error.
    Deterministic for a given config and seed.
    """
    master = random.Random(config.seed)
    batch_seeds = [master.randrange(2**63) for _ in range(config.batches)]
    per_batch = max(1, config.n_blocks // config.batches)
    stale_total = 0
    produced_total = 0
    rates = []
    for bseed in batch_seeds:
        stale, produced = _run_batch(config, bseed, per_batch)
        stale_total += stale
        produced_total += produced
        rates.append(stale / produced)
    mean = sum(rates) / len(rates)
    if len(rates) > 1:
        var = sum((r - mean) ** 2 for r in rates) / (len(rates) - 1)
        stderr = (var / len(rates)) ** 0.5
    else:
        stderr = 0.0
    return SimResult(
        stale_rate=mean,
        stderr=stderr,
        stale_blocks=stale_total,
        total_blocks=produced_total,
        batch_rates=rates,
    )


@dataclass
class StaleRateCurve:
    points: list[tuple[float, float, float]]  # (bandwidth, stale_rate, stderr)
    coefficients: tuple[float, float, float]  # quadratic a2, a1, a0

    def to_json_obj(self) -> dict:
        return {
            "points": [
                {"bandwidth_mbit": b, "stale_rate": r, "stderr": e}
                for b, r, e in self.points
            ],
            "fit": {
                "quadratic": self.coefficients[0],
                "linear": self.coefficients[1],
                "intercept": self.coefficients[2],
            },
        }


def fit_quadratic(points: list[tuple[float, float]]) -> tuple[float, float, float]:
    """Degree-2 least squares; needs three distinct abscissae."""
    xs = [p[0] for p in points]
    if len(set(xs)) < 3:
        raise PreconditionError("quadratic fit needs at least 3 distinct bandwidths")
    coeffs = np.polyfit(np.array(xs, dtype=float), np.array([p[1] for p in points]), 2)
    return float(coeffs[0]), float(coeffs[1]), float(coeffs[2])


def sweep_and_fit(config: NetSimConfig, bandwidths: list[float]) -> StaleRateCurve:
    """simulate() per bandwidth (fresh derived seeds) plus a quadratic fit."""
    if len(set(bandwidths)) < 3:
        raise PreconditionError("sweep needs at least 3 distinct bandwidths")
    points = []
    for i, bw in enumerate(bandwidths):
        cfg = config.with_bandwidth(bw)
        cfg = NetSimConfig(**{**cfg.__dict__, "seed": config.seed + 1_000_003 * (i + 1)})
        result = simulate(cfg)
        points.append((bw, result.stale_rate, result.stderr))
    coeffs = fit_quadratic([(b, r) for b, r, _ in points])
    return StaleRateCurve(points=points, coefficients=coeffs)


def flooding_degradation(
    base_bandwidth_mbit: float,
    overhead_bytes: float,
    interval_s: float,
    amplification: float,
    floor_mbit: float = 0.0,
) -> float:
    """Effective bandwidth once flooded duplicates eat into the links.

    base - (overhead_bits / interval) * amplification, floored at
    ``floor_mbit``; a non-positive result raises SaturationError.
    """
    if base_bandwidth_mbit <= 0 or overhead_bytes <= 0 or interval_s <= 0:
        raise PreconditionError("flooding inputs must be positive")
    if amplification < 0:
        raise PreconditionError("amplification must be non-negative")
    loss_mbit = (overhead_bytes * 8.0 / 1e6 / interval_s) * amplification
    effective = base_bandwidth_mbit - loss_mbit
    if effective <= 0:
        raise SaturationError(
            f"flooding load {loss_mbit:.2f} Mbit/s saturates {base_bandwidth_mbit} Mbit/s"
        )
    return max(effective, floor_mbit)
