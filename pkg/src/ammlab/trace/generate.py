"""Synthetic trace corpora with planted ground truth.

Each opportunity window plants a victim swap that desynchronizes two
markets, a successful arbitrage that takes the gap, a few reverted
duplicates mined up to five blocks later (block-space overhead), and a
burst of never-mined same-nonce duplicates sighted on the network layer
(network overhead).  Windows alternate between a cross-block layout
(classified as front-running: the duplicate replays at a block head) and
a same-block layout (classified as back-running: the duplicate replays
right behind the victim it undercuts on gas).

A sidecar answer key records every planted classification so analyzer
recall and false positives are measurable exactly.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

from ..arbitrage import optimal_input_unchecked
from ..pool import Direction, PoolState, SwapAction, apply_swap, quote

GAS_DECOY = 60
GAS_VICTIM_FRONT = 50
GAS_ARB_FRONT = 100
GAS_DUP_FRONT = 200
GAS_VICTIM_BACK = 80
GAS_ARB_BACK = 40
GAS_DUP_BACK = 30


@dataclass
class GeneratorConfig:
    n_opportunities: int = 10
    blockspace_per_opportunity: int = 3
    network_per_opportunity: int = 5
    seed: int = 20210421
    block_interval_ms: int = 13_000
    warmup_blocks: int = 6
    blocks_per_window: int = 8


@dataclass
class _Corpus:
    records: list[dict] = field(default_factory=list)
    key_arbs: list[str] = field(default_factory=list)
    key_blockspace: list[dict] = field(default_factory=list)
    key_network: list[dict] = field(default_factory=list)
    tx_seq: int = 0
    index_by_height: dict[int, int] = field(default_factory=dict)

    def next_tx_id(self, prefix: str) -> str:
        self.tx_seq += 1
        return f"{prefix}-{self.tx_seq:05d}"

    def next_index(self, height: int) -> int:
        idx = self.index_by_height.get(height, 0)
        self.index_by_height[height] = idx + 1
        return idx

    def emit(self, obj: dict) -> None:
        self.records.append(obj)


def _emit_tx(
    corpus: _Corpus,
    tx_id: str,
    height: int | None,
    gas: int,
    sender: str,
    nonce: int,
    status: str = "ok",
) -> None:
    corpus.emit(
        {
            "kind": "tx",
            "id": tx_id,
            "block_height": height,
            "index": None if height is None else corpus.next_index(height),
            "gas_price": gas,
            "sender": sender,
            "nonce": nonce,
            "size_bytes": 180 + len(tx_id),
            "status": status,
        }
    )


def _emit_events(corpus: _Corpus, tx_id: str, legs: list[tuple[str, Direction, int, int]]) -> None:
    for market_id, direction, amount_in, amount_out in legs:
        corpus.emit(
            {
                "kind": "swap_event",
                "tx_id": tx_id,
                "market_id": market_id,
                "direction": direction.value,
                "amount_in": str(amount_in),
                "amount_out": str(amount_out),
            }
        )


def _emit_sighting(corpus: _Corpus, tx_id: str, seen_ms: int) -> None:
    corpus.emit({"kind": "p2p_sighting", "tx_id": tx_id, "first_seen_ms": seen_ms})


def _swap(pools: dict[str, PoolState], market: str, direction: Direction, amount: int) -> int:
    new_pool, out = apply_swap(pools[market], SwapAction(market, direction, amount))
    pools[market] = new_pool
    return out


def _plant_decoy_swap(
    corpus: _Corpus, pools: dict[str, PoolState], rng: random.Random, height: int, market: str
) -> None:
    tx_id = corpus.next_tx_id("decoy")
    amount = rng.randrange(10_000, 100_000)
    direction = rng.choice([Direction.X_TO_Y, Direction.Y_TO_X])
    out = _swap(pools, market, direction, amount)
    _emit_tx(corpus, tx_id, height, GAS_DECOY, f"user-{tx_id}", rng.randrange(1000))
    _emit_events(corpus, tx_id, [(market, direction, amount, out)])


def _plant_loss_roundtrip(
    corpus: _Corpus, pools: dict[str, PoolState], rng: random.Random, height: int
) -> None:
    """Atomic round trip across two synchronized markets: loses, never flags."""
    tx_id = corpus.next_tx_id("loss")
    amount = rng.randrange(50_000, 150_000)
    out1 = _swap(pools, "m-flat-a", Direction.X_TO_Y, amount)
    out2 = _swap(pools, "m-flat-b", Direction.Y_TO_X, out1)
    _emit_tx(corpus, tx_id, height, GAS_DECOY, f"user-{tx_id}", rng.randrange(1000))
    _emit_events(
        corpus,
        tx_id,
        [
            ("m-flat-a", Direction.X_TO_Y, amount, out1),
            ("m-flat-b", Direction.Y_TO_X, out1, out2),
        ],
    )


def _plant_split_roundtrip(
    corpus: _Corpus, pools: dict[str, PoolState], rng: random.Random, height: int
) -> None:
    """Profitable round trip split over two txs: atomicity test never fires."""
    amount = rng.randrange(100_000, 200_000)
    out1 = _swap(pools, "m-split-a", Direction.X_TO_Y, amount)
    tx1 = corpus.next_tx_id("split")
    _emit_tx(corpus, tx1, height, GAS_DECOY, "splitter", 1)
    _emit_events(corpus, tx1, [("m-split-a", Direction.X_TO_Y, amount, out1)])
    out2 = _swap(pools, "m-split-b", Direction.Y_TO_X, out1)
    tx2 = corpus.next_tx_id("split")
    _emit_tx(corpus, tx2, height, GAS_DECOY, "splitter", 2)
    _emit_events(corpus, tx2, [("m-split-b", Direction.Y_TO_X, out1, out2)])


def _arb_legs_at(
    pools: dict[str, PoolState], buy: str, sell: str
) -> tuple[list[tuple[str, Direction, int, int]], int]:
    """Optimally-sized round trip legs against the live states."""
    amount, _ = optimal_input_unchecked(pools[buy], pools[sell])
    amount = max(amount, 1)
    out1 = quote(pools[buy], Direction.X_TO_Y, amount)
    out2 = quote(pools[sell], Direction.Y_TO_X, out1)
    legs = [
        (buy, Direction.X_TO_Y, amount, out1),
        (sell, Direction.Y_TO_X, out1, out2),
    ]
    return legs, out2 - amount


def _simulate_failed_legs(
    pools: dict[str, PoolState], intents: list[tuple[str, Direction, int, int]]
) -> list[tuple[str, Direction, int, int]]:
    """What a duplicate would record if it executed now (it reverts, so
    these amounts are its intent trail, not state changes)."""
    working = dict(pools)
    legs = []
    chained: int | None = None
    for market, direction, amount_in, _ in intents:
        if chained is not None:
            amount_in = chained
        out = quote(working[market], direction, amount_in)
        new_pool, _ = apply_swap(working[market], SwapAction(market, direction, amount_in))
        working[market] = new_pool
        legs.append((market, direction, amount_in, out))
        chained = out
    return legs


def generate_corpus(cfg: GeneratorConfig) -> tuple[list[str], dict]:
    """Build (trace lines, answer key) with planted classifications."""
    rng = random.Random(cfg.seed)
    corpus = _Corpus()
    interval = cfg.block_interval_ms

    pools = {
        "m-uni": PoolState("m-uni", 10**9, 10**9),
        "m-sushi": PoolState("m-sushi", 10**9, 10**9),
        "m-decoy": PoolState("m-decoy", 5 * 10**8, 5 * 10**8),
        "m-flat-a": PoolState("m-flat-a", 10**9, 10**9),
        "m-flat-b": PoolState("m-flat-b", 10**9, 10**9),
        "m-split-a": PoolState("m-split-a", 10**8, 2 * 10**8),
        "m-split-b": PoolState("m-split-b", 10**8, 10**8),
    }
    for pool in pools.values():
        corpus.emit(dict(pool.to_json_obj(), kind="market"))

    total_blocks = cfg.warmup_blocks + cfg.n_opportunities * cfg.blocks_per_window + 2

    # Warmup: decoys and the split/loss negatives before any window opens.
    for h in range(cfg.warmup_blocks):
        _plant_decoy_swap(corpus, pools, rng, h, "m-decoy")
    _plant_split_roundtrip(corpus, pools, rng, 1)
    _plant_loss_roundtrip(corpus, pools, rng, 2)

    front_distances = [0, 1, 2, 3, 4]
    back_distances = [1, 2, 3, 4, 5]

    for i in range(cfg.n_opportunities):
        base = cfg.warmup_blocks + i * cfg.blocks_per_window + 1
        layout_front = i % 2 == 0
        victim_amount = rng.randrange(3 * 10**7, 8 * 10**7)

        if layout_front:
            victim_height, arb_height = base - 1, base
            gas_victim, gas_arb, gas_dup = (
                GAS_VICTIM_FRONT,
                GAS_ARB_FRONT,
                GAS_DUP_FRONT,
            )
            distances = [front_distances[(i + k) % 5] for k in range(cfg.blockspace_per_opportunity)]
            label = "front"
        else:
            victim_height = arb_height = base
            gas_victim, gas_arb, gas_dup = (
                GAS_VICTIM_BACK,
                GAS_ARB_BACK,
                GAS_DUP_BACK,
            )
            distances = [back_distances[(i + k) % 5] for k in range(cfg.blockspace_per_opportunity)]
            label = "back"

        # Victim desynchronizes m-uni below m-sushi.
        victim_id = corpus.next_tx_id("victim")
        victim_out = _swap(pools, "m-uni", Direction.X_TO_Y, victim_amount)
        _emit_tx(corpus, victim_id, victim_height, gas_victim, f"trader-{i}", i)
        _emit_events(
            corpus, victim_id, [("m-uni", Direction.X_TO_Y, victim_amount, victim_out)]
        )

        # The winning arbitrage extracts the gap.
        legs, profit = _arb_legs_at(pools, "m-sushi", "m-uni")
        assert profit > 0
        arb_id = corpus.next_tx_id("arb")
        intents = list(legs)
        for market, direction, amount_in, _ in legs:
            _swap(pools, market, direction, amount_in)
        _emit_tx(corpus, arb_id, arb_height, gas_arb, f"searcher-{i}", i)
        _emit_events(corpus, arb_id, legs)
        corpus.key_arbs.append(arb_id)

        # Mined duplicates: reverted, occupying block space.
        for d in distances:
            dup_id = corpus.next_tx_id("dup")
            dup_height = arb_height + d
            dup_legs = _simulate_failed_legs(pools, intents)
            _emit_tx(corpus, dup_id, dup_height, gas_dup, f"bot-{i}", 7, status="reverted")
            _emit_events(corpus, dup_id, dup_legs)
            corpus.key_blockspace.append(
                {"tx_id": dup_id, "label": label, "distance": d, "target": arb_id}
            )
            # Sighted only after the block: network heuristics must skip it.
            _emit_sighting(corpus, dup_id, (dup_height + 1) * interval + 500 + d)

        # Sightings around the opportunity lifetime.
        t_victim = victim_height * interval + 400
        t_arb = t_victim + 150
        t_block = (arb_height + 1) * interval  # arb's block first seen
        _emit_sighting(corpus, victim_id, t_victim)
        _emit_sighting(corpus, arb_id, t_arb)

        # Never-mined same-nonce flood: network overhead.
        for k in range(cfg.network_per_opportunity):
            flood_id = corpus.next_tx_id("flood")
            _emit_tx(corpus, flood_id, None, gas_dup, f"bot-{i}", 7)
            _emit_events(corpus, flood_id, intents)
            _emit_sighting(corpus, flood_id, t_arb + 37 * (k + 1))
            corpus.key_network.append({"tx_id": flood_id, "target": arb_id})

        # Exclusion decoys: same intents, sighted outside the window.
        early_id = corpus.next_tx_id("early")
        _emit_tx(corpus, early_id, None, gas_dup, f"bot-{i}", 8)
        _emit_events(corpus, early_id, intents)
        _emit_sighting(corpus, early_id, t_victim - 50)
        late_id = corpus.next_tx_id("late")
        _emit_tx(corpus, late_id, None, gas_dup, f"bot-{i}", 9)
        _emit_events(corpus, late_id, intents)
        _emit_sighting(corpus, late_id, t_block + 50)

        # Background noise in the quiet blocks of the window.
        for h in range(base + 1, base + cfg.blocks_per_window - 1):
            if rng.random() < 0.4:
                _plant_decoy_swap(corpus, pools, rng, h, "m-decoy")

    # Block records for every height.
    for h in range(total_blocks):
        corpus.emit(
            {
                "kind": "block",
                "height": h,
                "ts_ms": (h + 1) * interval,
                "size_bytes": rng.randrange(40_000, 50_000),
            }
        )

    lines = [json.dumps(rec, sort_keys=True) for rec in corpus.records]
    key = {
        "seed": cfg.seed,
        "successful_arbs": corpus.key_arbs,
        "blockspace": corpus.key_blockspace,
        "network": corpus.key_network,
        "counts": {
            "arbs": len(corpus.key_arbs),
            "blockspace": len(corpus.key_blockspace),
            "network": len(corpus.key_network),
        },
    }
    return lines, key
