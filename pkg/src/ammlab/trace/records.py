"""Trace file schema and deterministic chain-state reconstruction.

A trace is JSON lines.  Record kinds:

  {"kind": "market", "market_id", "x", "y", "fee_num", "fee_den"}
      preamble: initial pool state of a market (amounts decimal strings)
  {"kind": "block", "height", "ts_ms", "size_bytes"}
  {"kind": "tx", "id", "block_height", "index", "gas_price", "sender",
   "nonce", "size_bytes"?}
      block_height null for transactions that never mined
  {"kind": "swap_event", "tx_id", "market_id", "direction", "amount_in",
   "amount_out"}
      executed amounts for mined txs, intended amounts for unmined ones
  {"kind": "p2p_sighting", "tx_id", "first_seen_ms"}

Malformed lines are counted, never fatal.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from ..errors import TraceError
from ..pool import Direction, PoolState, SwapAction, apply_swap


@dataclass(frozen=True)
class BlockRecord:
    height: int
    ts_ms: int
    size_bytes: int


@dataclass(frozen=True)
class TxRecord:
    tx_id: str
    block_height: int | None
    index: int | None
    gas_price: int
    sender: str
    nonce: int
    size_bytes: int
    status: str = "ok"  # "reverted" txs occupy space but change no state

    @property
    def mined(self) -> bool:
        return self.block_height is not None

    @property
    def position(self) -> tuple[int, int]:
        if self.block_height is None or self.index is None:
            raise TraceError(f"tx {self.tx_id} is not mined")
        return (self.block_height, self.index)


@dataclass(frozen=True)
class SwapEvent:
    tx_id: str
    market_id: str
    direction: Direction
    amount_in: int
    amount_out: int


@dataclass
class TraceParseStats:
    lines: int = 0
    malformed: int = 0
    duplicates: int = 0


@dataclass
class Trace:
    markets: dict[str, PoolState] = field(default_factory=dict)
    blocks: dict[int, BlockRecord] = field(default_factory=dict)
    txs: dict[str, TxRecord] = field(default_factory=dict)
    events: dict[str, list[SwapEvent]] = field(default_factory=dict)
    sightings: dict[str, int] = field(default_factory=dict)
    stats: TraceParseStats = field(default_factory=TraceParseStats)

    def mined_txs(self) -> list[TxRecord]:
        """Mined transactions in (height, index) order."""
        return sorted(
            (t for t in self.txs.values() if t.mined),
            key=lambda t: t.position,
        )

    def txs_in_block(self, height: int) -> list[TxRecord]:
        return sorted(
            (t for t in self.txs.values() if t.block_height == height),
            key=lambda t: t.index or 0,
        )

    def events_of(self, tx_id: str) -> list[SwapEvent]:
        return self.events.get(tx_id, [])

    def heights(self) -> list[int]:
        return sorted(self.blocks)

    def first_seen(self, tx_id: str) -> int | None:
        return self.sightings.get(tx_id)


def _parse_record(obj: dict, trace: Trace) -> None:
    kind = obj["kind"]
    if kind == "market":
        pool = PoolState.from_json_obj(obj)
        if pool.market_id in trace.markets:
            trace.stats.duplicates += 1
            return
        trace.markets[pool.market_id] = pool
    elif kind == "block":
        rec = BlockRecord(
            height=int(obj["height"]),
            ts_ms=int(obj["ts_ms"]),
            size_bytes=int(obj["size_bytes"]),
        )
        if rec.height in trace.blocks:
            trace.stats.duplicates += 1
            return
        trace.blocks[rec.height] = rec
    elif kind == "tx":
        height = obj.get("block_height")
        index = obj.get("index")
        rec = TxRecord(
            tx_id=str(obj["id"]),
            block_height=None if height is None else int(height),
            index=None if index is None else int(index),
            gas_price=int(obj["gas_price"]),
            sender=str(obj.get("sender", "")),
            nonce=int(obj.get("nonce", 0)),
            size_bytes=int(obj.get("size_bytes", 0)),
            status=str(obj.get("status", "ok")),
        )
        if rec.tx_id in trace.txs:
            trace.stats.duplicates += 1
            return
        trace.txs[rec.tx_id] = rec
    elif kind == "swap_event":
        event = SwapEvent(
            tx_id=str(obj["tx_id"]),
            market_id=str(obj["market_id"]),
            direction=Direction.parse(obj["direction"]),
            amount_in=int(obj["amount_in"]),
            amount_out=int(obj["amount_out"]),
        )
        if event.amount_in <= 0 or event.amount_out < 0:
            raise ValueError("swap_event amounts must be positive")
        trace.events.setdefault(event.tx_id, []).append(event)
    elif kind == "p2p_sighting":
        tx_id = str(obj["tx_id"])
        seen = int(obj["first_seen_ms"])
        prev = trace.sightings.get(tx_id)
        trace.sightings[tx_id] = seen if prev is None else min(prev, seen)
    else:
        raise ValueError(f"unknown record kind {kind!r}")


def parse_trace_lines(lines: Iterable[str]) -> Trace:
    trace = Trace()
    for raw in lines:
        line = raw.strip()
        if not line:
            continue
        trace.stats.lines += 1
        try:
            obj = json.loads(line)
            if obj.get("kind") == "tx" and "size_bytes" not in obj:
                obj = dict(obj, size_bytes=len(line.encode()))
            _parse_record(obj, trace)
        except (KeyError, ValueError, TypeError):
            trace.stats.malformed += 1
    # tx indices must be unique per block
    seen: set[tuple[int, int]] = set()
    for tx in trace.txs.values():
        if tx.mined:
            pos = tx.position
            if pos in seen:
                raise TraceError(f"duplicate tx index {pos}")
            seen.add(pos)
    return trace


def read_trace(path: str | Path) -> Trace:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_trace_lines(fh)


class ChainState:
    """Pool states as of a (block, index) cursor.

    Rebuilding is deterministic: fold every mined swap event in (height,
    index) order onto the declared market preambles.  Snapshots are kept
    per block boundary so repositioning heuristics replay mid-block spans
    only.
    """

    def __init__(self, trace: Trace):
        self.trace = trace
        self.unknown_market_events = 0
        self._heights = trace.heights()
        self._snapshots: dict[int, dict[str, PoolState]] = {}
        self._build()

    def _apply_tx(self, pools: dict[str, PoolState], tx_id: str) -> None:
        tx = self.trace.txs.get(tx_id)
        if tx is not None and tx.status == "reverted":
            return
        for event in self.trace.events_of(tx_id):
            pool = pools.get(event.market_id)
            if pool is None:
                self.unknown_market_events += 1
                continue
            new_pool, _ = apply_swap(
                pool,
                SwapAction(event.market_id, event.direction, event.amount_in),
            )
            pools[event.market_id] = new_pool

    def _build(self) -> None:
        pools = dict(self.trace.markets)
        if not self._heights:
            return
        prev = self._heights[0] - 1
        self._snapshots[prev] = dict(pools)
        for height in self._heights:
            for tx in self.trace.txs_in_block(height):
                self._apply_tx(pools, tx.tx_id)
            self._snapshots[height] = dict(pools)

    def genesis(self) -> dict[str, PoolState]:
        return dict(self.trace.markets)

    def after_block(self, height: int) -> dict[str, PoolState]:
        """State after executing every transaction of ``height``."""
        if height not in self._snapshots:
            if height < min(self._snapshots, default=0):
                return dict(self.trace.markets)
            raise TraceError(f"no snapshot for block {height}")
        return dict(self._snapshots[height])

    def before_tx(self, tx: TxRecord) -> dict[str, PoolState]:
        """State immediately before a mined transaction."""
        height, index = tx.position
        base_height = height - 1
        if base_height in self._snapshots:
            pools = dict(self._snapshots[base_height])
        else:
            pools = dict(self.trace.markets)
        for other in self.trace.txs_in_block(height):
            if (other.index or 0) >= index:
                break
            self._apply_tx(pools, other.tx_id)
        return pools

    def after_prefix(self, height: int, last_index: int) -> dict[str, PoolState]:
        """State after executing block ``height`` up to tx ``last_index``."""
        base_height = height - 1
        if base_height in self._snapshots:
            pools = dict(self._snapshots[base_height])
        else:
            pools = dict(self.trace.markets)
        for other in self.trace.txs_in_block(height):
            if (other.index or 0) > last_index:
                break
            self._apply_tx(pools, other.tx_id)
        return pools
