"""Arbitrage detection and MEV-overhead classification over traces.

Three layers of tests:

* static detection - a mined transaction whose recorded swap amounts form
  a profitable atomic round trip across two markets;
* replay classification - block-space overhead: transactions that did NOT
  succeed where they mined but would have succeeded repositioned at the
  head of one of the five previous blocks (front-run label) or interleaved
  right after an earlier transaction they undercut on gas price (back-run
  label);
* sighting correlation - network overhead: broadcast transactions that
  would have extracted the same opportunity, first seen inside the
  opportunity's lifetime window.

Replay chains leg flows (the second leg sells what the first leg bought),
mirroring concrete execution of an arbitrage contract; the recorded
amounts only pin the first leg's input.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from ..errors import PreconditionError
from ..pool import Direction, PoolState, quote
from .records import ChainState, SwapEvent, Trace, TxRecord

WINDOW_BLOCKS = 5


def _round_trip_pairs(events: list[SwapEvent]) -> list[tuple[SwapEvent, SwapEvent]]:
    """(first, second) event pairs on distinct markets closing a round trip."""
    pairs = []
    for i, first in enumerate(events):
        for second in events[i + 1 :]:
            if first.market_id == second.market_id:
                continue
            if first.direction is second.direction:
                continue
            pairs.append((first, second))
    return pairs


def detect_arbitrages(trace: Trace) -> list[str]:
    """Mined txs whose recorded amounts form a profitable atomic round trip.

    Both swaps must sit in the same transaction (split round trips never
    match), the first leg's output must cover the second leg's input, and
    the round trip must return more than it spent.
    """
    flagged = []
    for tx in trace.mined_txs():
        events = trace.events_of(tx.tx_id)
        for first, second in _round_trip_pairs(events):
            if first.amount_out >= second.amount_in and second.amount_out > first.amount_in:
                flagged.append(tx.tx_id)
                break
    return flagged


def simulate_round_trip(
    pools: dict[str, PoolState], events: list[SwapEvent]
) -> bool | None:
    """Replay a round trip against ``pools``; True when it profits.

    None means unclassifiable (a referenced market is unknown).  The first
    leg keeps its recorded input; the second leg consumes the first leg's
    simulated output.
    """
    for first, second in _round_trip_pairs(events):
        pool_a = pools.get(first.market_id)
        pool_b = pools.get(second.market_id)
        if pool_a is None or pool_b is None:
            return None
        try:
            out1 = quote(pool_a, first.direction, first.amount_in)
            if out1 <= 0:
                continue
            out2 = quote(pool_b, second.direction, out1)
        except PreconditionError:
            continue
        if out2 > first.amount_in:
            return True
    return False


def is_successful_arb(pools: dict[str, PoolState], events: list[SwapEvent]) -> bool | None:
    """Whether a transaction's swaps extract an arbitrage at this state."""
    if not events:
        return False
    return simulate_round_trip(pools, events)


@dataclass(frozen=True)
class BlockspaceFinding:
    tx_id: str
    label: str  # "front" or "back"
    target: str | None
    distance: int | None
    size_bytes: int


@dataclass(frozen=True)
class NetworkFinding:
    tx_id: str
    target: str
    size_bytes: int
    first_seen_ms: int


@dataclass
class AnalysisReport:
    successful_arbs: list[str] = field(default_factory=list)
    blockspace: list[BlockspaceFinding] = field(default_factory=list)
    network: list[NetworkFinding] = field(default_factory=list)
    low_confidence_arbs: list[str] = field(default_factory=list)
    unclassifiable: int = 0
    unknown_market_events: int = 0
    malformed_lines: int = 0

    def blockspace_histogram(self) -> dict[str, dict[int, int]]:
        hist: dict[str, dict[int, int]] = {"front": {}, "back": {}}
        for f in self.blockspace:
            if f.distance is None:
                continue
            bucket = hist[f.label]
            bucket[f.distance] = bucket.get(f.distance, 0) + 1
        return hist

    def network_bytes_by_target(self) -> dict[str, int]:
        totals: dict[str, int] = {}
        for f in self.network:
            totals[f.target] = totals.get(f.target, 0) + f.size_bytes
        return totals

    def to_json_obj(self) -> dict:
        return {
            "successful_arbs": self.successful_arbs,
            "blockspace": [
                {
                    "tx_id": f.tx_id,
                    "label": f.label,
                    "target": f.target,
                    "distance": f.distance,
                    "size_bytes": f.size_bytes,
                }
                for f in self.blockspace
            ],
            "blockspace_histogram": {
                label: {str(k): v for k, v in sorted(buckets.items())}
                for label, buckets in self.blockspace_histogram().items()
            },
            "network": [
                {
                    "tx_id": f.tx_id,
                    "target": f.target,
                    "size_bytes": f.size_bytes,
                    "first_seen_ms": f.first_seen_ms,
                }
                for f in self.network
            ],
            "network_bytes_by_target": self.network_bytes_by_target(),
            "counters": {
                "unclassifiable": self.unclassifiable,
                "unknown_market_events": self.unknown_market_events,
                "malformed_lines": self.malformed_lines,
                "low_confidence_arbs": len(self.low_confidence_arbs),
            },
        }


def _successful_arbs(trace: Trace, chain: ChainState) -> list[TxRecord]:
    out = []
    for tx in trace.mined_txs():
        events = trace.events_of(tx.tx_id)
        if len(events) < 2:
            continue
        if is_successful_arb(chain.before_tx(tx), events) is True:
            out.append(tx)
    return out


def _arb_shaped(trace: Trace, tx: TxRecord) -> bool:
    return bool(_round_trip_pairs(trace.events_of(tx.tx_id)))


def classify_blockspace_overhead(
    trace: Trace, chain: ChainState | None = None
) -> tuple[list[BlockspaceFinding], list[TxRecord], int]:
    """Failed arbitrage attempts occupying mined block space.

    Returns (findings, successful arb txs, unclassifiable count).  A mined
    transaction is overhead when it failed in place but replays profitably
    either at the head of one of the five previous blocks (front) or
    interleaved after a transaction whose gas price it does not exceed
    (back).  Back-run evidence wins when both patterns match, since the
    gas-underbid signature identifies the strategy.
    """
    chain = chain or ChainState(trace)
    heights = trace.heights()
    if not heights:
        return [], [], 0
    first_height = heights[0]
    arbs = _successful_arbs(trace, chain)
    arb_ids = {t.tx_id for t in arbs}
    findings: list[BlockspaceFinding] = []
    unclassifiable = 0

    for tx in trace.mined_txs():
        if tx.tx_id in arb_ids or not _arb_shaped(trace, tx):
            continue
        height, _ = tx.position
        if height - WINDOW_BLOCKS < first_height:
            unclassifiable += 1
            continue
        events = trace.events_of(tx.tx_id)
        if is_successful_arb(chain.before_tx(tx), events) is not False:
            continue  # succeeded in place (already counted) or unknown market

        back = False
        front = False
        for j in range(height - WINDOW_BLOCKS, height):
            for other in reversed(trace.txs_in_block(j)):
                if other.tx_id == tx.tx_id or tx.gas_price > other.gas_price:
                    continue
                state = chain.after_prefix(j, other.index or 0)
                if is_successful_arb(state, events) is True:
                    back = True
                    break
            if back:
                break
        if not back:
            for j in range(height - WINDOW_BLOCKS, height):
                if is_successful_arb(chain.after_block(j), events) is True:
                    front = True
                    break
        if not (front or back):
            continue

        target, distance = _associate(trace, chain, tx, arbs, events)
        findings.append(
            BlockspaceFinding(
                tx_id=tx.tx_id,
                label="back" if back else "front",
                target=target,
                distance=distance,
                size_bytes=tx.size_bytes,
            )
        )
    return findings, arbs, unclassifiable


def _associate(
    trace: Trace,
    chain: ChainState,
    tx: TxRecord,
    arbs: list[TxRecord],
    events: list[SwapEvent],
) -> tuple[str | None, int | None]:
    """Map an overhead tx to the successful arb that took its opportunity."""
    height, _ = tx.position
    best: TxRecord | None = None
    for arb in arbs:
        a_height, _ = arb.position
        if not 0 <= height - a_height <= WINDOW_BLOCKS:
            continue
        if arb.position >= tx.position:
            continue
        if is_successful_arb(chain.before_tx(arb), events) is True:
            if best is None or arb.position > best.position:
                best = arb
    if best is None:
        return None, None
    return best.tx_id, height - best.position[0]


def _find_victim(trace: Trace, chain: ChainState, arb: TxRecord) -> TxRecord | None:
    """Latest preceding tx whose execution opened the arb's opportunity."""
    events = trace.events_of(arb.tx_id)
    height, _ = arb.position
    preceding = [
        t
        for t in trace.mined_txs()
        if t.position < arb.position and t.block_height is not None
        and t.block_height >= height - WINDOW_BLOCKS - 1
    ]
    for tx in reversed(preceding):
        if is_successful_arb(chain.before_tx(tx), events) is not True:
            return tx
    return None


def classify_network_overhead(
    trace: Trace,
    chain: ChainState | None = None,
    blockspace: list[BlockspaceFinding] | None = None,
) -> tuple[list[NetworkFinding], list[str]]:
    """Broadcast arbitrage attempts that lost the race for an opportunity.

    For each successful arbitrage: every sighted transaction that is
    unmined (or mined without success), substitutes profitably at the
    arbitrage's position, and was first seen after the earliest related
    sighting but before the arbitrage's block, counts as network overhead.
    Returns (findings, low-confidence arb ids).
    """
    chain = chain or ChainState(trace)
    if blockspace is None:
        blockspace, arbs, _ = classify_blockspace_overhead(trace, chain)
    else:
        arbs = _successful_arbs(trace, chain)
    arb_ids = {t.tx_id for t in arbs}
    overheads_by_target: dict[str, list[str]] = {}
    for f in blockspace:
        if f.target:
            overheads_by_target.setdefault(f.target, []).append(f.tx_id)

    candidates = [
        trace.txs[tx_id]
        for tx_id in sorted(trace.sightings)
        if tx_id in trace.txs
        and (not trace.txs[tx_id].mined or tx_id not in arb_ids)
    ]

    findings: list[NetworkFinding] = []
    low_confidence: list[str] = []
    for arb in arbs:
        a_height, _ = arb.position
        block = trace.blocks.get(a_height)
        if block is None:
            continue
        t_max = block.ts_ms
        related_times = []
        arb_seen = trace.first_seen(arb.tx_id)
        if arb_seen is None:
            related_times.append(t_max)
            low_confidence.append(arb.tx_id)
        else:
            related_times.append(arb_seen)
        victim = _find_victim(trace, chain, arb)
        if victim is not None:
            seen = trace.first_seen(victim.tx_id)
            if seen is not None:
                related_times.append(seen)
        for oh_id in overheads_by_target.get(arb.tx_id, []):
            seen = trace.first_seen(oh_id)
            if seen is not None:
                related_times.append(seen)
        t_min = min(related_times)

        state = chain.before_tx(arb)
        for cand in candidates:
            if cand.tx_id == arb.tx_id:
                continue
            seen = trace.first_seen(cand.tx_id)
            if seen is None or not t_min < seen < t_max:
                continue
            if is_successful_arb(state, trace.events_of(cand.tx_id)) is True:
                findings.append(
                    NetworkFinding(
                        tx_id=cand.tx_id,
                        target=arb.tx_id,
                        size_bytes=cand.size_bytes,
                        first_seen_ms=seen,
                    )
                )
    findings.sort(key=lambda f: (f.target, f.first_seen_ms, f.tx_id))
    return findings, low_confidence


def analyze_trace(trace: Trace) -> AnalysisReport:
    """Full pipeline: successful arbs, block-space and network overhead."""
    chain = ChainState(trace)
    blockspace, arbs, unclassifiable = classify_blockspace_overhead(trace, chain)
    network, low_confidence = classify_network_overhead(trace, chain, blockspace)
    report = AnalysisReport(
        successful_arbs=[t.tx_id for t in arbs],
        blockspace=sorted(blockspace, key=lambda f: f.tx_id),
        network=network,
        low_confidence_arbs=low_confidence,
        unclassifiable=unclassifiable,
        unknown_market_events=chain.unknown_market_events,
        malformed_lines=trace.stats.malformed,
    )
    return report


def blockspace_reduction(
    c_a2mm: float, c_amm: float, c_arb: float, c_overhead: float
) -> float:
    """Relative block space freed when routing+arbitrage fold into the swap.

    1 - c_a2mm / (c_amm + c_arb + c_overhead); all inputs must be positive.
    """
    for name, value in (
        ("c_a2mm", c_a2mm),
        ("c_amm", c_amm),
        ("c_arb", c_arb),
        ("c_overhead", c_overhead),
    ):
        if value <= 0:
            raise PreconditionError(f"{name} must be positive")
    return 1.0 - c_a2mm / (c_amm + c_arb + c_overhead)
