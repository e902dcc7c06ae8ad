"""Command-line front end.

Every subcommand reads/writes files or stdout, takes decimal-string
amounts in base units, and is byte-deterministic for a fixed seed.
Domain errors exit 1 with a JSON error object on stderr; usage errors
exit 2.

Environment overrides: AMMLAB_SEED (default seed), AMMLAB_TOLERANCE
(relative tolerance for `oracle --verify`), AMMLAB_PURE (force the
pure-Python kernels).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from ._kernels import BACKEND
from .amounts import FeeRate
from .arbitrage import (
    count_cost,
    execute_two_point,
    is_profitable,
    n_pool_arbitrage,
    optimal_input,
    optimal_input_unchecked,
)
from .engine import A2mmRequest, plan as engine_plan, plan_and_execute, replay
from .errors import AmmError
from .netsim import NetSimConfig, flooding_degradation, simulate, sweep_and_fit
from .oracle import (
    brute_arb,
    brute_route,
    generate_arb_fixtures,
    generate_route_fixtures,
    load_fixtures,
    write_fixtures,
)
from .pool import Direction, PoolState, quote
from .routing import route
from .trace import (
    GeneratorConfig,
    analyze_trace,
    blockspace_reduction,
    generate_corpus,
    read_trace,
)

DEFAULT_SEED = 20210421


def _default_seed() -> int:
    return int(os.environ.get("AMMLAB_SEED", DEFAULT_SEED))


def _default_tolerance() -> float:
    return float(os.environ.get("AMMLAB_TOLERANCE", 1e-3))


def _parse_pool(text: str, market_id: str, fee: FeeRate) -> PoolState:
    """Reserves as 'x,y' decimal strings."""
    try:
        x_text, y_text = text.split(",")
        return PoolState(market_id, int(x_text), int(y_text), fee)
    except ValueError as exc:
        raise AmmError(f"bad pool spec {text!r}: expected 'x,y' integers") from exc


def _load_pools(args) -> list[PoolState]:
    fee = FeeRate(args.fee_num, args.fee_den)
    pools: list[PoolState] = []
    if getattr(args, "pools_file", None):
        data = json.loads(Path(args.pools_file).read_text())
        pools.extend(PoolState.from_json_obj(obj) for obj in data)
    if getattr(args, "pools", None):
        for i, spec in enumerate(args.pools.split(";")):
            pools.append(_parse_pool(spec, f"p{i}", fee))
    if not pools:
        raise AmmError("no pools given: use --pools or --pools-file")
    return pools


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _json_dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def _cmd_swap(args) -> int:
    fee = FeeRate(args.fee_num, args.fee_den)
    pool = PoolState("pool", args.x, args.y, fee)
    direction = Direction.parse(args.direction)
    out = quote(pool, direction, getattr(args, "in"))
    if args.json:
        from .pool import SwapAction, apply_swap

        new_pool, amount = apply_swap(
            pool, SwapAction("pool", direction, getattr(args, "in"), args.min_out)
        )
        _emit(args, _json_dump({"amount_out": str(amount), "pool_after": new_pool.to_json_obj()}))
    else:
        if out < args.min_out:
            raise AmmError(f"quote {out} below min {args.min_out}")
        _emit(args, f"{out}\n")
    return 0


def _cmd_route(args) -> int:
    pools = _load_pools(args)
    plan = route(pools, Direction.parse(args.direction), getattr(args, "in"))
    _emit(args, _json_dump(plan.to_json_obj()))
    return 0


def _cmd_arb(args) -> int:
    fee = FeeRate(args.fee_num, args.fee_den)
    if args.n_pool:
        pools = _load_pools(args)
        result = n_pool_arbitrage(pools, profit_in=args.profit_in)
        obj = {
            "plans": [p.to_json_obj() for p in result.plans],
            "pools_after": [p.to_json_obj() for p in result.pools],
            "stats": {
                "arb_computations": result.stats.arb_computations,
                "sync_computations": result.stats.sync_computations,
                "swaps": result.stats.swaps,
                "profit": str(result.stats.profit),
            },
            "cost_prediction": str(count_cost(len(pools)).total_cost_pct),
        }
        _emit(args, _json_dump(obj))
        return 0
    pool1 = _parse_pool(args.pool1, "pool1", fee)
    pool2 = _parse_pool(args.pool2, "pool2", fee)
    profitable = is_profitable(pool1, pool2)
    obj: dict = {"profitable": profitable}
    if profitable:
        dx = optimal_input(pool1, pool2)
        _, _, profit = execute_two_point(pool1, pool2, dx)
        obj.update({"optimal_input": str(dx), "profit": str(profit)})
    _emit(args, _json_dump(obj))
    return 0


def _cmd_plan(args) -> int:
    pools = _load_pools(args)
    request = A2mmRequest(
        direction=Direction.parse(args.direction),
        amount_in=getattr(args, "in"),
        min_amount_out=args.min_out,
        arbitrage_enabled=not args.no_arb,
    )
    if args.execute:
        _, report = plan_and_execute(request, pools)
        _emit(args, _json_dump(report.to_json_obj()))
    else:
        batch = engine_plan(request, pools)
        _emit(args, _json_dump(batch.to_json_obj()))
    return 0


def _cmd_replay(args) -> int:
    pools = _load_pools(args)
    with open(args.stream, "r", encoding="utf-8") as fh:
        entries, final = replay(fh, pools, mode=args.mode)
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(
            ["seq", "ok", "mode", "amount_out", "single_pool_out", "routing_gain", "arb_profit", "leaf", "error"]
        )
        for e in entries:
            writer.writerow(
                [e.seq, int(e.ok), e.mode, e.amount_out, e.single_pool_out, e.routing_gain, e.arb_profit, e.leaf, e.error or ""]
            )
        _emit(args, buf.getvalue())
    else:
        lines = [json.dumps(e.to_json_obj(), sort_keys=True) for e in entries]
        lines.append(json.dumps({"final_pools": [p.to_json_obj() for p in final]}, sort_keys=True))
        _emit(args, "\n".join(lines) + "\n")
    return 0


def _oracle_one(task) -> dict:
    kind, count, seed, n_pools = task
    if kind == "arb":
        return generate_arb_fixtures(count, seed)
    return generate_route_fixtures(count, n_pools, seed)


def _cmd_oracle(args) -> int:
    if args.verify:
        fixtures = load_fixtures(args.verify)
        tolerance = args.tolerance
        bad = 0
        for case in fixtures["cases"]:
            if fixtures["kind"] == "arb":
                pool1 = PoolState("m1", int(case["inputs"]["x1"]), int(case["inputs"]["y1"]))
                pool2 = PoolState("m2", int(case["inputs"]["x2"]), int(case["inputs"]["y2"]))
                # Integer flooring leaves a plateau of equally-good inputs,
                # so the fixture pins the achieved profit, not the input.
                _, profit = optimal_input_unchecked(pool1, pool2)
                want = int(case["oracle_output"]["profit"])
                if abs(profit - want) > max(2, tolerance * want):
                    bad += 1
            else:
                pools = [PoolState.from_json_obj(o) for o in case["inputs"]["pools"]]
                plan = route(pools, Direction.X_TO_Y, int(case["inputs"]["total_in"]))
                want_out = int(case["oracle_output"]["out"])
                if abs(plan.expected_total_out - want_out) > max(1, tolerance * want_out):
                    bad += 1
        _emit(args, _json_dump({"cases": len(fixtures["cases"]), "mismatches": bad}))
        return 0 if bad == 0 else 1
    tasks = []
    if args.kind in ("arb", "all"):
        tasks.append(("arb", args.count, args.seed, 0))
    if args.kind in ("route2", "all"):
        tasks.append(("route2", args.count, args.seed + 1, 2))
    if args.kind in ("route3", "all"):
        tasks.append(("route3", max(1, args.count // 5), args.seed + 2, 3))
    if args.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_oracle_one, tasks))
    else:
        results = [_oracle_one(t) for t in tasks]
    outdir = Path(args.out or ".")
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for task, fixtures in zip(tasks, results):
        path = outdir / f"oracle_{task[0]}.json"
        write_fixtures(fixtures, path)
        written.append(str(path))
    sys.stdout.write(_json_dump({"written": written}))
    return 0


def _cmd_gen_trace(args) -> int:
    cfg = GeneratorConfig(
        n_opportunities=args.arbs,
        blockspace_per_opportunity=args.blockspace_per_arb,
        network_per_opportunity=args.network_per_arb,
        seed=args.seed,
    )
    lines, key = generate_corpus(cfg)
    Path(args.out).write_text("\n".join(lines) + "\n")
    Path(args.key).write_text(_json_dump(key))
    sys.stdout.write(_json_dump({"trace": args.out, "key": args.key, "counts": key["counts"]}))
    return 0


def _cmd_analyze(args) -> int:
    trace = read_trace(args.trace)
    report = analyze_trace(trace)
    _emit(args, _json_dump(report.to_json_obj()))
    if args.csv_dir:
        outdir = Path(args.csv_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        hist = report.blockspace_histogram()
        with open(outdir / "blockspace_histogram.csv", "w", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["label", "distance", "count"])
            for label in sorted(hist):
                for distance in sorted(hist[label]):
                    writer.writerow([label, distance, hist[label][distance]])
    return 0


def _cmd_reduction(args) -> int:
    value = blockspace_reduction(args.a2mm, args.amm, args.arb, args.overhead)
    _emit(args, _json_dump({"reduction": value}))
    return 0


def _netsim_point(task):
    cfg_obj, bandwidth, seed, n_blocks = task
    cfg = NetSimConfig.from_json_obj(cfg_obj, bandwidth_mbit=bandwidth)
    cfg = NetSimConfig(**{**cfg.__dict__, "seed": seed, "n_blocks": n_blocks})
    result = simulate(cfg)
    return bandwidth, result.stale_rate, result.stderr


def _cmd_netsim(args) -> int:
    cfg_obj = json.loads(Path(args.config).read_text())
    if args.bandwidths:
        bandwidths = [float(b) for b in args.bandwidths.split(",")]
        base = NetSimConfig.from_json_obj(cfg_obj)
        base = NetSimConfig(**{**base.__dict__, "seed": args.seed, "n_blocks": args.blocks})
        if args.jobs > 1:
            tasks = [
                (cfg_obj, bw, args.seed + 1_000_003 * (i + 1), args.blocks)
                for i, bw in enumerate(bandwidths)
            ]
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                points = list(pool.map(_netsim_point, tasks))
            from .netsim import StaleRateCurve, fit_quadratic

            curve = StaleRateCurve(
                points=points, coefficients=fit_quadratic([(b, r) for b, r, _ in points])
            )
        else:
            curve = sweep_and_fit(base, bandwidths)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["bandwidth_mbit", "stale_rate", "stderr"])
        for b, r, e in curve.points:
            writer.writerow([b, f"{r:.6f}", f"{e:.6f}"])
        _emit(args, buf.getvalue())
        sys.stdout.write(_json_dump(curve.to_json_obj()["fit"]))
        return 0
    cfg = NetSimConfig.from_json_obj(cfg_obj, bandwidth_mbit=args.bandwidth)
    cfg = NetSimConfig(**{**cfg.__dict__, "seed": args.seed, "n_blocks": args.blocks})
    if args.flood_bytes:
        effective = flooding_degradation(
            cfg.bandwidth_mbit, args.flood_bytes, args.flood_interval, args.flood_amplification
        )
        cfg = cfg.with_bandwidth(effective)
    result = simulate(cfg)
    _emit(
        args,
        _json_dump(
            {
                "bandwidth_mbit": cfg.bandwidth_mbit,
                "stale_rate": result.stale_rate,
                "stderr": result.stderr,
                "stale_blocks": result.stale_blocks,
                "total_blocks": result.total_blocks,
            }
        ),
    )
    return 0


def _add_fee_args(sub) -> None:
    sub.add_argument("--fee-num", type=int, default=997, help="fee numerator (kept input fraction)")
    sub.add_argument("--fee-den", type=int, default=1000, help="fee denominator")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ammlab",
        description="Constant-product AMM lab: routing, arbitrage, trace forensics, "
        "propagation simulation. Amounts are integer base units.",
    )
    parser.add_argument("--version", action="version", version=f"ammlab {__version__} ({BACKEND})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("swap", help="quote or apply one constant-product swap")
    p.add_argument("--x", type=int, required=True, help="reserve of asset X (base units)")
    p.add_argument("--y", type=int, required=True, help="reserve of asset Y (base units)")
    p.add_argument("--in", type=int, required=True, help="input amount (base units)")
    p.add_argument("--direction", default="x2y", help="x2y or y2x")
    p.add_argument("--min-out", type=int, default=0, help="slippage guard (base units)")
    p.add_argument("--json", action="store_true", help="emit post-swap state as JSON")
    p.add_argument("--out", help="write output to file instead of stdout")
    _add_fee_args(p)
    p.set_defaults(func=_cmd_swap)

    p = sub.add_parser("route", help="optimal split of one swap across pools")
    p.add_argument("--pools", help="semicolon-separated 'x,y' pools")
    p.add_argument("--pools-file", help="JSON array of pool objects")
    p.add_argument("--in", type=int, required=True, help="total input (base units)")
    p.add_argument("--direction", default="x2y")
    p.add_argument("--out", help="output path")
    _add_fee_args(p)
    p.set_defaults(func=_cmd_route)

    p = sub.add_parser("arb", help="two-point or n-pool arbitrage")
    p.add_argument("--pool1", help="'x,y' of the buy-side pool")
    p.add_argument("--pool2", help="'x,y' of the sell-side pool")
    p.add_argument("--n-pool", action="store_true", help="run the n-pool strategy")
    p.add_argument("--pools", help="semicolon-separated pools for --n-pool")
    p.add_argument("--pools-file", help="JSON array of pools for --n-pool")
    p.add_argument("--profit-in", default="y", choices=["x", "y"], help="profit asset for --n-pool")
    p.add_argument("--out", help="output path")
    _add_fee_args(p)
    p.set_defaults(func=_cmd_arb)

    p = sub.add_parser("plan", help="plan (and optionally execute) one swap request")
    p.add_argument("--pools", help="semicolon-separated 'x,y' pools")
    p.add_argument("--pools-file")
    p.add_argument("--in", type=int, required=True, help="request input (base units)")
    p.add_argument("--direction", default="x2y")
    p.add_argument("--min-out", type=int, default=0)
    p.add_argument("--no-arb", action="store_true", help="disable best-effort arbitrage")
    p.add_argument("--execute", action="store_true", help="execute and report instead of planning")
    p.add_argument("--out")
    _add_fee_args(p)
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("replay", help="replay a JSON-lines swap stream")
    p.add_argument("--pools", help="semicolon-separated 'x,y' pools")
    p.add_argument("--pools-file")
    p.add_argument("--stream", required=True, help="JSON-lines request stream")
    p.add_argument("--mode", default="a2mm", choices=["amm", "a2mm"])
    p.add_argument("--format", default="json", choices=["json", "csv"])
    p.add_argument("--out")
    _add_fee_args(p)
    p.set_defaults(func=_cmd_replay)

    p = sub.add_parser("oracle", help="generate or verify brute-force fixtures")
    p.add_argument("--kind", default="all", choices=["arb", "route2", "route3", "all"])
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--out", help="output directory")
    p.add_argument("--verify", help="fixture file to re-check instead of generating")
    p.add_argument("--tolerance", type=float, default=_default_tolerance(),
                   help="relative tolerance for --verify")
    p.add_argument("--jobs", type=int, default=1, help="parallel fixture workers")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("gen-trace", help="synthetic trace corpus with answer key")
    p.add_argument("--arbs", type=int, default=10, help="planted opportunities")
    p.add_argument("--blockspace-per-arb", type=int, default=3)
    p.add_argument("--network-per-arb", type=int, default=5)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--out", required=True, help="trace JSON-lines path")
    p.add_argument("--key", required=True, help="answer key JSON path")
    p.set_defaults(func=_cmd_gen_trace)

    p = sub.add_parser("analyze", help="classify arbitrages and MEV overhead in a trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--out")
    p.add_argument("--csv-dir", help="also write CSV histograms here")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("reduction", help="block-space reduction formula")
    p.add_argument("--a2mm", type=float, required=True, help="combined-swap cost")
    p.add_argument("--amm", type=float, required=True, help="plain-swap cost")
    p.add_argument("--arb", type=float, required=True, help="arbitrage cost")
    p.add_argument("--overhead", type=float, required=True, help="block-space overhead cost")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_reduction)

    p = sub.add_parser("netsim", help="stale-rate simulation (rates per Mbit/s, latency ms)")
    p.add_argument("--config", required=True, help="chain config JSON")
    p.add_argument("--bandwidth", type=float, default=70.0, help="Mbit/s for a single run")
    p.add_argument("--bandwidths", help="comma-separated Mbit/s sweep; emits CSV + fit JSON")
    p.add_argument("--blocks", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--flood-bytes", type=float, default=0.0,
                   help="duplicate bytes per interval degrading bandwidth")
    p.add_argument("--flood-interval", type=float, default=13.0, help="seconds per interval")
    p.add_argument("--flood-amplification", type=float, default=200.0)
    p.add_argument("--jobs", type=int, default=1, help="parallel sweep workers")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_netsim)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AmmError as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 1
    except OSError as exc:
        sys.stderr.write(json.dumps({"error": "io", "message": str(exc)}) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
