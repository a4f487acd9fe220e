"""Command-line entry points: ingest, serve, simulate, synth, bench."""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace
from pathlib import Path


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="likemind",
        description="Interactive, explainable POI recommendations from look-alike groups",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load JSONL sources into a binary snapshot")
    p.add_argument("--pois", required=True)
    p.add_argument("--users", required=True)
    p.add_argument("--checkins", required=True)
    p.add_argument("--out", required=True, help="snapshot output path")
    p.add_argument("--strict", action="store_true",
                   help="fail on dangling references instead of skipping")
    p.add_argument("--refit-buckets", action="store_true",
                   help="recompute equal-frequency demographic buckets from the data")
    p.add_argument("--utc-offset-hours", type=float, default=0.0)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--dataset", help="snapshot path (or LIKEMIND_DATASET)")
    p.add_argument("--bind", help="host:port (or LIKEMIND_BIND)")
    p.add_argument("--r", type=float, default=500.0)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--k-prime", type=int, default=5)
    p.add_argument("--sigma", type=float, default=0.01)
    p.add_argument("--tl-ms", type=float, default=100.0)
    p.add_argument("--max-swaps", type=int, default=None,
                   help="deterministic swap budget (overrides the time limit)")
    p.add_argument("--session-ttl", type=float, default=3600.0)
    p.add_argument("--deterministic", action="store_true",
                   help="sequential ids and a logical clock for replay testing")

    p = sub.add_parser("simulate", help="run the Hit-Ratio simulation study")
    p.add_argument("--dataset", help="snapshot path; omit for the synthetic city")
    p.add_argument("--synth-seed", type=int, default=7,
                   help="seed for the synthetic city when --dataset is omitted")
    p.add_argument("--sessions", type=int, default=100)
    p.add_argument("--iterations", type=int, default=10)
    p.add_argument("--group-strategy", choices=["random", "optimal"], default="random")
    p.add_argument("--mindset-strategy", choices=["random", "optimal"], default="random")
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--r", type=float, default=500.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-swaps", type=int, default=150)
    p.add_argument("--out", help="CSV report path (default: stdout)")
    p.add_argument("--baseline", choices=["popularity", "diversity"], action="append",
                   help="also report a static baseline (repeatable)")

    p = sub.add_parser("synth", help="generate the synthetic city")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--pois", type=int, default=5000)
    p.add_argument("--visitors", type=int, default=2000)
    p.add_argument("--snapshot", help="also write a binary snapshot here")

    p = sub.add_parser("bench", help="pipeline stage timing and miner comparison")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--iterations", type=int, default=100)
    p.add_argument("--r", type=float, default=500.0)
    p.add_argument("--k", type=int, default=5, help="group count for stage timing")
    p.add_argument("--out", help="CSV path for per-iteration stage timings")

    args = parser.parse_args(argv)
    return {
        "ingest": _cmd_ingest,
        "serve": _cmd_serve,
        "simulate": _cmd_simulate,
        "synth": _cmd_synth,
        "bench": _cmd_bench,
    }[args.command](args)


def _cmd_ingest(args) -> int:
    from .dataset import DatasetConfig, load_dataset, save_snapshot

    cfg = DatasetConfig(
        strict=args.strict,
        utc_offset_hours=args.utc_offset_hours,
        refit_buckets=args.refit_buckets,
    )
    ds = load_dataset(args.pois, args.users, args.checkins, cfg)
    save_snapshot(ds, args.out)
    print(
        f"ingested {len(ds.pois)} POIs, {len(ds.visitors)} visitors, "
        f"{len(ds.checkins)} check-ins -> {args.out}"
    )
    return 0


def _cmd_serve(args) -> int:
    from .engine import EngineParams
    from .server import ServerConfig, serve

    cfg = ServerConfig.from_env()
    if args.dataset:
        cfg.dataset_path = args.dataset
    if args.bind:
        cfg.bind = args.bind
    cfg.params = EngineParams(
        r=args.r, k=args.k, k_prime=args.k_prime, sigma=args.sigma,
        tl_ms=None if args.max_swaps else args.tl_ms, max_swaps=args.max_swaps,
    )
    cfg.session_ttl_s = args.session_ttl
    cfg.deterministic = args.deterministic
    serve(cfg)
    return 0


def _load_or_synth(args):
    from .dataset import load_snapshot
    from .synth import CityConfig, generate_dataset

    if args.dataset:
        return load_snapshot(args.dataset)
    print(f"# no --dataset given; generating the synthetic city (seed {args.synth_seed})",
          file=sys.stderr)
    return generate_dataset(CityConfig(seed=args.synth_seed))


def _cmd_simulate(args) -> int:
    from .simulator import (
        SimulationConfig,
        baseline_traces,
        report_rows,
        simulate,
        write_report,
    )

    ds = _load_or_synth(args)
    config = SimulationConfig(
        sessions=args.sessions,
        iterations=args.iterations,
        r=args.r,
        group_strategy=args.group_strategy,
        mindset_strategy=args.mindset_strategy,
        theta=args.theta,
        seed=args.seed,
        max_swaps=args.max_swaps,
    )
    traces = simulate(ds, config)
    rows = report_rows(traces, config)
    for kind in args.baseline or []:
        rows += report_rows(baseline_traces(ds, traces, config, kind), config, variant=kind)
    text = write_report(rows, args.out)
    if args.out:
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_synth(args) -> int:
    from .dataset import DatasetConfig, load_dataset, save_snapshot
    from .synth import CityConfig, generate_rows, write_jsonl

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = CityConfig(seed=args.seed, n_pois=args.pois, n_visitors=args.visitors)
    pois, visitors, checkins = generate_rows(cfg)
    write_jsonl(pois, out / "pois.jsonl")
    write_jsonl(visitors, out / "visitors.jsonl")
    write_jsonl(checkins, out / "checkins.jsonl")
    print(f"wrote {len(pois)} POIs, {len(visitors)} visitors, "
          f"{len(checkins)} check-ins to {out}")
    if args.snapshot:
        ds = load_dataset(pois, visitors, checkins, DatasetConfig())
        save_snapshot(ds, args.snapshot)
        print(f"snapshot -> {args.snapshot}")
    return 0


def _cmd_bench(args) -> int:
    import numpy as np

    from . import fim
    from .dataset import time_category
    from .engine import Engine, EngineParams
    from .geo import Context, GeoPoint
    from .groups import build_transactions
    from .mindsets import builtin_mindsets
    from .synth import CityConfig, generate_dataset

    ds = generate_dataset(CityConfig(seed=args.seed))
    params = EngineParams(r=args.r, k=args.k, max_swaps=150, tl_ms=None)
    engine = Engine(ds, params)
    catalog = builtin_mindsets()
    rng = np.random.default_rng(args.seed)

    rows = []
    for i in range(args.iterations):
        c = ds.checkins[int(rng.integers(len(ds.checkins)))]
        poi = ds.pois[c.poi]
        ctx = Context(GeoPoint(poi.lat, poi.lon), time_category(c.ts), c.ts)
        session = engine.new_session(ctx)
        rec = engine.iterate(session, catalog[i % len(catalog)], params)
        rows.append(rec.stage_ms)
    stages = ["nearby_pois", "checkins_of", "mine_groups", "maximize"]
    print(f"stage timings over {len(rows)} iterations (ms, mean / p90):")
    total = 0.0
    for st in stages:
        vals = [r[st] for r in rows]
        total += float(np.mean(vals))
        print(f"  {st:12s} {np.mean(vals):8.2f} / {np.percentile(vals, 90):8.2f}")
    print(f"  {'total':12s} {total:8.2f}")

    if args.out:
        import csv

        with open(args.out, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=stages)
            w.writeheader()
            w.writerows(rows)
        print(f"wrote {args.out}")

    # compare miner backends on one representative substrate
    backends = fim.available_backends()
    c = ds.checkins[len(ds.checkins) // 2]
    poi = ds.pois[c.poi]
    ctx = Context(GeoPoint(poi.lat, poi.lon), time_category(c.ts), c.ts)
    from .geo import checkins_of, nearby_pois

    near = nearby_pois(ds, ctx.loc, args.r, engine.index)
    checkins = checkins_of(ds, near, ctx.time.hourly)
    transactions = [t.items for t in build_transactions(ds, checkins)]
    print(f"\nminer comparison ({len(transactions)} transactions):")
    reference = None
    for name, fn in backends.items():
        t0 = time.perf_counter()
        reps = 5
        for _ in range(reps):
            result = sorted(fn(transactions, 2, 6))
        dt = (time.perf_counter() - t0) / reps * 1000
        if reference is None:
            reference = result
        agree = "ok" if result == reference else "MISMATCH"
        print(f"  {name:8s} {dt:8.2f} ms  ({len(result)} closed itemsets, {agree})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
