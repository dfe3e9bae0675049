"""Show how batched path reconstruction shares work between queries.

The batch planner orders expansion chains so runs that climb through the
same separators sit next to each other, then copies the common prefix
instead of re-unpacking it.  Overlap grows with batch size: the more
queries in flight, the likelier a neighboring chain already expanded the
same shortcut.

The workload is rush hour in a generated town: many homes routing toward a
few workplaces.

Run:  python3 demos/batch_overlap.py
"""
from __future__ import annotations

import argparse
import random
import sys
import time

from treeroute import build_index
from treeroute.batch import BatchStats

from make_town import metrics_for, town_graph


def commuter_pairs(rng: random.Random, n: int, count: int, sites: int):
    """Random sources against a small set of workplace destinations."""
    work = [rng.randrange(n) for _ in range(sites)]
    return [(rng.randrange(n), rng.choice(work)) for _ in range(count)]


def main(argv) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cols", type=int, default=100)
    ap.add_argument("--rows", type=int, default=50)
    ap.add_argument("--pairs", type=int, default=10000)
    ap.add_argument("--sites", type=int, default=12,
                    help="number of workplace destinations")
    ap.add_argument("--seed", type=int, default=3)
    args = ap.parse_args(argv)

    rng = random.Random(args.seed)
    net, _ = town_graph(rng, args.cols, args.rows, drop=0.10)
    _, travel = metrics_for(rng, net)
    print(f"town: {net.vertex_count} intersections, {net.edge_count} streets")

    index = build_index(net, seed=args.seed)
    routes = index.customize(travel, theta=0, variant="bb")
    pairs = commuter_pairs(rng, net.vertex_count, args.pairs, args.sites)

    # sequential baseline -------------------------------------------------
    warm = pairs[:300]
    for s, t in warm:
        routes.path(s, t)
    t0 = time.perf_counter()
    seq = [routes.path(s, t) for s, t in pairs]
    seq_dt = time.perf_counter() - t0
    print(f"\nsequential: {1e6 * seq_dt / len(pairs):7.1f} us/path")

    # batches of increasing size -----------------------------------------
    print(f"{'batch size':>10} {'us/path':>9} {'overlap':>8} {'speedup':>8}")
    for size in (100, 1000, len(pairs)):
        stats = BatchStats()
        t0 = time.perf_counter()
        out = []
        for off in range(0, len(pairs), size):
            out.extend(routes.batch_paths(pairs[off:off + size], stats=stats))
        dt = time.perf_counter() - t0
        assert all(a.distance == b.distance and a.path == b.path
                   for a, b in zip(out, seq))
        print(f"{size:>10} {1e6 * dt / len(pairs):>9.1f} "
              f"{100 * stats.overlap_fraction:>7.0f}% "
              f"{seq_dt / dt:>7.2f}x")

    print("\nbatched output is identical to the sequential answers")
    return 0


def run() -> None:
    raise SystemExit(main(sys.argv[1:]))


if __name__ == "__main__":
    run()
