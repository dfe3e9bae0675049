"""Walk the full engine lifecycle on a generated town grid.

One preprocessing pass serves any number of metrics: the demo builds the
index once, then binds a length metric and a travel-time metric, compares
label sizes across truncation thresholds, answers point-to-point queries
(verified against plain Dijkstra), reconstructs paths, runs a shared batch,
and round-trips the whole customized index through a file.

Run:  python3 demos/quickstart.py
"""
from __future__ import annotations

import argparse
import random
import sys
import tempfile
import time
from pathlib import Path

from treeroute import (
    INF,
    build_index,
    dijkstra,
    label_memory_report,
    load_index,
    save_index,
)
from treeroute.batch import BatchStats

from make_town import metrics_for, town_graph


def banner(title: str) -> None:
    print()
    print(f"== {title} " + "=" * max(0, 60 - len(title)))


def main(argv) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cols", type=int, default=70)
    ap.add_argument("--rows", type=int, default=50)
    ap.add_argument("--seed", type=int, default=11)
    args = ap.parse_args(argv)

    rng = random.Random(args.seed)
    net, _coords = town_graph(rng, args.cols, args.rows, drop=0.12)
    length, travel = metrics_for(rng, net)

    # -- metric-independent preprocessing --------------------------------
    banner("preprocess once")
    t0 = time.perf_counter()
    index = build_index(net, seed=args.seed)
    rep = index.report()
    print(f"built in {time.perf_counter() - t0:.2f}s: "
          f"{rep['vertices']} vertices, {rep['edges']} edges")
    print(f"separator tree: {rep['tree_nodes']} nodes, "
          f"depth {rep['tree_depth']}, tallest root path {rep['max_rank']}")
    print(f"shortcut overlay: {rep['arcs']} upward arcs "
          f"({rep['original_arcs']} carry original edges)")

    # -- bind two metrics to the same index ------------------------------
    banner("customize per metric")
    by_length = index.customize(length, theta=0)
    t0 = time.perf_counter()
    by_time = index.customize(travel, theta=100, variant="ee")
    print(f"travel-time customization: {time.perf_counter() - t0:.2f}s")
    for name, cz in (("length", by_length), ("travel", by_time)):
        info = label_memory_report(cz.labeling, index.order)
        print(f"  {name:>7}: theta={cz.theta:<4} "
              f"label entries {info['entries']:>9,}")

    # -- distances, verified against Dijkstra ----------------------------
    banner("query")
    for trial in range(5):
        s = rng.randrange(net.vertex_count)
        t = rng.randrange(net.vertex_count)
        want, _ = dijkstra(net, travel, s, t)
        got = by_time.distance(s, t)
        ok = "ok" if got.distance == want else "MISMATCH"
        print(f"  {s:>5} -> {t:<5} travel {got.distance:>6}  "
              f"dijkstra {want:>6}  {ok}")
        assert got.distance == want

    r = by_time.path(rng.randrange(net.vertex_count),
                     rng.randrange(net.vertex_count))
    print(f"  sample path: {len(r.path) - 1} edges, cost {r.distance}")
    print(f"  first hops: {' -> '.join(str(v) for v in r.path[:6])} ...")

    # -- batched reconstruction ------------------------------------------
    banner("batch")
    hub = rng.randrange(net.vertex_count)
    pairs = [(rng.randrange(net.vertex_count), hub) for _ in range(2000)]
    stats = BatchStats()
    t0 = time.perf_counter()
    results = by_time.batch_paths(pairs, stats=stats)
    dt = time.perf_counter() - t0
    print(f"  {len(pairs)} paths to one destination in {dt:.2f}s "
          f"({1e6 * dt / len(pairs):.0f}us each)")
    print(f"  expansion reuse: {100 * stats.overlap_fraction:.0f}% of "
          f"{stats.total_arcs:,} arcs came from a neighboring chain")
    sample = results[17]
    check = by_time.path(*pairs[17])
    assert sample.distance == check.distance and sample.path == check.path

    # -- serialization ----------------------------------------------------
    banner("save / load")
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "town.trx"
        save_index(path, index, by_time)
        print(f"  wrote {path.stat().st_size:,} bytes")
        _index2, loaded = load_index(path)
        for _ in range(200):
            s = rng.randrange(net.vertex_count)
            t = rng.randrange(net.vertex_count)
            a = by_time.distance(s, t)
            b = loaded.distance(s, t)
            assert (a.distance, a.status) == (b.distance, b.status)
        print("  reloaded answers match on 200 random pairs")

    print()
    print("all checks passed")
    return 0


def run() -> None:
    raise SystemExit(main(sys.argv[1:]))


if __name__ == "__main__":
    run()
