"""Command-line interface.

Subcommands cover the full lifecycle: ``preprocess`` builds the
metric-independent index from a DIMACS ``.gr`` graph, ``customize`` binds a
metric (plus truncation threshold and path variant), ``query``/``batch``
answer pair files, ``gen-queries`` samples distance-stratified benchmark
pairs, and ``report`` summarizes an index file.

Path answers are printed one per line as ``<cost> <len> v0 v1 ... vlen``
where ``len`` counts edges; unreachable or unindexed pairs print their
status word instead.
"""
from __future__ import annotations

import argparse
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .batch import BatchStats
from .engine import STATUS_OK, build_index
from .graph import (
    dijkstra,
    generate_query_sets,
    parse_dimacs_co,
    parse_dimacs_gr,
    validate_metric,
)
from .index_io import IndexFormatError, describe_sections, load_index, save_index
from .paths import VARIANTS


def _info(msg: str) -> None:
    print(msg, file=sys.stderr)


def _read_pairs(path):
    pairs = []
    with open(path) as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{ln}: expected '<s> <t>'")
            pairs.append((int(parts[0]), int(parts[1])))
    return pairs


def _read_metric(path, network):
    """One weight per line, or a DIMACS ``.gr`` with matching topology."""
    if str(path).endswith(".gr"):
        with open(path) as fh:
            net2, metric = parse_dimacs_gr(fh)
        if (net2.vertex_count != network.vertex_count
                or net2.edge_count != network.edge_count
                or not np.array_equal(net2.edge_u, network.edge_u)
                or not np.array_equal(net2.edge_v, network.edge_v)):
            raise ValueError(f"{path}: graph topology does not match the index")
        return metric
    values = []
    with open(path) as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            values.append(int(line.split()[0]))
    return validate_metric(network, values)


def _load_customized(path):
    index, cz = load_index(path)
    if cz is None:
        raise ValueError(
            f"{path}: index has no customized state; run 'customize' first")
    return index, cz


def _format_result(r, distance_only: bool) -> str:
    if r.status != STATUS_OK:
        return r.status
    if distance_only:
        return str(r.distance)
    verts = " ".join(str(v) for v in r.path)
    return f"{r.distance} {len(r.path) - 1} {verts}"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_preprocess(args) -> int:
    with open(args.graph) as fh:
        network, _ = parse_dimacs_gr(fh)
    t0 = time.perf_counter()
    index = build_index(network, beta=args.beta, seed=args.seed,
                        leaf_threshold=args.leaf_threshold)
    _info(f"preprocessed {network.vertex_count} vertices "
          f"({index.core.vertex_count} in core, "
          f"{index.sg.arc_count} shortcut arcs) "
          f"in {time.perf_counter() - t0:.2f}s")
    save_index(args.out, index)
    _info(f"wrote {args.out}")
    return 0


def cmd_customize(args) -> int:
    if args.k > 6 and not args.allow_wide_records:
        _info(f"record width k={args.k} exceeds 6 words per arc; "
              "pass --allow-wide-records to confirm")
        return 1
    index, _ = load_index(args.index)
    metric = _read_metric(args.metric, index.network)
    t0 = time.perf_counter()
    cz = index.customize(metric, theta=args.theta, variant=args.variant,
                         k=args.k, threads=args.threads)
    _info(f"customized (theta={args.theta}, variant={args.variant}) "
          f"in {time.perf_counter() - t0:.2f}s")
    out = args.out if args.out is not None else args.index
    save_index(out, index, cz)
    _info(f"wrote {out}")
    return 0


def _answer_pairs(cz, pairs, threads, distance_only):
    route = cz.distance if distance_only else cz.path
    if threads <= 1 or len(pairs) < 2 * threads:
        return [route(s, t) for s, t in pairs]
    step = (len(pairs) + threads - 1) // threads
    chunks = [pairs[i:i + step] for i in range(0, len(pairs), step)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = pool.map(lambda ch: [route(s, t) for s, t in ch], chunks)
        return [r for part in parts for r in part]


def cmd_query(args) -> int:
    index, cz = _load_customized(args.index)
    pairs = _read_pairs(args.pairs)
    t0 = time.perf_counter()
    results = _answer_pairs(cz, pairs, args.threads, args.distance_only)
    dt = time.perf_counter() - t0
    for r in results:
        print(_format_result(r, args.distance_only))
    _info(f"{len(pairs)} queries in {dt:.3f}s")
    if args.verify:
        bad = 0
        for (s, t), r in zip(pairs, results):
            want, _ = dijkstra(index.network, cz.metric, s, t)
            if r.status == STATUS_OK and r.distance != want:
                _info(f"MISMATCH ({s},{t}): got {r.distance}, want {want}")
                bad += 1
        if bad:
            return 1
        _info("verified against Dijkstra")
    return 0


def cmd_batch(args) -> int:
    _, cz = _load_customized(args.index)
    pairs = _read_pairs(args.pairs)
    stats = BatchStats()
    t0 = time.perf_counter()
    for lo in range(0, len(pairs), args.batch_size):
        for r in cz.batch_paths(pairs[lo:lo + args.batch_size], stats=stats):
            print(_format_result(r, distance_only=False))
    dt = time.perf_counter() - t0
    _info(f"{len(pairs)} queries in {dt:.3f}s "
          f"(batch size {args.batch_size}, "
          f"arc reuse {100.0 * stats.overlap_fraction:.1f}%)")
    return 0


def cmd_gen_queries(args) -> int:
    index, cz = _load_customized(args.index)
    coords = None
    if args.co is not None:
        with open(args.co) as fh:
            coords = parse_dimacs_co(fh)
    sets = generate_query_sets(index.network, cz.metric, coords,
                               args.per_set, sets=args.sets,
                               l_min=args.l_min, seed=args.seed)
    lines = []
    for i, qs in enumerate(sets, start=1):
        lines.append(f"# set {i}: distance in ({qs.lo:.0f}, {qs.hi:.0f}], "
                     f"{len(qs.pairs)} pairs")
        lines.extend(f"{s} {t}" for s, t in qs.pairs)
    text = "\n".join(lines) + "\n"
    if args.out is not None:
        Path(args.out).write_text(text)
        _info(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_report(args) -> int:
    index, cz = load_index(args.index)
    print(f"index file: {args.index}")
    for name, size in describe_sections(args.index):
        print(f"  section {name:<8} {size:>12} bytes")
    rep = cz.report() if cz is not None else index.report()
    labels = rep.pop("labels", None)
    for key in sorted(rep):
        print(f"{key}: {rep[key]}")
    if labels is not None:
        print(f"label entries: {labels['entries']} "
              f"({labels['bytes']} bytes over {labels['labeled_vertices']} "
              "vertices)")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treeroute",
        description="customizable shortest-path engine for road networks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess",
                       help="build the metric-independent index from a .gr file")
    p.add_argument("--graph", required=True, help="DIMACS .gr input")
    p.add_argument("--beta", type=float, default=0.25,
                   help="separator balance parameter in (0, 0.5)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--leaf-threshold", type=int, default=16,
                   help="stop splitting below this many vertices")
    p.add_argument("--out", required=True, help="output index file")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("customize", help="bind an edge metric to an index")
    p.add_argument("--index", required=True)
    p.add_argument("--metric", required=True,
                   help="one weight per line, or a .gr with matching topology")
    p.add_argument("--theta", type=int, default=0,
                   help="label truncation threshold")
    p.add_argument("--variant", choices=sorted(VARIANTS), default="bn",
                   help="path reconstruction variant")
    p.add_argument("--k", type=int, default=6,
                   help="inline record width (interior vertices per arc)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--allow-wide-records", action="store_true",
                   help="permit k > 6 (wider per-arc records)")
    p.add_argument("--out", default=None,
                   help="output file (default: rewrite --index in place)")
    p.set_defaults(func=cmd_customize)

    p = sub.add_parser("query", help="answer '<s> <t>' pairs from a file")
    p.add_argument("--index", required=True)
    p.add_argument("--pairs", required=True)
    p.add_argument("--distance-only", action="store_true",
                   help="print costs without reconstructing paths")
    p.add_argument("--verify", action="store_true",
                   help="cross-check answers against Dijkstra (slow)")
    p.add_argument("--threads", type=int, default=1,
                   help="concurrent query workers over the shared index")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("batch", help="answer path queries in shared batches")
    p.add_argument("--index", required=True)
    p.add_argument("--pairs", required=True)
    p.add_argument("--batch-size", type=int, default=1000)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("gen-queries",
                       help="sample distance-stratified benchmark pairs")
    p.add_argument("--index", required=True)
    p.add_argument("--co", default=None,
                   help="DIMACS .co coordinates (guides the diameter sweep)")
    p.add_argument("--sets", type=int, default=10)
    p.add_argument("--per-set", type=int, required=True)
    p.add_argument("--l-min", type=int, default=1000,
                   help="upper bound of the first distance band")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="write pairs here (default: stdout)")
    p.set_defaults(func=cmd_gen_queries)

    p = sub.add_parser("report", help="summarize an index file")
    p.add_argument("--index", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, IndexFormatError) as exc:
        _info(f"error: {exc}")
        return 1


def run() -> None:
    raise SystemExit(main(sys.argv[1:]))


if __name__ == "__main__":
    run()
