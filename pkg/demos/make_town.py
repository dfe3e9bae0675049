"""Generate a synthetic town: a street grid with plazas and two metrics.

Writes DIMACS files ready for the command-line tools:

    <prefix>.gr        street graph weighted by length (decimeters)
    <prefix>.co        vertex coordinates (meters, integer grid)
    <prefix>.time      travel-time metric, one weight per edge line

The grid drops a fraction of its streets to create dead ends and larger
open blocks, then keeps the largest connected piece, so the output looks
closer to a scanned road network than to a perfect lattice.
"""
from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path

import numpy as np

from treeroute import RoadNetwork, largest_component, write_dimacs_gr

BLOCK_M = 80           # meters between neighboring intersections


def town_graph(rng: random.Random, cols: int, rows: int, drop: float):
    """Grid of cols x rows intersections with a share of streets removed."""
    def vid(x: int, y: int) -> int:
        return y * cols + x

    edges = []
    for y in range(rows):
        for x in range(cols):
            if x + 1 < cols:
                edges.append((vid(x, y), vid(x + 1, y)))
            if y + 1 < rows:
                edges.append((vid(x, y), vid(x, y + 1)))
    rng.shuffle(edges)
    kept = edges[int(len(edges) * drop):]
    kept.sort()
    net = RoadNetwork(cols * rows, kept)
    coords = np.array([(x * BLOCK_M, y * BLOCK_M)
                       for y in range(rows) for x in range(cols)],
                      dtype=np.float64)
    return net, coords


def metrics_for(rng: random.Random, net: RoadNetwork):
    """Length metric (decimeters) and a speed-limit travel-time metric."""
    length = np.full(net.edge_count, BLOCK_M * 10, dtype=np.int64)
    # a handful of arterial speeds; residential default
    time = np.empty(net.edge_count, dtype=np.int64)
    for e in range(net.edge_count):
        kmh = rng.choice((30, 30, 30, 50, 50, 70))
        time[e] = max(1, round(BLOCK_M * 3.6 / kmh * 10))  # tenths of a second
    return length, time


def main(argv) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cols", type=int, default=80)
    ap.add_argument("--rows", type=int, default=60)
    ap.add_argument("--drop", type=float, default=0.12,
                    help="fraction of streets to remove (default 0.12)")
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--prefix", default="town",
                    help="output path prefix (default ./town)")
    args = ap.parse_args(argv)

    rng = random.Random(args.seed)
    net, coords = town_graph(rng, args.cols, args.rows, args.drop)
    net, orig_of, _, _ = largest_component(net)
    coords = coords[orig_of]
    length, time = metrics_for(rng, net)

    prefix = Path(args.prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    gr = prefix.with_suffix(".gr")
    gr.write_text(write_dimacs_gr(net, length) + "\n")
    co_lines = [f"p aux sp co {net.vertex_count}"]
    for v in range(net.vertex_count):
        co_lines.append(f"v {v + 1} {int(coords[v, 0])} {int(coords[v, 1])}")
    prefix.with_suffix(".co").write_text("\n".join(co_lines) + "\n")
    prefix.with_suffix(".time").write_text(
        "\n".join(str(int(w)) for w in time) + "\n")

    print(f"{gr}: {net.vertex_count} intersections, {net.edge_count} streets")
    print(f"{prefix.with_suffix('.co')}: coordinates on a "
          f"{args.cols}x{args.rows} block grid")
    print(f"{prefix.with_suffix('.time')}: travel-time metric "
          f"(tenths of a second)")
    return 0


def run() -> None:
    raise SystemExit(main(sys.argv[1:]))


if __name__ == "__main__":
    run()
