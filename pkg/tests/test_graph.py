"""Tests for the base graph layer: parsing, Dijkstra oracles, contraction."""
from __future__ import annotations

import random
import unittest

import numpy as np
from scipy.sparse.csgraph import dijkstra as scipy_dijkstra

from treeroute.graph import (
    INF,
    QuerySet,
    RoadNetwork,
    approx_max_distance,
    connected_components,
    contract_degree_one,
    dijkstra,
    dijkstra_sssp,
    generate_query_sets,
    largest_component,
    parse_dimacs_co,
    parse_dimacs_gr,
    sat_add,
    to_scipy_csr,
    validate_metric,
    write_dimacs_gr,
)


def random_connected_network(rng: random.Random, n: int, extra: int):
    """Random spanning tree plus ``extra`` chords, weights in 1..1000."""
    edges = []
    seen = set()
    for v in range(1, n):
        u = rng.randrange(v)
        edges.append((u, v))
        seen.add((u, v))
    tries = 0
    while extra > 0 and tries < 50 * extra:
        tries += 1
        u, v = rng.randrange(n), rng.randrange(n)
        if u == v:
            continue
        key = (min(u, v), max(u, v))
        if key in seen:
            continue
        seen.add(key)
        edges.append(key)
        extra -= 1
    net = RoadNetwork(n, edges)
    metric = np.array([rng.randint(1, 1000) for _ in range(net.edge_count)],
                      dtype=np.uint32)
    return net, metric


class TestRoadNetwork(unittest.TestCase):
    def test_basic_topology(self):
        net = RoadNetwork(4, [(0, 1), (2, 1), (2, 3), (0, 3)])
        self.assertEqual(net.vertex_count, 4)
        self.assertEqual(net.edge_count, 4)
        # canonical storage is u < v, edge ids in sorted pair order
        self.assertEqual(list(net.edge_u), [0, 0, 1, 2])
        self.assertEqual(list(net.edge_v), [1, 3, 2, 3])
        self.assertEqual(net.degree(0), 2)
        self.assertEqual(sorted(int(x) for x in net.neighbors(2)), [1, 3])
        self.assertTrue(net.has_edge(1, 0))
        self.assertFalse(net.has_edge(0, 2))
        self.assertEqual(net.edge_id(3, 2), 3)
        self.assertEqual(net.edge_id(0, 2), -1)

    def test_rejects_bad_edges(self):
        with self.assertRaises(ValueError):
            RoadNetwork(3, [(0, 0)])
        with self.assertRaises(ValueError):
            RoadNetwork(3, [(0, 1), (1, 0)])
        with self.assertRaises(ValueError):
            RoadNetwork(3, [(0, 3)])

    def test_sat_add_clamps(self):
        self.assertEqual(sat_add(2, 3), 5)
        self.assertEqual(sat_add(INF, 1), INF)
        self.assertEqual(sat_add(INF - 1, 5), INF)

    def test_validate_metric(self):
        net = RoadNetwork(3, [(0, 1), (1, 2)])
        m = validate_metric(net, [5, 7])
        self.assertEqual(m.dtype, np.uint32)
        with self.assertRaises(ValueError):
            validate_metric(net, [5])
        with self.assertRaises(ValueError):
            validate_metric(net, [0, 7])
        with self.assertRaises(ValueError):
            validate_metric(net, [5, INF])


class TestDimacs(unittest.TestCase):
    GR = """\
c example graph
p sp 3 4
a 1 2 5
a 2 1 5
a 2 3 7
a 3 2 6
"""

    def test_parse_merges_antiparallel(self):
        net, metric = parse_dimacs_gr(self.GR.splitlines())
        self.assertEqual(net.vertex_count, 3)
        self.assertEqual(net.edge_count, 2)
        # antiparallel arcs with unequal cost keep the minimum
        self.assertEqual(int(metric[net.edge_id(1, 2)]), 6)
        self.assertEqual(int(metric[net.edge_id(0, 1)]), 5)

    def test_parse_errors_carry_line_numbers(self):
        with self.assertRaisesRegex(ValueError, "line 3"):
            parse_dimacs_gr(["c x", "p sp 2 1", "a 1 2 0"])
        with self.assertRaisesRegex(ValueError, "line 2"):
            parse_dimacs_gr(["c x", "a 1 2 4"])
        with self.assertRaisesRegex(ValueError, "line 3"):
            parse_dimacs_gr(["c", "p sp 2 1", "a 1 5 4"])

    def test_roundtrip(self):
        rng = random.Random(7)
        net, metric = random_connected_network(rng, 40, 30)
        text = write_dimacs_gr(net, metric)
        net2, metric2 = parse_dimacs_gr(text.splitlines())
        self.assertEqual(net2.vertex_count, net.vertex_count)
        self.assertEqual(net2.edge_count, net.edge_count)
        np.testing.assert_array_equal(net2.edge_u, net.edge_u)
        np.testing.assert_array_equal(net2.edge_v, net.edge_v)
        np.testing.assert_array_equal(metric2, metric)

    def test_parse_coordinates(self):
        co = ["c coords", "p aux sp co 3", "v 1 -100 250", "v 2 10 20", "v 3 0 0"]
        xy = parse_dimacs_co(co)
        self.assertEqual(xy.shape, (3, 2))
        self.assertEqual(xy[0, 0], -100.0)
        self.assertEqual(xy[1, 1], 20.0)


class TestDijkstra(unittest.TestCase):
    def test_tiny_path(self):
        net = RoadNetwork(3, [(0, 1), (1, 2)])
        metric = validate_metric(net, [5, 6])
        d, path = dijkstra(net, metric, 0, 2)
        self.assertEqual(d, 11)
        self.assertEqual(path, [0, 1, 2])

    def test_source_equals_target(self):
        net = RoadNetwork(3, [(0, 1), (1, 2)])
        metric = validate_metric(net, [5, 6])
        self.assertEqual(dijkstra(net, metric, 1, 1), (0, [1]))

    def test_unreachable(self):
        net = RoadNetwork(4, [(0, 1), (2, 3)])
        metric = validate_metric(net, [1, 1])
        d, path = dijkstra(net, metric, 0, 3)
        self.assertEqual(d, INF)
        self.assertIsNone(path)
        dist, parent = dijkstra_sssp(net, metric, 0)
        self.assertEqual(int(dist[3]), INF)
        self.assertEqual(int(parent[3]), -1)

    def test_matches_scipy_on_random_graphs(self):
        rng = random.Random(20260823)
        for trial in range(10):
            net, metric = random_connected_network(rng, 60, 40)
            mat = to_scipy_csr(net, metric)
            ref = scipy_dijkstra(mat, directed=False, indices=range(6))
            for s in range(6):
                dist, parent = dijkstra_sssp(net, metric, s)
                np.testing.assert_array_equal(dist, ref[s].astype(np.int64))
                # parents encode a shortest-path tree
                for v in range(net.vertex_count):
                    if v == s:
                        continue
                    p = int(parent[v])
                    e = net.edge_id(p, v)
                    self.assertGreaterEqual(e, 0)
                    self.assertEqual(int(dist[v]), int(dist[p]) + int(metric[e]))

    def test_single_pair_path_is_valid(self):
        rng = random.Random(11)
        for trial in range(20):
            net, metric = random_connected_network(rng, 50, 25)
            s, t = rng.randrange(50), rng.randrange(50)
            d, path = dijkstra(net, metric, s, t)
            dist, _ = dijkstra_sssp(net, metric, s)
            self.assertEqual(d, int(dist[t]))
            self.assertEqual(path[0], s)
            self.assertEqual(path[-1], t)
            total = 0
            for a, b in zip(path, path[1:]):
                e = net.edge_id(a, b)
                self.assertGreaterEqual(e, 0)
                total += int(metric[e])
            self.assertEqual(total, d)


class TestComponentsAndContraction(unittest.TestCase):
    def test_largest_component_extraction(self):
        net = RoadNetwork(7, [(0, 1), (1, 2), (3, 4), (5, 6), (4, 3 + 0)][:4])
        ncomp, labels = connected_components(net)
        self.assertEqual(ncomp, 3)
        sub, orig_of, core_of, sub_edge_orig = largest_component(net)
        self.assertEqual(sub.vertex_count, 3)
        self.assertEqual(list(orig_of), [0, 1, 2])
        self.assertEqual(int(core_of[5]), -1)

    def test_contract_path_to_single_vertex(self):
        # a tree contracts all the way down to one core vertex
        net = RoadNetwork(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
        core, remap = contract_degree_one(net)
        self.assertEqual(core.vertex_count, 1)
        self.assertEqual(core.edge_count, 0)
        metric = validate_metric(net, [2, 3, 4, 5])
        anchor, cost, path = remap.pendant_path(0, metric)
        self.assertEqual(path[0], 0)
        self.assertEqual(anchor, path[-1])
        self.assertEqual(cost, sum(int(metric[net.edge_id(a, b)])
                                   for a, b in zip(path, path[1:])))

    def test_contract_cycle_unchanged(self):
        net = RoadNetwork(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
        core, remap = contract_degree_one(net)
        self.assertEqual(core.vertex_count, 4)
        self.assertEqual(core.edge_count, 4)
        for v in range(4):
            self.assertTrue(remap.in_core(v))

    def test_contraction_preserves_distances(self):
        rng = random.Random(99)
        for trial in range(8):
            net, metric = random_connected_network(rng, 50, 12)
            core, remap = contract_degree_one(net)
            core_metric = remap.core_metric(metric)
            for _ in range(25):
                s, t = rng.randrange(50), rng.randrange(50)
                want, _ = dijkstra(net, metric, s, t)
                sa, sc, _ = remap.pendant_path(s, metric)
                ta, tc, _ = remap.pendant_path(t, metric)
                if sa == ta:
                    # both hang off the same anchor: distance runs inside trees
                    got, _ = dijkstra(net, metric, s, t)
                    self.assertEqual(got, want)
                    continue
                mid, _ = dijkstra(core, core_metric,
                                  int(remap.core_of[sa]), int(remap.core_of[ta]))
                self.assertEqual(sc + mid + tc, want)

    def test_pendant_same_anchor_distance(self):
        # two leaves on one anchor: core distance is zero, tree walks differ
        net = RoadNetwork(5, [(0, 1), (0, 2), (0, 3), (3, 4), (1, 2)])
        # metric indexes canonical edge ids: (0,1) (0,2) (0,3) (1,2) (3,4)
        metric = validate_metric(net, [4, 1, 2, 7, 3])
        core, remap = contract_degree_one(net)
        a3, c3, p3 = remap.pendant_path(4, metric)
        self.assertEqual(a3, 0)
        self.assertEqual(c3, 5)
        self.assertEqual(p3, [4, 3, 0])


class TestQueryGeneration(unittest.TestCase):
    def _grid(self, w: int, h: int):
        edges = []
        for y in range(h):
            for x in range(w):
                v = y * w + x
                if x + 1 < w:
                    edges.append((v, v + 1))
                if y + 1 < h:
                    edges.append((v, v + w))
        coords = np.array([[x, y] for y in range(h) for x in range(w)],
                          dtype=np.float64)
        return RoadNetwork(w * h, edges), coords

    def test_double_sweep_on_weighted_path(self):
        net = RoadNetwork(4, [(0, 1), (1, 2), (2, 3)])
        metric = validate_metric(net, [1000, 1000, 1000])
        self.assertEqual(approx_max_distance(net, metric), 3000)

    def test_sets_cover_distance_range(self):
        rng = random.Random(5)
        net, coords = self._grid(20, 20)
        metric = np.array([rng.randint(200, 1000) for _ in range(net.edge_count)],
                          dtype=np.uint32)
        sets = generate_query_sets(net, metric, coords, 30, sets=10,
                                   l_min=1000, seed=42)
        self.assertEqual(len(sets), 10)
        lmax = approx_max_distance(net, metric, coords=coords)
        x = (lmax / 1000.0) ** 0.1
        lo = 1000.0
        for i, qs in enumerate(sets):
            self.assertIsInstance(qs, QuerySet)
            self.assertAlmostEqual(qs.lo, lo, places=6)
            self.assertAlmostEqual(qs.hi, lo * x, places=6)
            self.assertGreater(len(qs.pairs), 0)
            for s, t in qs.pairs:
                d, _ = dijkstra(net, metric, s, t)
                self.assertGreaterEqual(d, qs.lo - 1e-9)
                self.assertLess(d, qs.hi + 1e-9)
            lo *= x

    def test_generation_is_deterministic(self):
        net, coords = self._grid(12, 12)
        metric = np.full(net.edge_count, 500, dtype=np.uint32)
        a = generate_query_sets(net, metric, coords, 10, sets=10, seed=3)
        b = generate_query_sets(net, metric, coords, 10, sets=10, seed=3)
        self.assertEqual([qs.pairs for qs in a], [qs.pairs for qs in b])


if __name__ == "__main__":
    unittest.main()
