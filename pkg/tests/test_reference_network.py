"""A 15-vertex network with a fully hand-derived hierarchy and expectations.

The separator tree is wired directly (bypassing the partitioner) so every
rank, identifier, shortcut, customized cost, label, sweep state, chain, and
reconstructed path can be asserted against values worked out by hand.
"""
from __future__ import annotations

import unittest

import numpy as np

from treeroute.batch import BatchStats, batch_get_paths
from treeroute.graph import RoadNetwork, validate_metric
from treeroute.hierarchy import TreeHierarchy, TreeNode, derive_order
from treeroute.labeling import customize_labels, label_memory_report
from treeroute.paths import VARIANTS, endpoint_chain, get_path, get_variant
from treeroute.query import QueryContext, get_cost, run_query
from treeroute.shortcuts import (
    NAN_WORD,
    build_records,
    build_shortcuts,
    customize_shortcuts,
    unpack_arc,
)

(V1, V2, V3, V4, V5, V6, V7, V8,
 V9, V10, V11, V12, V13, V14, V15) = range(15)

EDGES = [
    (V1, V2, 1), (V2, V7, 2), (V1, V5, 1), (V5, V7, 2), (V7, V9, 2),
    (V9, V11, 3), (V11, V12, 1), (V11, V14, 1), (V14, V9, 2), (V7, V10, 1),
    (V10, V15, 4), (V15, V12, 2), (V3, V6, 1), (V6, V5, 1), (V13, V15, 2),
    (V13, V8, 2), (V1, V3, 3), (V9, V10, 2), (V8, V10, 2), (V5, V8, 2),
    (V4, V6, 1), (V4, V7, 2), (V7, V8, 1),
]


def reference_setup(theta, *, path_arrays=True, path_refs=True):
    net = RoadNetwork(15, [(u, v) for u, v, _ in EDGES])
    weight = {(min(u, v), max(u, v)): w for u, v, w in EDGES}
    metric = validate_metric(net, [
        weight[(int(net.edge_u[e]), int(net.edge_v[e]))]
        for e in range(net.edge_count)])

    def node(nid, parent, depth, bits, verts):
        return TreeNode(nid, parent, depth, bits, verts)

    nodes = [
        node(0, -1, 0, 0, [V7, V8]),
        node(1, 0, 1, 0, [V10, V12]),
        node(2, 1, 2, 0, [V9, V14, V11]),
        node(3, 1, 2, 1 << 62, [V15, V13]),
        node(4, 0, 1, 1 << 63, [V3, V5]),
        node(5, 4, 2, 1 << 63, [V1, V2]),
        node(6, 4, 2, (1 << 63) | (1 << 62), [V6, V4]),
    ]
    nodes[0].left, nodes[0].right = 1, 4
    nodes[1].left, nodes[1].right = 2, 3
    nodes[4].left, nodes[4].right = 5, 6
    hierarchy = TreeHierarchy(nodes, 15, beta=0.25, leaf_threshold=3)
    order = derive_order(hierarchy)
    sg = build_shortcuts(net, order)
    state = customize_shortcuts(sg, metric)
    labeling = customize_labels(sg, state, theta,
                                path_arrays=path_arrays, path_refs=path_refs)
    arena = build_records(sg, state)
    return net, metric, order, sg, state, labeling, arena


class TestOrderAndIdentifiers(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.setup = reference_setup(0)

    def test_ranks(self):
        order = self.setup[2]
        want = {V7: 1, V8: 2, V10: 3, V12: 4, V9: 5, V14: 6, V11: 7,
                V15: 5, V13: 6, V3: 3, V5: 4, V1: 5, V2: 6, V6: 5, V4: 6}
        for v, r in want.items():
            self.assertEqual(int(order.rank[v]), r, msg=f"rank of {v}")

    def test_identifiers(self):
        order = self.setup[2]
        self.assertEqual(order.identifier(V7), "")
        self.assertEqual(order.identifier(V12), "0")
        self.assertEqual(order.identifier(V15), "01")
        self.assertEqual(order.identifier(V1), "10")
        self.assertEqual(order.identifier(V4), "11")
        self.assertEqual(order.identifier(V9), "00")

    def test_rank_arrays(self):
        order = self.setup[2]
        self.assertEqual(order.rank_array(V15).tolist(), [2, 4, 5])
        self.assertEqual(order.rank_array(V1).tolist(), [2, 4, 5])
        self.assertEqual(order.rank_array(V12).tolist(), [2, 4])
        self.assertEqual(order.rank_array(V3).tolist(), [2, 3])
        self.assertEqual(order.rank_array(V5).tolist(), [2, 4])
        self.assertEqual(order.rank_array(V7).tolist(), [1])

    def test_ancestor_chains(self):
        order = self.setup[2]
        self.assertEqual(order.ancestors(V3), [V7, V8, V3])
        self.assertEqual(order.ancestors(V1), [V7, V8, V3, V5, V1])
        self.assertEqual(order.ancestors(V11),
                         [V7, V8, V10, V12, V9, V14, V11])

    def test_lca_heights(self):
        order = self.setup[2]
        self.assertEqual(order.lca_height(V1, V12), 2)
        self.assertEqual(order.lca_height(V14, V13), 4)
        self.assertEqual(order.lca_height(V1, V13), 2)
        self.assertEqual(order.lca_height(V1, V14), 2)
        self.assertEqual(order.lca_height(V2, V15), 2)
        self.assertEqual(order.lca_height(V9, V11), 5)
        # brute force across all pairs: chains intersect in a shared prefix
        anc = [set(order.ancestors(v)) for v in range(15)]
        for s in range(15):
            for t in range(15):
                self.assertEqual(order.lca_height(s, t), len(anc[s] & anc[t]),
                                 msg=f"({s},{t})")

    def test_descendant_counts(self):
        order = self.setup[2]
        want = {V7: 15, V8: 14, V10: 7, V12: 6, V9: 3, V14: 2, V11: 1,
                V15: 2, V13: 1, V3: 6, V5: 5, V1: 2, V2: 1, V6: 2, V4: 1}
        for v, c in want.items():
            self.assertEqual(int(order.desc_count[v]), c, msg=f"vertex {v}")


class TestOverlayValues(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.setup = reference_setup(0)

    def up_list(self, v):
        sg = self.setup[3]
        lo, hi = sg.up_slice(v)
        return [int(sg.up_to[i]) for i in range(lo, hi)]

    def cost_of(self, v, u):
        sg, state = self.setup[3], self.setup[4]
        arc = sg.arc_index(v, int(self.setup[2].rank[u]))
        return int(state.cost[arc]), arc

    def test_up_neighborhoods(self):
        self.assertEqual(self.up_list(V1), [V7, V3, V5])
        self.assertEqual(self.up_list(V9), [V7, V10, V12])
        self.assertEqual(self.up_list(V13), [V8, V15])
        self.assertEqual(self.up_list(V15), [V8, V10, V12])
        self.assertEqual(self.up_list(V14), [V12, V9])
        self.assertEqual(self.up_list(V5), [V7, V8, V3])
        self.assertEqual(self.up_list(V12), [V7, V8, V10])
        self.assertEqual(self.up_list(V11), [V12, V9, V14])
        self.assertEqual(self.up_list(V3), [V7, V8])
        self.assertEqual(self.up_list(V7), [])
        self.assertEqual(self.setup[3].arc_count, 34)

    def test_customized_costs_and_triangles(self):
        state = self.setup[4]
        checks = [
            # (owner, target, cost, triangle vertex or -1)
            (V1, V7, 3, V2),
            (V14, V12, 2, V11),
            (V9, V12, 4, V14),   # rank tie against V11 broken by rank order
            (V12, V7, 6, V9),
            (V3, V7, 4, V5),     # cost tie against V6 broken by rank
            (V5, V3, 2, V6),
            (V15, V8, 4, V13),
            (V6, V7, 3, V4),
            (V5, V7, 2, -1),     # original edge beats both triangles
            (V15, V12, 2, -1),
            (V12, V10, 6, V9),   # rank-5 id tie: V9 before V15
        ]
        for v, u, cost, z in checks:
            got, arc = self.cost_of(v, u)
            self.assertEqual(got, cost, msg=f"cost({v},{u})")
            self.assertEqual(int(state.prov_z[arc]), z, msg=f"z({v},{u})")

    def test_inline_records(self):
        sg, state, arena = self.setup[3], self.setup[4], self.setup[6]
        order = self.setup[2]

        def rec(v, u):
            arc = sg.arc_index(v, int(order.rank[u]))
            return arc, arena.record(arc)

        arc, r = rec(V3, V7)
        self.assertEqual([int(x) for x in r], [V6, V5] + [NAN_WORD] * 4)
        self.assertEqual(unpack_arc(sg, state, arc, arena=arena),
                         [V3, V6, V5, V7])
        arc, r = rec(V14, V12)
        self.assertEqual([int(x) for x in r], [V11] + [NAN_WORD] * 5)
        arc, r = rec(V5, V7)
        self.assertEqual([int(x) for x in r], [NAN_WORD] * 6)
        arc, r = rec(V9, V12)
        self.assertEqual([int(x) for x in r], [V14, V11] + [NAN_WORD] * 4)
        arc, r = rec(V12, V7)
        self.assertEqual([int(x) for x in r], [V11, V14, V9] + [NAN_WORD] * 3)
        self.assertEqual(unpack_arc(sg, state, arc, arena=arena),
                         [V12, V11, V14, V9, V7])


class TestLabels(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.setup = reference_setup(0)

    def test_cost_labels(self):
        C = self.setup[5].C
        want = {
            V7: [0],
            V8: [1, 0],
            V10: [1, 2, 0],
            V12: [6, 6, 6, 0],
            V3: [4, 4, 0],
            V5: [2, 2, 2, 0],
            V9: [2, 4, 2, 4, 0],
            V15: [5, 4, 4, 2, 0],
            V1: [3, 3, 3, 1, 0],
            V2: [2, 4, 4, 2, 1, 0],
            V13: [3, 2, 6, 4, 2, 0],
            V14: [4, 6, 4, 2, 2, 0],
        }
        for v, entries in want.items():
            self.assertEqual(C[v].tolist(), entries, msg=f"C({v})")

    def test_path_arrays(self):
        P = self.setup[5].P
        want = {
            V5: [V7, V8, V3],
            V9: [V7, V10, V10, V12],
            V1: [V7, V5, V3, V5],
            V13: [V8, V8, V15, V15, V15],
            V14: [V9, V9, V9, V12, V9],
        }
        for v, entries in want.items():
            self.assertEqual(P[v].tolist(), entries, msg=f"P({v})")

    def test_path_refs_agree_with_path_arrays(self):
        sg = self.setup[3]
        labeling = self.setup[5]
        for v in range(15):
            if labeling.P[v] is None:
                continue
            for i, (u, arc) in enumerate(zip(labeling.P[v],
                                             labeling.P_ref[v])):
                if int(u) < 0:
                    continue
                self.assertEqual(int(sg.up_owner[arc]), v)
                self.assertEqual(int(sg.up_to[arc]), int(u))

    def test_memory_report(self):
        rep = label_memory_report(self.setup[5], self.setup[2])
        self.assertEqual(rep["labeled_vertices"], 15)
        self.assertEqual(rep["entries"], 68)


class TestTruncatedSweep(unittest.TestCase):
    """theta=2 drops labels below the separator nodes; sweeps take over."""

    @classmethod
    def setUpClass(cls):
        cls.setup = reference_setup(2)

    def test_truncation_split(self):
        labeling = self.setup[5]
        untruncated = {V7, V8, V10, V12, V3, V5, V9}
        for v in range(15):
            self.assertEqual(bool(labeling.untruncated[v]),
                             v in untruncated, msg=f"vertex {v}")
            self.assertEqual(labeling.C[v] is not None, v in untruncated)

    def test_sweep_from_v14(self):
        ctx = QueryContext(self.setup[3], self.setup[4], self.setup[5])
        for h in (3, 4):
            view = get_cost(ctx, V14, h)
            self.assertEqual(view.c[1:], [4, 6, 4, 2, 2, 0], msg=f"h={h}")
            self.assertEqual(view.a[1:], [-1, -1, -1, V12, V9, V14])

    def test_sweep_from_v13(self):
        ctx = QueryContext(self.setup[3], self.setup[4], self.setup[5])
        view = get_cost(ctx, V13, 4)
        self.assertEqual(view.c[1:], [3, 2, 6, 4, 2, 0])
        self.assertEqual(view.a[1:], [-1, V8, V10, V12, V15, V13])
        # slot 1 was merged through V8 after V10's weaker offer
        self.assertEqual(view.ep[1], V8)

    def test_sweep_from_v1(self):
        ctx = QueryContext(self.setup[3], self.setup[4], self.setup[5])
        view = get_cost(ctx, V1, 2)
        self.assertEqual(view.c[1:], [3, 3, 3, 1, 0])
        self.assertEqual(view.a[1], -1)
        self.assertEqual(view.ep[2], V5)   # merge record
        self.assertEqual(view.ep[4], V1)   # relaxation record


class TestWorkedQueries(unittest.TestCase):
    def check_query(self, theta, s, t, want_d, want_hub_rank, want_path,
                    want_s_chain=None, want_t_chain=None):
        net, metric, order, sg, state, labeling, arena = reference_setup(theta)
        ctx = QueryContext(sg, state, labeling)
        r = run_query(ctx, s, t)
        self.assertEqual(r.distance, want_d)
        self.assertEqual(r.hub_rank, want_hub_rank)
        for name, variant in VARIANTS.items():
            if want_s_chain is not None:
                verts, _ = endpoint_chain(ctx, variant, r.side_s, r.hub_rank)
                self.assertEqual(verts, want_s_chain, msg=f"{name} s-chain")
            if want_t_chain is not None:
                verts, _ = endpoint_chain(ctx, variant, r.side_t, r.hub_rank)
                self.assertEqual(verts, want_t_chain, msg=f"{name} t-chain")
            d, path = get_path(ctx, s, t, variant, arena=arena)
            self.assertEqual(d, want_d, msg=name)
            if want_path is not None:
                self.assertEqual(path, want_path, msg=name)
            total = sum(int(metric[net.edge_id(a, b)])
                        for a, b in zip(path, path[1:]))
            self.assertEqual(total, want_d, msg=name)

    def test_v14_to_v13(self):
        self.check_query(2, V14, V13, 6, 4, [V14, V11, V12, V15, V13],
                         want_s_chain=[V14, V12],
                         want_t_chain=[V13, V15, V12])
        self.check_query(0, V14, V13, 6, 4, [V14, V11, V12, V15, V13])

    def test_v1_to_v13(self):
        for theta in (0, 2):
            self.check_query(theta, V1, V13, 5, 2, [V1, V5, V8, V13],
                             want_s_chain=[V1, V5, V8],
                             want_t_chain=[V13, V8])

    def test_v1_to_v14(self):
        self.check_query(0, V1, V14, 7, 1, [V1, V2, V7, V9, V14],
                         want_s_chain=[V1, V7],
                         want_t_chain=[V14, V9, V7])

    def test_v1_to_v12(self):
        # two shortest paths of cost 9 exist; only validity is pinned
        self.check_query(0, V1, V12, 9, 1, None)
        self.check_query(2, V1, V12, 9, 1, None)

    def test_v2_to_v15(self):
        self.check_query(0, V2, V15, 7, 1, None)

    def test_batch_on_worked_pairs(self):
        net, metric, order, sg, state, labeling, arena = reference_setup(2)
        ctx = QueryContext(sg, state, labeling)
        pairs = [(V14, V13), (V1, V13), (V1, V14), (V14, V13)]
        stats = BatchStats()
        out = batch_get_paths(ctx, pairs, get_variant("ee"), arena=arena,
                              stats=stats)
        for (s, t), (d, path) in zip(pairs, out):
            want_d, want_path = get_path(ctx, s, t, get_variant("ee"),
                                         arena=arena)
            self.assertEqual(d, want_d)
            self.assertEqual(path, want_path)
        self.assertEqual(stats.chains, 8)
        self.assertGreater(stats.reused_arcs, 0)


if __name__ == "__main__":
    unittest.main()
