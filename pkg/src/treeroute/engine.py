"""User-facing facade tying the pipeline together.

An :class:`Index` is built once per network topology: restrict to the largest
connected component, peel degree-one pendant trees, build the separator
hierarchy and the shortcut overlay.  A :class:`Customized` view binds one
metric (and one truncation/variant configuration) to that index and answers
queries in *original* vertex ids, lifting pendant endpoints onto their core
anchors and stitching the walks back into the returned paths.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .batch import BatchStats, batch_get_paths
from .graph import (
    INF,
    RoadNetwork,
    contract_degree_one,
    largest_component,
    validate_metric,
)
from .hierarchy import build_hierarchy, derive_order
from .labeling import customize_labels, label_memory_report
from .paths import Variant, get_path, get_variant
from .query import QueryContext, find_distance
from .shortcuts import build_records, build_shortcuts, customize_shortcuts

STATUS_OK = "ok"
STATUS_UNREACHABLE = "unreachable"
STATUS_NOT_INDEXED = "not-indexed"


@dataclass(frozen=True)
class RouteResult:
    """Answer to one query in original vertex ids.

    ``status`` is ``"ok"``, ``"unreachable"`` (no connecting path), or
    ``"not-indexed"`` (an endpoint lies outside the indexed component).
    ``distance`` is ``INF`` unless the status is ``"ok"``; ``path`` is only
    populated for path queries.
    """

    distance: int
    path: list | None
    status: str

    @property
    def reachable(self) -> bool:
        return self.status == STATUS_OK


class Index:
    """Metric-independent preprocessing product for one road network."""

    def __init__(self, network, sub, sub_orig_of, sub_core_of, sub_edge_orig,
                 core, reattach, hierarchy, order, sg,
                 beta, seed, leaf_threshold):
        self.network = network
        self.sub = sub                      # largest component, own numbering
        self.sub_orig_of = sub_orig_of      # sub id -> original id
        self.sub_core_of = sub_core_of      # original id -> sub id (-1 outside)
        self.sub_edge_orig = sub_edge_orig  # sub edge id -> original edge id
        self.core = core                    # pendant-free core, own numbering
        self.reattach = reattach            # sub <-> core plus pendant parents
        self.hierarchy = hierarchy
        self.order = order
        self.sg = sg
        self.beta = beta
        self.seed = seed
        self.leaf_threshold = leaf_threshold

    def customize(self, metric, *, theta: int = 0, variant="bn", k: int = 6,
                  threads: int = 1) -> "Customized":
        """Bind one metric to the index.

        Parameters
        ----------
        metric : array-like
            One weight per *original* edge id.
        theta : int
            Truncation threshold: vertices whose separator-descendant count
            is ``theta`` or less carry no distance labels and are answered by
            upward sweeps instead.
        variant : str or Variant
            Path-reconstruction strategy (see :data:`treeroute.paths.VARIANTS`).
        k : int
            Unpacking-record width (interior vertices stored inline).
        threads : int
            Worker threads for the customization passes.
        """
        if isinstance(variant, str):
            variant = get_variant(variant)
        metric = validate_metric(self.network, metric)
        sub_metric = np.asarray(metric, dtype=np.int64)[self.sub_edge_orig]
        core_metric = self.reattach.core_metric(sub_metric)
        state = customize_shortcuts(self.sg, core_metric, threads=threads)
        labeling = customize_labels(
            self.sg, state, theta, threads=threads,
            path_arrays=variant.needs_path_arrays,
            path_refs=variant.needs_path_refs)
        arena = build_records(self.sg, state, k=k) if variant.use_records else None
        return Customized(self, metric, sub_metric, state, labeling, arena,
                          variant, theta, k)

    def report(self) -> dict:
        depth = max(node.depth for node in self.hierarchy.nodes)
        return {
            "vertices": self.network.vertex_count,
            "edges": self.network.edge_count,
            "indexed_vertices": len(self.sub_orig_of),
            "core_vertices": self.core.vertex_count,
            "core_edges": self.core.edge_count,
            "tree_nodes": len(self.hierarchy.nodes),
            "tree_depth": int(depth),
            "max_rank": int(self.order.max_rank),
            "arcs": int(self.sg.arc_count),
            "original_arcs": int(np.count_nonzero(self.sg.up_orig >= 0)),
            "beta": self.beta,
            "seed": self.seed,
            "leaf_threshold": self.leaf_threshold,
        }


def build_index(network: RoadNetwork, *, beta: float = 0.25, seed: int = 0,
                leaf_threshold: int = 16) -> Index:
    """Run the metric-independent pipeline on ``network``."""
    sub, sub_orig_of, sub_core_of, sub_edge_orig = largest_component(network)
    core, reattach = contract_degree_one(sub)
    hierarchy = build_hierarchy(core, beta=beta, seed=seed,
                                leaf_threshold=leaf_threshold)
    order = derive_order(hierarchy)
    sg = build_shortcuts(core, order)
    return Index(network, sub, sub_orig_of, sub_core_of, sub_edge_orig,
                 core, reattach, hierarchy, order, sg,
                 beta, seed, leaf_threshold)


class Customized:
    """One metric bound to an :class:`Index`; answers original-id queries."""

    def __init__(self, index, metric, sub_metric, state, labeling, arena,
                 variant: Variant, theta: int, k: int,
                 context: QueryContext | None = None):
        self.index = index
        self.metric = metric
        self.sub_metric = sub_metric
        self.state = state
        self.labeling = labeling
        self.arena = arena
        self.variant = variant
        self.theta = theta
        self.k = k
        # several variant views over one (state, labeling) may pass the same
        # context so cached sweeps and packed labels are shared
        if context is None:
            context = QueryContext(index.sg, state, labeling)
        self.context = context
        # plain-list id maps: scalar numpy indexing is slow on hot paths
        self._orig_py = index.sub_orig_of.tolist()
        self._core_sub_py = index.reattach.orig_of.tolist()
        self._sub_of_py = index.sub_core_of.tolist()

    # -- endpoint translation ------------------------------------------------

    def _walk_cost(self, sub_path) -> int:
        sub = self.index.sub
        w = self.sub_metric
        return sum(int(w[sub.edge_id(a, b)])
                   for a, b in zip(sub_path, sub_path[1:]))

    def _tree_route(self, s_path, t_path):
        # both walks end at the shared anchor; drop the common tail so the
        # route turns around at the meet vertex instead of the anchor
        ls, lt = len(s_path), len(t_path)
        k = 0
        while k < ls and k < lt and s_path[ls - 1 - k] == t_path[lt - 1 - k]:
            k += 1
        t_part = t_path[:lt - k + 1]
        path = s_path[:ls - k + 1] + t_part[-2::-1]
        return self._walk_cost(path), path

    def _to_original(self, sub_path):
        so = self._orig_py
        return [so[v] for v in sub_path]

    def _stitch(self, s_path, s_cost, t_path, t_cost, d_core, core_path):
        if core_path is None:
            return RouteResult(INF, None, STATUS_UNREACHABLE)
        core_sub = self._core_sub_py
        sub_path = (s_path + [core_sub[c] for c in core_path[1:]]
                    + t_path[-2::-1])
        return RouteResult(s_cost + d_core + t_cost,
                           self._to_original(sub_path), STATUS_OK)

    def _route(self, s: int, t: int, want_path: bool) -> RouteResult:
        n = self.index.network.vertex_count
        if not (0 <= s < n and 0 <= t < n):
            raise ValueError(f"query ({s},{t}) out of range for n={n}")
        if s == t:
            return RouteResult(0, [s] if want_path else None, STATUS_OK)
        ss = self._sub_of_py[s]
        tt = self._sub_of_py[t]
        if ss < 0 or tt < 0:
            return RouteResult(INF, None, STATUS_NOT_INDEXED)
        reattach = self.index.reattach
        sa, s_cost, s_path = reattach.pendant_path(ss, self.sub_metric)
        ta, t_cost, t_path = reattach.pendant_path(tt, self.sub_metric)
        if sa == ta:
            d, sub_path = self._tree_route(s_path, t_path)
            return RouteResult(d, self._to_original(sub_path) if want_path
                               else None, STATUS_OK)
        cs = int(reattach.core_of[sa])
        ct = int(reattach.core_of[ta])
        if want_path:
            d_core, core_path = get_path(self.context, cs, ct, self.variant,
                                         arena=self.arena)
            return self._stitch(s_path, s_cost, t_path, t_cost,
                                d_core, core_path)
        d_core, _ = find_distance(self.context, cs, ct)
        if d_core >= INF:
            return RouteResult(INF, None, STATUS_UNREACHABLE)
        return RouteResult(s_cost + d_core + t_cost, None, STATUS_OK)

    # -- public query surface ------------------------------------------------

    def distance(self, s: int, t: int) -> RouteResult:
        """Shortest-path cost between original ids ``s`` and ``t``."""
        return self._route(s, t, want_path=False)

    def path(self, s: int, t: int) -> RouteResult:
        """Shortest path between original ids ``s`` and ``t``."""
        return self._route(s, t, want_path=True)

    def batch_paths(self, pairs, stats: BatchStats | None = None):
        """Answer many path queries, sharing unpacking work across them.

        Returns one :class:`RouteResult` per pair, in submission order.
        """
        results: list[RouteResult | None] = [None] * len(pairs)
        jobs = []
        core_pairs = []
        reattach = self.index.reattach
        n = self.index.network.vertex_count
        for i, (s, t) in enumerate(pairs):
            if not (0 <= s < n and 0 <= t < n):
                raise ValueError(f"query ({s},{t}) out of range for n={n}")
            if s == t:
                results[i] = RouteResult(0, [s], STATUS_OK)
                continue
            ss = self._sub_of_py[s]
            tt = self._sub_of_py[t]
            if ss < 0 or tt < 0:
                results[i] = RouteResult(INF, None, STATUS_NOT_INDEXED)
                continue
            sa, s_cost, s_path = reattach.pendant_path(ss, self.sub_metric)
            ta, t_cost, t_path = reattach.pendant_path(tt, self.sub_metric)
            if sa == ta:
                d, sub_path = self._tree_route(s_path, t_path)
                results[i] = RouteResult(d, self._to_original(sub_path),
                                         STATUS_OK)
                continue
            jobs.append((i, s_path, s_cost, t_path, t_cost))
            core_pairs.append((int(reattach.core_of[sa]),
                               int(reattach.core_of[ta])))
        answers = batch_get_paths(self.context, core_pairs, self.variant,
                                  arena=self.arena, stats=stats)
        for (i, s_path, s_cost, t_path, t_cost), (d_core, core_path) in zip(
                jobs, answers):
            results[i] = self._stitch(s_path, s_cost, t_path, t_cost,
                                      d_core, core_path)
        return results

    def report(self) -> dict:
        rep = self.index.report()
        rep.update({
            "theta": self.theta,
            "variant": self.variant.name,
            "record_width": self.k if self.arena is not None else None,
        })
        rep["labels"] = label_memory_report(self.labeling, self.index.order)
        return rep
