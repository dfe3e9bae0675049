"""Customized cost labels over the hierarchy, with optional path arrays.

For an untruncated vertex v, ``C(v)[i]`` (1-based i up to rank(v)) is the
cheapest cost from v to its rank-i ancestor using only vertices of that
ancestor's subtree; the final entry is the zero self-distance.  Truncation
drops the arrays of vertices with at most ``theta`` descendants, trading
label size for query-time upward searching.  Path arrays ``P(v)[i]`` memoize
the first up-arc of an optimal path per label entry so chains toward a hub
can be walked without scanning.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .graph import INF
from .hierarchy import VertexOrder
from .shortcuts import CostState, ShortcutGraph


class Labeling:
    """Per-vertex label arrays; ``None`` entries mark truncated vertices."""

    __slots__ = ("theta", "untruncated", "C", "P", "P_ref", "_c_py")

    def __init__(self, theta: int, untruncated: np.ndarray,
                 C: list, P: list | None, P_ref: list | None):
        self.theta = theta
        self.untruncated = untruncated
        self.C = C
        self.P = P
        self.P_ref = P_ref
        self._c_py: list | None = None

    def cost_lists(self) -> list:
        """Python-list mirror of ``C`` for scalar-heavy query loops."""
        if self._c_py is None:
            self._c_py = [c.tolist() if c is not None else None for c in self.C]
        return self._c_py


def _label_vertex(v: int, sg: ShortcutGraph, cost: np.ndarray, C: list,
                  P: list | None, P_ref: list | None) -> None:
    tau = int(sg.order.rank[v])
    cv = np.full(tau, INF, dtype=np.int64)
    cv[tau - 1] = 0
    pv = np.full(tau - 1, -1, dtype=np.int64) if P is not None else None
    rv = np.full(tau - 1, -1, dtype=np.int64) if P_ref is not None else None
    lo, hi = sg.up_slice(v)
    for arc in range(lo, hi):
        u = int(sg.up_to[arc])
        lim = int(sg.up_rank[arc])
        cu = C[u]
        cand = np.minimum(cost[arc] + cu, INF)
        seg = cv[:lim]
        mask = cand < seg
        if not mask.any():
            continue
        seg[mask] = cand[mask]
        if pv is not None:
            pv[:lim][mask] = u
        if rv is not None:
            rv[:lim][mask] = arc
    C[v] = cv
    if P is not None:
        P[v] = pv
    if P_ref is not None:
        P_ref[v] = rv


def customize_labels(sg: ShortcutGraph, state: CostState, theta: int,
                     threads: int = 1, *, path_arrays: bool = False,
                     path_refs: bool = False) -> Labeling:
    """Fill cost labels for every vertex with more than ``theta`` descendants.

    Works root level downward: ``C(v)[i]`` minimizes ``cost(v,u) + C(u)[i]``
    over up-arcs with rank(u) >= i, ties won by the lowest-rank up-neighbor.
    Untruncatedness is closed under taking ancestors, so every dependency of
    a labeled vertex is labeled first.  Same-rank vertices are independent;
    ``threads`` only splits that per-level work (results are identical).
    """
    if path_refs and not path_arrays:
        raise ValueError("path_refs requires path_arrays")
    order = sg.order
    n = sg.vertex_count
    untruncated = order.desc_count > theta
    C: list = [None] * n
    P: list | None = [None] * n if path_arrays else None
    P_ref: list | None = [None] * n if path_refs else None
    by_rank = np.argsort(order.rank, kind="stable")
    ranks = order.rank[by_rank]
    cost = state.cost
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        for r in np.unique(ranks):
            lo = np.searchsorted(ranks, r, side="left")
            hi = np.searchsorted(ranks, r, side="right")
            group = [int(v) for v in by_rank[lo:hi] if untruncated[v]]
            if not group:
                continue
            if pool is None or len(group) < 2 * threads:
                for v in group:
                    _label_vertex(v, sg, cost, C, P, P_ref)
                continue
            step = (len(group) + threads - 1) // threads
            futs = []
            for i in range(0, len(group), step):
                chunk = group[i:i + step]
                futs.append(pool.submit(
                    lambda ch: [_label_vertex(v, sg, cost, C, P, P_ref)
                                for v in ch], chunk))
            for f in futs:
                f.result()
    finally:
        if pool is not None:
            pool.shutdown()
    return Labeling(theta, untruncated, C, P, P_ref)


def label_memory_report(labeling: Labeling, order: VertexOrder) -> dict:
    """Size accounting: total entries plus a per-tree-depth breakdown.

    Cost entries take 4 bytes; path arrays add 4 bytes per entry and path
    references another 8.
    """
    depth = order.node_depth[order.node_of]
    levels: dict[int, list[int]] = {}
    total_entries = 0
    labeled = 0
    for v in range(len(labeling.C)):
        cv = labeling.C[v]
        if cv is None:
            continue
        labeled += 1
        d = int(depth[v])
        row = levels.setdefault(d, [0, 0])
        row[0] += 1
        row[1] += len(cv)
        total_entries += len(cv)
    per_entry = 4
    if labeling.P is not None:
        per_entry += 4
    if labeling.P_ref is not None:
        per_entry += 8
    return {
        "theta": labeling.theta,
        "labeled_vertices": labeled,
        "entries": total_entries,
        "bytes": total_entries * per_entry,
        "levels": [
            {"depth": d, "vertices": c, "entries": e}
            for d, (c, e) in sorted(levels.items())
        ],
    }
