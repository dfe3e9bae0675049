"""Point-to-point distance queries over a customized hierarchy.

A query meets at some common ancestor of the two endpoints: each side
produces costs toward every common-ancestor rank (directly from its label
when untruncated, otherwise by an upward sweep that relaxes shortcut arcs
until it can merge a stored label), and the two cost vectors are joined by
rank.  The joining rank of the minimal sum is the hub the path passes
through.
"""
from __future__ import annotations

import numpy as np

from .graph import INF
from .labeling import Labeling
from .shortcuts import CostState, ShortcutGraph

#: Slot marker meaning "no terminal vertex survives at this rank".
NO_VERTEX = -1

#: Join heights below this use a scalar loop; taller joins go vectorized.
_VECTOR_JOIN_MIN = 48


class QueryContext:
    """Customized structures plus flat scalar caches for the query loops."""

    def __init__(self, sg: ShortcutGraph, state: CostState, labeling: Labeling):
        self.sg = sg
        self.state = state
        self.labeling = labeling
        self.order = sg.order
        if not state.cost_py:
            state.finalize()
        self.cost_py = state.cost_py
        self.rank_py = sg._vrank_py
        self.untrunc_py = labeling.untruncated.tolist()
        self.c_py = labeling.cost_lists()
        self._views: list = [None] * len(self.c_py)
        self._pure: list = [None] * len(self.c_py)
        self._c_flat: np.ndarray | None = None
        self._c_ptr: np.ndarray | None = None
        self.merges = 0
        self.relaxations = 0

    def flat_labels(self) -> tuple[np.ndarray, np.ndarray]:
        """Label costs of all stored vertices packed into one flat array."""
        if self._c_flat is None:
            C = self.labeling.C
            lens = [0 if c is None else len(c) for c in C]
            ptr = np.zeros(len(C) + 1, dtype=np.int64)
            np.cumsum(lens, out=ptr[1:])
            flat = np.empty(int(ptr[-1]), dtype=np.int64)
            for v, c in enumerate(C):
                if c is not None:
                    flat[ptr[v]:ptr[v + 1]] = c
            self._c_flat = flat
            self._c_ptr = ptr
        return self._c_flat, self._c_ptr

    def reset_counters(self) -> None:
        self.merges = 0
        self.relaxations = 0


class CostView:
    """One endpoint's cost-per-rank information for a single query.

    For an untruncated endpoint ``direct`` aliases its label and the sweep
    arrays stay ``None``.  Otherwise ``c[r]``/``a[r]`` hold the best known
    cost and surviving terminal vertex at rank r (``a[r] == -1`` where a
    label merge supplied the value), ``ep[r]`` the vertex whose relaxation
    or merge last wrote the slot, and ``ep_arc[r]`` the arc used.
    """

    __slots__ = ("v", "tau", "direct", "c", "a", "ep", "ep_arc")

    def __init__(self, v: int, tau: int, direct, c=None, a=None, ep=None,
                 ep_arc=None):
        self.v = v
        self.tau = tau
        self.direct = direct
        self.c = c
        self.a = a
        self.ep = ep
        self.ep_arc = ep_arc

    def slots(self, h: int) -> list[int]:
        """Costs toward ranks 1..h (index i-1 = rank i; may be longer)."""
        if self.direct is not None:
            return self.direct
        return self.c[1:h + 1]


#: Sweeps from endpoints ranked at least this high run on numpy arrays.
_VECTOR_SWEEP_MIN = 96
#: Relaxation/merge blocks at least this long are applied vectorized.
_VECTOR_BLOCK_MIN = 24


def _sweep_scalar(ctx: QueryContext, v: int, tau: int, h: int) -> CostView:
    c = [INF] * (tau + 1)
    a = [NO_VERTEX] * (tau + 1)
    ep = [NO_VERTEX] * (tau + 1)
    ep_arc = [NO_VERTEX] * (tau + 1)
    c[tau] = 0
    a[tau] = v
    sg = ctx.sg
    ptr = sg._ptr_py
    to = sg._to_py
    arc_rank = sg._arc_rank_py
    w_cost = ctx.cost_py
    untrunc = ctx.untrunc_py
    labels = ctx.c_py
    merges = 0
    relaxations = 0
    for r in range(tau, 0, -1):
        w = a[r]
        if w < 0:
            continue
        base = c[r]
        if base >= INF:
            continue
        if untrunc[w]:
            cw = labels[w]
            m = len(cw) - 1
            if h < m:
                m = h
            for i in range(1, m + 1):
                cand = base + cw[i - 1]
                if cand < INF and cand <= c[i]:
                    c[i] = cand
                    a[i] = NO_VERTEX
                    ep[i] = w
            merges += 1
        else:
            for arc in range(ptr[w], ptr[w + 1]):
                relaxations += 1
                cand = base + w_cost[arc]
                if cand >= INF:
                    continue
                i = arc_rank[arc]
                if cand < c[i]:
                    c[i] = cand
                    a[i] = to[arc]
                    ep[i] = w
                    ep_arc[i] = arc
    ctx.merges += merges
    ctx.relaxations += relaxations
    view = CostView(v, tau, None, c, a, ep, ep_arc)
    if merges == 0:
        ctx._pure[v] = view
    return view


def _sweep_vector(ctx: QueryContext, v: int, tau: int, h: int) -> CostView:
    """Same sweep on numpy slot arrays; long blocks update in bulk.

    Ranks within one up-list (and within one label prefix) are distinct, so
    applying a whole block at once matches the arc-by-arc order exactly.
    """
    c = np.full(tau + 1, INF, dtype=np.int64)
    a = np.full(tau + 1, NO_VERTEX, dtype=np.int64)
    ep = np.full(tau + 1, NO_VERTEX, dtype=np.int64)
    ep_arc = np.full(tau + 1, NO_VERTEX, dtype=np.int64)
    c[tau] = 0
    a[tau] = v
    sg = ctx.sg
    ptr = sg._ptr_py
    to = sg._to_py
    arc_rank = sg._arc_rank_py
    arc_rank_np = sg.up_rank
    to_np = sg.up_to
    cost_np = ctx.state.cost
    w_cost = ctx.cost_py
    untrunc = ctx.untrunc_py
    labels = ctx.c_py
    C = ctx.labeling.C
    merges = 0
    relaxations = 0
    for r in range(tau, 0, -1):
        w = int(a[r])
        if w < 0:
            continue
        base = int(c[r])
        if base >= INF:
            continue
        if untrunc[w]:
            cw = C[w]
            m = len(cw) - 1
            if h < m:
                m = h
            if m >= _VECTOR_BLOCK_MIN:
                cand = cw[:m] + base
                cur = c[1:m + 1]
                sel = (cand <= cur) & (cand < INF)
                if sel.any():
                    cur[sel] = cand[sel]
                    a[1:m + 1][sel] = NO_VERTEX
                    ep[1:m + 1][sel] = w
            else:
                lw = labels[w]
                for i in range(1, m + 1):
                    cand = base + lw[i - 1]
                    if cand < INF and cand <= c[i]:
                        c[i] = cand
                        a[i] = NO_VERTEX
                        ep[i] = w
            merges += 1
        else:
            lo, hi = ptr[w], ptr[w + 1]
            relaxations += hi - lo
            if hi - lo >= _VECTOR_BLOCK_MIN:
                cand = cost_np[lo:hi] + base
                rk = arc_rank_np[lo:hi]
                sel = (cand < c[rk]) & (cand < INF)
                if sel.any():
                    hit = rk[sel]
                    c[hit] = cand[sel]
                    a[hit] = to_np[lo:hi][sel]
                    ep[hit] = w
                    ep_arc[hit] = np.nonzero(sel)[0] + lo
            else:
                for arc in range(lo, hi):
                    cand = base + w_cost[arc]
                    if cand >= INF:
                        continue
                    i = arc_rank[arc]
                    if cand < c[i]:
                        c[i] = cand
                        a[i] = to[arc]
                        ep[i] = w
                        ep_arc[i] = arc
    ctx.merges += merges
    ctx.relaxations += relaxations
    view = CostView(v, tau, None, c.tolist(), a.tolist(),
                    ep.tolist(), ep_arc.tolist())
    if merges == 0:
        ctx._pure[v] = view
    return view


def get_cost(ctx: QueryContext, v: int, h: int) -> CostView:
    """Cost from ``v`` toward each common-ancestor rank 1..h.

    Untruncated vertices answer from the label.  Otherwise slots are swept
    from rank(v) downward: a slot holding a truncated vertex relaxes its
    up-arcs (strict improvement), one holding an untruncated vertex merges
    its label prefix (improvement-or-tie, clearing the terminal).  Every
    write lands strictly below the sweeping rank, so visited slots are
    final.
    """
    tau = ctx.rank_py[v]
    if ctx.untrunc_py[v]:
        view = ctx._views[v]
        if view is None:
            view = CostView(v, tau, ctx.c_py[v])
            ctx._views[v] = view
        return view
    # A sweep that merged no label is independent of h (h only bounds merge
    # prefixes), so its view can be reused for any later height.
    view = ctx._pure[v]
    if view is not None:
        return view
    if tau >= _VECTOR_SWEEP_MIN:
        return _sweep_vector(ctx, v, tau, h)
    return _sweep_scalar(ctx, v, tau, h)


class QueryResult:
    """Distance plus everything path reconstruction needs."""

    __slots__ = ("s", "t", "distance", "hub_rank", "height", "side_s", "side_t")

    def __init__(self, s, t, distance, hub_rank, height, side_s, side_t):
        self.s = s
        self.t = t
        self.distance = distance
        self.hub_rank = hub_rank
        self.height = height
        self.side_s = side_s
        self.side_t = side_t

    @property
    def reachable(self) -> bool:
        return self.distance < INF


def run_query(ctx: QueryContext, s: int, t: int) -> QueryResult:
    """Exact distance between core vertices ``s`` and ``t``.

    The join only needs ranks up to the common-ancestor count of the two
    endpoints; the hub rank reported is the smallest rank attaining the
    minimal join (0 when unreachable).
    """
    if s == t:
        tau = ctx.rank_py[s]
        return QueryResult(s, t, 0, tau, tau, None, None)
    h = ctx.order.lca_height(s, t)
    vs = get_cost(ctx, s, h)
    vt = get_cost(ctx, t, h)
    if (h >= _VECTOR_JOIN_MIN and vs.direct is not None
            and vt.direct is not None):
        flat, ptr = ctx.flat_labels()
        ps = ptr[s]
        pt = ptr[t]
        joined = flat[ps:ps + h] + flat[pt:pt + h]
        i = int(joined.argmin())
        best = int(joined[i])
        if best >= INF:
            return QueryResult(s, t, INF, 0, h, vs, vt)
        return QueryResult(s, t, best, i + 1, h, vs, vt)
    sa = vs.slots(h)
    sb = vt.slots(h)
    best = INF + INF
    bi = 0
    for i in range(h):
        d = sa[i] + sb[i]
        if d < best:
            best = d
            bi = i + 1
    if best >= INF:
        return QueryResult(s, t, INF, 0, h, vs, vt)
    return QueryResult(s, t, best, bi, h, vs, vt)


def find_distance(ctx: QueryContext, s: int, t: int) -> tuple[int, int]:
    """(distance, hub rank); (INF, 0) when the sides never meet."""
    r = run_query(ctx, s, t)
    return r.distance, r.hub_rank
