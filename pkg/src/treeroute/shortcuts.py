"""Shortcut overlay: topology, metric customization, and path records.

The overlay contains one arc per vertex pair connected by a *valley path*
(interior ranks strictly above both endpoints), which is exactly the edge set
produced by eliminating vertices in descending rank order and clique-closing
their remaining neighborhoods.  An arc is owned by its higher-rank endpoint
and points "up" to the lower-rank one.

Customization assigns each arc the minimal valley-path cost under a concrete
metric by relaxing lower triangles in descending rank levels; the winning
triangle vertex per arc is retained so paths can be unpacked later, either by
recursive triangle resolution (binary-searching child arcs) or by following
fixed-width path records that embed short paths inline and child pointers
otherwise.
"""
from __future__ import annotations

from bisect import bisect_left
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .graph import INF, RoadNetwork
from .hierarchy import VertexOrder

#: Sentinel word in path records.
NAN_WORD = 0xFFFFFFFF


# ---------------------------------------------------------------------------
# topology
# ---------------------------------------------------------------------------


class _Level:
    """Arcs owned by vertices of one rank plus their triangle slices."""

    __slots__ = ("arcs", "orig", "t_arcs", "t_pos", "t_ptr", "t_ev", "t_eu")

    def __init__(self, arcs, orig, t_arcs, t_pos, t_ptr, t_ev, t_eu):
        self.arcs = arcs      # arc ids at this rank
        self.orig = orig      # original edge id per arc, -1 for pure shortcuts
        self.t_arcs = t_arcs  # subset of arcs with at least one triangle
        self.t_pos = t_pos    # position of t_arcs within arcs
        self.t_ptr = t_ptr    # segment starts into t_ev/t_eu, len(t_arcs)+1
        self.t_ev = t_ev      # arc (w -> owner v) per triangle
        self.t_eu = t_eu      # arc (w -> target u) per triangle


class ShortcutGraph:
    """Metric-independent shortcut arcs in CSR form plus derived indexes.

    ``up_ptr``/``up_to`` list, per owner vertex, the up-arcs sorted by target
    rank ascending (targets sit on the owner's ancestor chain, so their ranks
    are distinct).  ``up_orig[a]`` is the original edge id the arc shadows, or
    -1.  Triangle lists and rank-level groupings are recomputed from the arc
    arrays, so only those need persisting.
    """

    def __init__(self, order: VertexOrder, up_ptr: np.ndarray, up_to: np.ndarray,
                 up_orig: np.ndarray):
        self.order = order
        self.up_ptr = up_ptr.astype(np.int64)
        self.up_to = up_to.astype(np.int64)
        self.up_orig = up_orig.astype(np.int64)
        n = len(up_ptr) - 1
        self.vertex_count = n
        m = len(up_to)
        self.arc_count = m
        counts = np.diff(self.up_ptr)
        self.up_owner = np.repeat(np.arange(n, dtype=np.int64), counts)
        self.up_rank = order.rank[self.up_to]
        self.owner_rank = order.rank[self.up_owner]
        # hot-path caches (python scalars are much faster than 0-d numpy)
        self._ptr_py = self.up_ptr.tolist()
        self._to_py = self.up_to.tolist()
        self._owner_py = self.up_owner.tolist()
        self._vrank_py = order.rank.tolist()
        self._arc_rank_py = self.up_rank.tolist()
        self._rank_list = [self.up_rank[self.up_ptr[v]:self.up_ptr[v + 1]].tolist()
                           for v in range(n)]
        self.lookup_count = 0
        self._build_triangles()
        self._build_levels()
        self.record_order = np.lexsort(
            (self.up_rank, self.up_owner, -self.owner_rank))

    # -- lookups ------------------------------------------------------------

    def up_slice(self, v: int) -> tuple[int, int]:
        return int(self.up_ptr[v]), int(self.up_ptr[v + 1])

    def arc_index(self, v: int, target_rank: int) -> int:
        """Arc id of (v -> ancestor at ``target_rank``), or -1.

        This is the per-arc dictionary lookup (binary search over the owner's
        up-list); ``lookup_count`` tracks how often reconstruction needs it.
        """
        self.lookup_count += 1
        ranks = self._rank_list[v]
        i = bisect_left(ranks, target_rank)
        if i < len(ranks) and ranks[i] == target_rank:
            return self._ptr_py[v] + i
        return -1

    # -- derived structure --------------------------------------------------

    def _build_triangles(self) -> None:
        """Enumerate lower triangles grouped by the arc they can relax.

        For every owner w and pair u, v in its up-list with rank(u) < rank(v),
        the pair (v, u) is itself an arc (clique closure guarantees it) and
        the two w-arcs form one of its candidate triangles.
        """
        tgt_parts, ev_parts, eu_parts = [], [], []
        ptr, rank = self.up_ptr, self.up_rank
        # arcs sorted by (owner, target rank) allow direct target-arc lookup
        arc_key = self.up_owner * (self.order.max_rank + 1) + rank
        for w in range(self.vertex_count):
            lo, hi = int(ptr[w]), int(ptr[w + 1])
            d = hi - lo
            if d < 2:
                continue
            ids = np.arange(lo, hi, dtype=np.int64)
            i, j = np.meshgrid(ids, ids, indexing="ij")
            mask = i < j  # up-lists are rank-ascending: i is u, j is v
            eu, ev = i[mask], j[mask]
            tgt_parts.append(self.up_to[ev] * (self.order.max_rank + 1) + rank[eu])
            ev_parts.append(ev)
            eu_parts.append(eu)
        if tgt_parts:
            keys = np.concatenate(tgt_parts)
            tri_tgt = np.searchsorted(arc_key, keys)
            tri_ev = np.concatenate(ev_parts)
            tri_eu = np.concatenate(eu_parts)
            # per target arc, order candidates by (rank of w, id of w)
            w_ids = self.up_owner[tri_ev]
            sort = np.lexsort((w_ids, self.order.rank[w_ids], tri_tgt))
            self.tri_tgt = tri_tgt[sort]
            self.tri_ev = tri_ev[sort]
            self.tri_eu = tri_eu[sort]
        else:
            self.tri_tgt = np.zeros(0, dtype=np.int64)
            self.tri_ev = np.zeros(0, dtype=np.int64)
            self.tri_eu = np.zeros(0, dtype=np.int64)
        self.tri_ptr = np.zeros(self.arc_count + 1, dtype=np.int64)
        np.add.at(self.tri_ptr, self.tri_tgt + 1, 1)
        np.cumsum(self.tri_ptr, out=self.tri_ptr)

    def _build_levels(self) -> None:
        self.levels: list[_Level] = []
        if self.arc_count == 0:
            return
        ranks = np.unique(self.owner_rank)[::-1]
        by_rank = np.argsort(self.owner_rank, kind="stable")
        bounds = np.searchsorted(self.owner_rank[by_rank], ranks, side="left")
        ends = np.searchsorted(self.owner_rank[by_rank], ranks, side="right")
        for r, lo, hi in zip(ranks, bounds, ends):
            arcs = np.sort(by_rank[lo:hi])
            counts = self.tri_ptr[arcs + 1] - self.tri_ptr[arcs]
            has = counts > 0
            t_arcs = arcs[has]
            t_pos = np.flatnonzero(has)
            idx = np.concatenate(
                [np.arange(self.tri_ptr[a], self.tri_ptr[a + 1]) for a in t_arcs]
            ) if len(t_arcs) else np.zeros(0, dtype=np.int64)
            t_ptr = np.zeros(len(t_arcs) + 1, dtype=np.int64)
            np.cumsum(counts[has], out=t_ptr[1:])
            self.levels.append(_Level(
                arcs, self.up_orig[arcs], t_arcs, t_pos, t_ptr,
                self.tri_ev[idx], self.tri_eu[idx]))


def _edge_ids_bulk(net: RoadNetwork, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Vectorized edge-id lookup for vertex pairs, -1 where no edge exists."""
    a = np.minimum(u, v)
    b = np.maximum(u, v)
    key = a * net.vertex_count + b
    have = net.edge_u * net.vertex_count + net.edge_v
    pos = np.searchsorted(have, key).clip(max=len(have) - 1)
    return np.where(have[pos] == key, pos, -1).astype(np.int64)


def build_shortcuts(network: RoadNetwork, order: VertexOrder) -> ShortcutGraph:
    """Contract vertices in descending rank order to enumerate all shortcuts.

    Eliminating a vertex clique-connects its remaining neighbors; the
    neighborhood captured at elimination time is exactly the vertex's up-arc
    target set (one valley path exists per such pair).  Ties in rank are
    never adjacent (they sit in separated sibling subtrees), so any tie order
    gives the same result.
    """
    n = network.vertex_count
    rank = order.rank
    adj: list[set[int]] = [set() for _ in range(n)]
    for e in range(network.edge_count):
        u, v = int(network.edge_u[e]), int(network.edge_v[e])
        adj[u].add(v)
        adj[v].add(u)
    removal = sorted(range(n), key=lambda v: (-int(rank[v]), v))
    up_lists: list[list[int]] = [[] for _ in range(n)]
    for v in removal:
        nbrs = sorted(adj[v], key=lambda u: int(rank[u]))
        up_lists[v] = nbrs
        for u in nbrs:
            adj[u].discard(v)
        nbset = adj[v]
        for u in nbrs:
            adj[u].update(nbset)
            adj[u].discard(u)
        adj[v] = set()
    counts = np.fromiter((len(l) for l in up_lists), dtype=np.int64, count=n)
    up_ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=up_ptr[1:])
    up_to = np.fromiter((u for l in up_lists for u in l), dtype=np.int64,
                        count=int(up_ptr[-1]))
    owners = np.repeat(np.arange(n, dtype=np.int64), counts)
    up_orig = _edge_ids_bulk(network, owners, up_to) if len(up_to) else \
        np.zeros(0, dtype=np.int64)
    return ShortcutGraph(order, up_ptr, up_to, up_orig)


# ---------------------------------------------------------------------------
# customization
# ---------------------------------------------------------------------------


class CostState:
    """Customized arc costs plus the winning triangle per arc.

    ``prov_z[a]`` is the triangle vertex of arc ``a`` (or -1 when the original
    edge is optimal); ``prov_ev``/``prov_eu`` are the child arcs toward the
    arc's owner and target respectively.
    """

    __slots__ = ("cost", "prov_z", "prov_ev", "prov_eu", "cost_py")

    def __init__(self, arc_count: int):
        self.cost = np.full(arc_count, INF, dtype=np.int64)
        self.prov_z = np.full(arc_count, -1, dtype=np.int64)
        self.prov_ev = np.full(arc_count, -1, dtype=np.int64)
        self.prov_eu = np.full(arc_count, -1, dtype=np.int64)
        self.cost_py: list[int] = []

    def finalize(self) -> None:
        self.cost_py = self.cost.tolist()


def _customize_chunk(lvl: _Level, lo: int, hi: int, metric64: np.ndarray,
                     state: CostState, sg: ShortcutGraph) -> None:
    arcs = lvl.arcs[lo:hi]
    if len(arcs) == 0:
        return
    orig = lvl.orig[lo:hi]
    base = np.where(orig >= 0, metric64[np.maximum(orig, 0)], INF)
    state.cost[arcs] = base
    # triangle candidates for the sub-range of arcs that have any
    tlo = np.searchsorted(lvl.t_pos, lo, side="left")
    thi = np.searchsorted(lvl.t_pos, hi, side="left")
    if tlo == thi:
        return
    s0, s1 = int(lvl.t_ptr[tlo]), int(lvl.t_ptr[thi])
    cand = state.cost[lvl.t_ev[s0:s1]] + state.cost[lvl.t_eu[s0:s1]]
    starts = (lvl.t_ptr[tlo:thi] - s0).astype(np.int64)
    best = np.minimum.reduceat(cand, starts)
    lens = np.diff(np.append(starts, s1 - s0))
    first = np.where(cand == np.repeat(best, lens),
                     np.arange(len(cand)), len(cand))
    winner = np.minimum.reduceat(first, starts) + s0
    t_arcs = lvl.t_arcs[tlo:thi]
    improve = best < state.cost[t_arcs]
    upd = t_arcs[improve]
    state.cost[upd] = best[improve]
    wv = lvl.t_ev[winner[improve]]
    wu = lvl.t_eu[winner[improve]]
    state.prov_ev[upd] = wv
    state.prov_eu[upd] = wu
    state.prov_z[upd] = sg.up_owner[wv]


def customize_shortcuts(sg: ShortcutGraph, metric: np.ndarray,
                        threads: int = 1) -> CostState:
    """Assign minimal valley-path costs to every arc for one metric.

    Rank levels are processed top rank first; inside a level every arc only
    reads strictly-higher-rank arcs, so level work is order-independent and
    splits across threads without changing any result bit.  Each arc keeps
    the lowest-(rank, id) triangle vertex among cost minimizers, with the
    original edge winning ties.
    """
    state = CostState(sg.arc_count)
    metric64 = metric.astype(np.int64)
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        for lvl in sg.levels:
            total = len(lvl.arcs)
            if pool is None or total < 2 * threads:
                _customize_chunk(lvl, 0, total, metric64, state, sg)
                continue
            step = (total + threads - 1) // threads
            ranges = [(i, min(i + step, total)) for i in range(0, total, step)]
            futs = [pool.submit(_customize_chunk, lvl, a, b, metric64, state, sg)
                    for a, b in ranges]
            for f in futs:
                f.result()
    finally:
        if pool is not None:
            pool.shutdown()
    state.finalize()
    return state


# ---------------------------------------------------------------------------
# path records
# ---------------------------------------------------------------------------


class RecordArena:
    """Fixed-width per-arc path records.

    Each record is ``width`` 32-bit words (width = max(k, 6)).  Inline mode
    stores up to k interior vertices of the arc's path, owner-to-target, with
    trailing sentinel words; an all-sentinel record is an original edge.
    Triangle mode is [sentinel, z, childA-lo, childA-hi, childB-lo, childB-hi]
    where the children are byte offsets of the records for (z -> owner) and
    (z -> target).
    """

    __slots__ = ("width", "k", "words", "n_inter")

    def __init__(self, width: int, k: int, arc_count: int):
        self.width = width
        self.k = k
        self.words = np.full(arc_count * width, NAN_WORD, dtype=np.uint32)
        self.n_inter = np.zeros(arc_count, dtype=np.int64)

    def record(self, arc: int) -> np.ndarray:
        return self.words[arc * self.width:(arc + 1) * self.width]


def build_records(sg: ShortcutGraph, state: CostState, k: int = 6) -> RecordArena:
    """Materialize path records for every arc after customization.

    Arcs are visited owners-descending so both triangle children (owned by
    the strictly higher-rank triangle vertex) are finished first; an arc goes
    inline exactly when its full interior fits in k words.
    """
    if k < 1:
        raise ValueError("k must be positive")
    width = max(k, 6)
    arena = RecordArena(width, k, sg.arc_count)
    words = arena.words
    n_inter = arena.n_inter
    prov_z = state.prov_z
    prov_ev = state.prov_ev
    prov_eu = state.prov_eu
    cap = k + 1
    stride_bytes = width * 4
    for a in sg.record_order.tolist():
        z = prov_z[a]
        if z < 0:
            continue  # original edge: all-sentinel record, zero interiors
        ev = int(prov_ev[a])
        eu = int(prov_eu[a])
        n1 = int(n_inter[ev])
        n2 = int(n_inter[eu])
        total = n1 + 1 + n2
        base = a * width
        if total <= k:
            # interior = reversed(interior of z->owner) + z + interior of z->target
            if n1:
                words[base:base + n1] = words[ev * width:ev * width + n1][::-1]
            words[base + n1] = z
            if n2:
                words[base + n1 + 1:base + total] = \
                    words[eu * width:eu * width + n2]
            n_inter[a] = total
        else:
            pa = ev * stride_bytes
            pb = eu * stride_bytes
            rec = words[base:base + 6]
            rec[0] = NAN_WORD
            rec[1] = z
            rec[2] = pa & 0xFFFFFFFF
            rec[3] = pa >> 32
            rec[4] = pb & 0xFFFFFFFF
            rec[5] = pb >> 32
            n_inter[a] = cap
    return arena


# ---------------------------------------------------------------------------
# unpacking
# ---------------------------------------------------------------------------


def append_expansion_basic(sg: ShortcutGraph, state: CostState, arc: int,
                           rev: bool, out: list[int]) -> None:
    """Append the arc's path minus its first vertex, resolving triangles.

    Child arcs are found by binary search on the triangle vertex's up-list
    (two counted lookups per resolved triangle).  With ``rev`` the path is
    emitted target-to-owner instead.
    """
    z = int(state.prov_z[arc])
    if z < 0:
        out.append(sg._owner_py[arc] if rev else sg._to_py[arc])
        return
    ev = sg.arc_index(z, sg._vrank_py[sg._owner_py[arc]])
    eu = sg.arc_index(z, sg._arc_rank_py[arc])
    if rev:
        append_expansion_basic(sg, state, eu, True, out)
        append_expansion_basic(sg, state, ev, False, out)
    else:
        append_expansion_basic(sg, state, ev, True, out)
        append_expansion_basic(sg, state, eu, False, out)


def append_expansion_records(sg: ShortcutGraph, arena: RecordArena, arc: int,
                             rev: bool, out: list[int]) -> None:
    """Record-based variant of :func:`append_expansion_basic`: no lookups."""
    width = arena.width
    words = arena.words
    base = arc * width
    w0 = int(words[base])
    if w0 != NAN_WORD:
        # inline, at least one interior vertex
        n = int(arena.n_inter[arc])
        inner = words[base:base + n]
        if rev:
            out.extend(inner[::-1].tolist())
            out.append(sg._owner_py[arc])
        else:
            out.extend(inner.tolist())
            out.append(sg._to_py[arc])
        return
    w1 = int(words[base + 1])
    if w1 == NAN_WORD:
        out.append(sg._owner_py[arc] if rev else sg._to_py[arc])
        return
    stride = width * 4
    ev = (int(words[base + 2]) | (int(words[base + 3]) << 32)) // stride
    eu = (int(words[base + 4]) | (int(words[base + 5]) << 32)) // stride
    if rev:
        append_expansion_records(sg, arena, eu, True, out)
        append_expansion_records(sg, arena, ev, False, out)
    else:
        append_expansion_records(sg, arena, ev, True, out)
        append_expansion_records(sg, arena, eu, False, out)


def unpack_arc(sg: ShortcutGraph, state: CostState, arc: int,
               arena: RecordArena | None = None) -> list[int]:
    """Full owner-to-target vertex sequence of one arc's minimal valley path."""
    out = [sg._owner_py[arc]]
    if arena is not None:
        append_expansion_records(sg, arena, arc, False, out)
    else:
        append_expansion_basic(sg, state, arc, False, out)
    return out


def make_canonical_expander(sg: ShortcutGraph, state: CostState,
                            arena: RecordArena | None = None):
    """Memoizing owner-to-target expander: each arc is decoded at most once.

    Returns ``canon(arc) -> [owner, ..., target]``.  The cache is shared
    across calls (including the recursive child decodes), which pays off
    when many expansions repeat the same high-rank shortcuts, as they do
    inside a batch.  Callers must treat returned lists as read-only.
    Answers match :func:`unpack_arc`.
    """
    cache: dict[int, list[int]] = {}
    owner_py = sg._owner_py
    to_py = sg._to_py
    if arena is not None:
        width = arena.width
        words = arena.words
        n_inter = arena.n_inter
        stride = width * 4

        def canon(arc: int) -> list[int]:
            got = cache.get(arc)
            if got is not None:
                return got
            base = arc * width
            if int(words[base]) != NAN_WORD:
                seq = [owner_py[arc]]
                seq.extend(words[base:base + int(n_inter[arc])].tolist())
                seq.append(to_py[arc])
            elif int(words[base + 1]) == NAN_WORD:
                seq = [owner_py[arc], to_py[arc]]
            else:
                ev = (int(words[base + 2])
                      | (int(words[base + 3]) << 32)) // stride
                eu = (int(words[base + 4])
                      | (int(words[base + 5]) << 32)) // stride
                seq = canon(ev)[::-1]
                seq.extend(canon(eu)[1:])
            cache[arc] = seq
            return seq
    else:
        prov_z = state.prov_z
        vrank = sg._vrank_py
        arank = sg._arc_rank_py

        def canon(arc: int) -> list[int]:
            got = cache.get(arc)
            if got is not None:
                return got
            z = int(prov_z[arc])
            if z < 0:
                seq = [owner_py[arc], to_py[arc]]
            else:
                ev = sg.arc_index(z, vrank[owner_py[arc]])
                eu = sg.arc_index(z, arank[arc])
                seq = canon(ev)[::-1]
                seq.extend(canon(eu)[1:])
            cache[arc] = seq
            return seq
    return canon
