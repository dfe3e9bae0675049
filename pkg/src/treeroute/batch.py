"""Batched path reconstruction sharing work across overlapping chains.

Every chain is keyed hub-first, so chains meeting at the same hub share a
prefix exactly where their paths share shortcuts.  Processing all chains of
a batch in lexicographic key order makes each chain's best possible prefix
match its immediate predecessor, letting the expander reuse the previously
unpacked prefix instead of expanding those shortcuts again.  The reusable
total is permutation-invariant, which is what makes sorting safe.
"""
from __future__ import annotations

from .graph import INF
from .paths import Variant, endpoint_chain
from .query import QueryContext, run_query
from .shortcuts import RecordArena, make_canonical_expander


def common_prefix_len(a: tuple, b: tuple) -> int:
    """Number of equal leading elements of two sequences."""
    n = min(len(a), len(b))
    i = 0
    while i < n and a[i] == b[i]:
        i += 1
    return i


def overlap(chains: list[tuple]) -> int:
    """Total reusable prefix length of a chain multiset.

    Each chain after the first contributes its longest common prefix with
    any earlier chain.  The value does not depend on the order chains are
    listed in, and equals the sum of adjacent prefixes after sorting.
    """
    total = 0
    for j in range(1, len(chains)):
        total += max(common_prefix_len(chains[i], chains[j]) for i in range(j))
    return total


def overlap_adjacent(chains: list[tuple]) -> int:
    """Sum of common prefixes between lexicographic neighbors."""
    ordered = sorted(chains)
    return sum(common_prefix_len(ordered[j - 1], ordered[j])
               for j in range(1, len(ordered)))


class BatchStats:
    """Expansion accounting for one processed batch."""

    __slots__ = ("chains", "total_arcs", "reused_arcs")

    def __init__(self):
        self.chains = 0
        self.total_arcs = 0
        self.reused_arcs = 0

    @property
    def overlap_fraction(self) -> float:
        if self.total_arcs == 0:
            return 0.0
        return self.reused_arcs / self.total_arcs


def batch_get_paths(ctx: QueryContext, pairs: list[tuple[int, int]],
                    variant: Variant, arena: RecordArena | None = None,
                    stats: BatchStats | None = None):
    """Distances and paths for a batch, identical to per-query results.

    Phase one resolves every query and collects both endpoint chains keyed
    hub-first.  Phase two walks the pooled chains in sorted key order; a
    chain reuses its predecessor's already-unpacked vertices up to their
    common prefix (when that prefix spans more than the hub) and expands
    only the remaining arcs, decoding each distinct shortcut at most once
    per batch.  Phase three reassembles per submitted pair, in submission
    order.

    Returns a list of (distance, path-or-None), one entry per input pair.
    """
    if variant.use_records and arena is None:
        raise ValueError(f"variant {variant.name} needs a record arena")
    results: list = [None] * len(pairs)
    pool = []  # (key, arcs, pair index, side)
    hop_memo: dict[tuple[int, int], int] = {}
    # chains of label-direct endpoints depend only on (vertex, hub rank), so
    # they can be shared across the batch; swept endpoints pick their witness
    # writes per query height and are rebuilt each time
    chain_memo: dict[tuple[int, int], tuple[tuple, list]] = {}

    def chain_of(view, hub: int) -> tuple[tuple, list]:
        if view.direct is None:
            verts, arcs = endpoint_chain(ctx, variant, view, hub, hop_memo)
            return tuple(reversed(verts)), arcs[::-1]
        ck = (view.v, hub)
        got = chain_memo.get(ck)
        if got is None:
            verts, arcs = endpoint_chain(ctx, variant, view, hub, hop_memo)
            got = (tuple(reversed(verts)), arcs[::-1])
            chain_memo[ck] = got
        return got

    for idx, (s, t) in enumerate(pairs):
        r = run_query(ctx, s, t)
        if not r.reachable:
            results[idx] = (INF, None)
            continue
        if s == t:
            results[idx] = (0, [s])
            continue
        ks, sa = chain_of(r.side_s, r.hub_rank)
        kt, ta = chain_of(r.side_t, r.hub_rank)
        pool.append((ks, sa, idx, 0))
        pool.append((kt, ta, idx, 1))
        results[idx] = (r.distance, None)
    if stats is not None:
        stats.chains += len(pool)

    canon = make_canonical_expander(ctx.sg, ctx.state,
                                    arena if variant.use_records else None)
    rev_tail: dict[int, list[int]] = {}  # arc -> expansion minus its target
    lefts: list = [None] * len(pairs)   # hub..s per pair
    rights: list = [None] * len(pairs)  # hub..t per pair
    order = sorted(range(len(pool)), key=lambda k: pool[k][0])
    prev_key: tuple = ()
    prev_path: list[int] = []
    prev_cuts: list[int] = []
    n_arcs = 0
    n_reused = 0
    for k in order:
        key, arcs, idx, side = pool[k]
        lim = min(len(key), len(prev_key))
        p = 0
        while p < lim and key[p] == prev_key[p]:
            p += 1
        if p > 1:
            path = prev_path[:prev_cuts[p - 1]]
            cuts = prev_cuts[:p]
            start = p - 1
        else:
            path = [key[0]]
            cuts = [1]
            start = 0
        n_arcs += len(arcs)
        n_reused += start
        for j in range(start, len(arcs)):
            # chains are keyed hub-first, so arcs expand target-to-owner
            a_id = arcs[j]
            seg = rev_tail.get(a_id)
            if seg is None:
                seg = canon(a_id)[-2::-1]
                rev_tail[a_id] = seg
            path.extend(seg)
            cuts.append(len(path))
        if side == 0:
            lefts[idx] = path
        else:
            rights[idx] = path
        prev_key, prev_path, prev_cuts = key, path, cuts
    if stats is not None:
        stats.total_arcs += n_arcs
        stats.reused_arcs += n_reused

    for idx in range(len(pairs)):
        d, existing = results[idx]
        if existing is not None or d >= INF:
            continue
        results[idx] = (d, lefts[idx][::-1] + rights[idx][1:])
    return results
