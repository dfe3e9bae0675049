"""Path reconstruction: endpoint chains, reconstruction variants, assembly.

A path is recovered as two *endpoint chains* — strictly rank-decreasing arc
sequences from each endpoint down to the hub — whose arcs are then expanded
into original-edge paths.  Five variants trade memory for lookup work:

==========  =====================  ====================================
variant     shortcut expansion     chain walking
==========  =====================  ====================================
``bn``      triangle resolution    label scan per hop
``bb``      triangle resolution    path array (arc found by search)
``en``      path records           label scan per hop
``eb``      path records           path array (arc found by search)
``ee``      path records           path-array arc references
==========  =====================  ====================================

Triangle resolution and path-array chain walking locate arcs by binary
search (counted via ``ShortcutGraph.lookup_count``); ``ee`` never searches.
"""
from __future__ import annotations

from dataclasses import dataclass

from .graph import INF
from .query import NO_VERTEX, CostView, QueryContext, QueryResult, run_query
from .shortcuts import (
    RecordArena,
    append_expansion_basic,
    append_expansion_records,
)


@dataclass(frozen=True)
class Variant:
    """One reconstruction configuration (see module table)."""

    name: str
    use_records: bool
    chain_mode: str  # "n" scan, "b" path array, "e" path-array references

    @property
    def needs_path_arrays(self) -> bool:
        return self.chain_mode in ("b", "e")

    @property
    def needs_path_refs(self) -> bool:
        return self.chain_mode == "e"


VARIANTS = {
    "bn": Variant("bn", False, "n"),
    "bb": Variant("bb", False, "b"),
    "en": Variant("en", True, "n"),
    "eb": Variant("eb", True, "b"),
    "ee": Variant("ee", True, "e"),
}


def get_variant(name: str) -> Variant:
    try:
        return VARIANTS[name]
    except KeyError:
        raise ValueError(f"unknown variant {name!r}; choose from "
                         f"{sorted(VARIANTS)}") from None


def get_ep(ctx: QueryContext, v: int, i: int) -> tuple[int, int]:
    """First up-hop of an optimal path from ``v`` toward its rank-i ancestor.

    Scans the up-list rank-ascending for an arc whose cost plus the
    neighbor's label entry reproduces ``C(v)[i]`` (the neighbor's self-entry
    covers the case where it is the ancestor itself).  Returns (vertex, arc).
    """
    sg = ctx.sg
    labels = ctx.c_py
    target = labels[v][i - 1]
    lo, hi = sg._ptr_py[v], sg._ptr_py[v + 1]
    for arc in range(lo, hi):
        if sg._arc_rank_py[arc] < i:
            continue
        u = sg._to_py[arc]
        if ctx.cost_py[arc] + labels[u][i - 1] == target:
            return u, arc
    raise AssertionError(f"no label witness from {v} at rank {i}")


def _chain_hop(ctx: QueryContext, variant: Variant, e: int, i_star: int,
               memo: dict[tuple[int, int], int] | None = None) -> tuple[int, int]:
    """Next chain vertex below ``e`` and the arc to it, per chain mode.

    ``memo`` optionally caches resolved (vertex, rank) -> arc lookups across
    calls; hits still count toward ``lookup_count`` so the accounting does not
    depend on whether a memo is supplied.
    """
    if variant.chain_mode == "n":
        return get_ep(ctx, e, i_star)
    u = int(ctx.labeling.P[e][i_star - 1])
    if variant.chain_mode == "e":
        arc = int(ctx.labeling.P_ref[e][i_star - 1])
        return u, arc
    r = ctx.rank_py[u]
    if memo is None:
        return u, ctx.sg.arc_index(e, r)
    arc = memo.get((e, r), -2)
    if arc == -2:
        arc = ctx.sg.arc_index(e, r)
        memo[(e, r)] = arc
    else:
        ctx.sg.lookup_count += 1
    return u, arc


def endpoint_chain(ctx: QueryContext, variant: Variant, view: CostView,
                   i_star: int,
                   memo: dict[tuple[int, int], int] | None = None
                   ) -> tuple[list[int], list[int]]:
    """Chain of vertices from ``view.v`` down to the rank-``i_star`` hub.

    Untruncated endpoints walk label hops.  Truncated endpoints first replay
    the sweep's winning writes backwards: if the hub slot still holds a
    terminal vertex the replay alone reaches the hub; if a label merge wrote
    it, the replay stops at the merging (untruncated) vertex and label hops
    finish the descent.  Returns (vertices, arcs); arcs[j] connects
    vertices[j] to vertices[j+1] and ranks strictly decrease.
    """
    v = view.v
    if i_star == view.tau:
        return [v], []
    rank = ctx.rank_py
    verts: list[int]
    arcs: list[int]
    if view.direct is not None:
        verts, arcs = [v], []
        e = v
        while rank[e] != i_star:
            e, arc = _chain_hop(ctx, variant, e, i_star, memo)
            verts.append(e)
            arcs.append(arc)
        return verts, arcs
    rev_v: list[int] = []
    rev_a: list[int] = []
    if view.a[i_star] != NO_VERTEX:
        rev_v.append(view.a[i_star])
        r = i_star
    else:
        first = view.ep[i_star]  # the untruncated vertex whose label merged
        rev_v.append(first)
        r = rank[first]
    while rev_v[-1] != v:
        w = view.ep[r]
        rev_a.append(view.ep_arc[r])
        rev_v.append(w)
        r = rank[w]
    verts = rev_v[::-1]
    arcs = rev_a[::-1]
    e = verts[-1]
    while rank[e] != i_star:
        e, arc = _chain_hop(ctx, variant, e, i_star, memo)
        verts.append(e)
        arcs.append(arc)
    return verts, arcs


def chain_cost(ctx: QueryContext, arcs: list[int]) -> int:
    """Sum of customized arc costs along one chain."""
    total = 0
    for a in arcs:
        total += ctx.cost_py[a]
    return total


def _expand(ctx: QueryContext, variant: Variant, arena: RecordArena | None,
            arc: int, rev: bool, out: list[int]) -> None:
    if variant.use_records:
        append_expansion_records(ctx.sg, arena, arc, rev, out)
    else:
        append_expansion_basic(ctx.sg, ctx.state, arc, rev, out)


def assemble_path(ctx: QueryContext, variant: Variant,
                  arena: RecordArena | None, result: QueryResult,
                  out: list[int]) -> list[int]:
    """Append the full vertex path of a resolved query into ``out``."""
    if result.s == result.t:
        out.append(result.s)
        return out
    s_verts, s_arcs = endpoint_chain(ctx, variant, result.side_s,
                                     result.hub_rank)
    t_verts, t_arcs = endpoint_chain(ctx, variant, result.side_t,
                                     result.hub_rank)
    out.append(s_verts[0])
    for arc in s_arcs:
        _expand(ctx, variant, arena, arc, False, out)
    for arc in reversed(t_arcs):
        _expand(ctx, variant, arena, arc, True, out)
    return out


def get_path(ctx: QueryContext, s: int, t: int, variant: Variant,
             arena: RecordArena | None = None,
             out: list[int] | None = None) -> tuple[int, list[int] | None]:
    """Distance and full vertex path between core vertices.

    ``out`` may supply a reusable buffer (appended to, never cleared);
    unreachable pairs return (INF, None) and leave it untouched.
    """
    if variant.use_records and arena is None:
        raise ValueError(f"variant {variant.name} needs a record arena")
    result = run_query(ctx, s, t)
    if not result.reachable:
        return INF, None
    if out is None:
        out = []
    assemble_path(ctx, variant, arena, result, out)
    return result.distance, out
