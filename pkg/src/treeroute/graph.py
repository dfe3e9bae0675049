"""Road-network representation, metric handling, DIMACS ingestion, and oracles.

The engine keeps topology and costs strictly separate: a :class:`RoadNetwork`
is an undirected simple graph over vertices ``0..n-1``, and a *metric* is a
plain ``uint32`` numpy array of positive edge costs indexed by edge id.  All
cost arithmetic saturates at :data:`INF` (the maximum 32-bit value), which
doubles as the "unreachable" sentinel throughout the package.
"""
from __future__ import annotations

import heapq
import random
import warnings
from dataclasses import dataclass
from itertools import count

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse import csgraph as _csgraph

#: Cost sentinel: maximum representable 32-bit cost, never a real distance.
INF = 2**32 - 1


def sat_add(a: int, b: int) -> int:
    """Saturating addition on the u32 cost domain."""
    s = a + b
    return INF if s >= INF else s


# ---------------------------------------------------------------------------
# network + metric
# ---------------------------------------------------------------------------


class RoadNetwork:
    """Undirected simple graph with a canonical, id-sorted edge list.

    Parameters
    ----------
    vertex_count : int
        Number of vertices; ids are ``0..vertex_count-1``.
    edges : iterable of (int, int)
        Unordered endpoint pairs.  Self-loops and duplicates are rejected.

    Notes
    -----
    Edges are stored canonically as ``(min(u,v), max(u,v))`` pairs sorted
    lexicographically; the position of a pair in that order is its *edge id*,
    which is what metrics are indexed by.  Adjacency is kept in CSR form
    (``adj_ptr``, ``adj_vertex``, ``adj_edge``) with neighbor lists sorted by
    vertex id.  Instances are immutable after construction.
    """

    def __init__(self, vertex_count: int, edges) -> None:
        pairs = []
        for u, v in edges:
            u = int(u)
            v = int(v)
            if not (0 <= u < vertex_count and 0 <= v < vertex_count):
                raise ValueError(f"edge ({u},{v}) out of range for n={vertex_count}")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            pairs.append((u, v) if u < v else (v, u))
        pairs.sort()
        for i in range(1, len(pairs)):
            if pairs[i] == pairs[i - 1]:
                raise ValueError(f"duplicate edge {pairs[i]}")

        self.vertex_count = int(vertex_count)
        m = len(pairs)
        self.edge_u = np.fromiter((p[0] for p in pairs), dtype=np.int64, count=m)
        self.edge_v = np.fromiter((p[1] for p in pairs), dtype=np.int64, count=m)

        deg = np.zeros(vertex_count, dtype=np.int64)
        np.add.at(deg, self.edge_u, 1)
        np.add.at(deg, self.edge_v, 1)
        ptr = np.zeros(vertex_count + 1, dtype=np.int64)
        np.cumsum(deg, out=ptr[1:])
        fill = ptr[:-1].copy()
        nbr = np.empty(2 * m, dtype=np.int64)
        eid = np.empty(2 * m, dtype=np.int64)
        for e in range(m):
            a, b = self.edge_u[e], self.edge_v[e]
            nbr[fill[a]] = b
            eid[fill[a]] = e
            fill[a] += 1
            nbr[fill[b]] = a
            eid[fill[b]] = e
            fill[b] += 1
        # sort each adjacency slice by neighbor id for deterministic iteration
        for v in range(vertex_count):
            lo, hi = ptr[v], ptr[v + 1]
            order = np.argsort(nbr[lo:hi], kind="stable")
            nbr[lo:hi] = nbr[lo:hi][order]
            eid[lo:hi] = eid[lo:hi][order]
        self.adj_ptr = ptr
        self.adj_vertex = nbr
        self.adj_edge = eid
        for arr in (self.edge_u, self.edge_v, self.adj_ptr, self.adj_vertex, self.adj_edge):
            arr.setflags(write=False)

    @property
    def edge_count(self) -> int:
        return len(self.edge_u)

    def degree(self, v: int) -> int:
        return int(self.adj_ptr[v + 1] - self.adj_ptr[v])

    def neighbors(self, v: int) -> np.ndarray:
        """Neighbor ids of ``v``, sorted ascending."""
        return self.adj_vertex[self.adj_ptr[v]:self.adj_ptr[v + 1]]

    def incident_edges(self, v: int) -> np.ndarray:
        """Edge ids incident to ``v``, aligned with :meth:`neighbors`."""
        return self.adj_edge[self.adj_ptr[v]:self.adj_ptr[v + 1]]

    def edge_id(self, u: int, v: int) -> int:
        """Edge id of ``{u,v}``, or -1 if absent."""
        nbrs = self.neighbors(u)
        i = np.searchsorted(nbrs, v)
        if i < len(nbrs) and nbrs[i] == v:
            return int(self.incident_edges(u)[i])
        return -1

    def has_edge(self, u: int, v: int) -> bool:
        return self.edge_id(u, v) >= 0


def validate_metric(network: RoadNetwork, cost: np.ndarray) -> np.ndarray:
    """Check a cost array against a network and return it as ``uint32``.

    Raises ``ValueError`` if the length does not match the edge count or any
    cost is outside ``1..INF-1``.
    """
    cost = np.asarray(cost)
    if cost.shape != (network.edge_count,):
        raise ValueError(
            f"metric has {cost.shape} entries, network has {network.edge_count} edges"
        )
    as64 = cost.astype(np.int64)
    if np.any(as64 <= 0) or np.any(as64 >= INF):
        raise ValueError("edge costs must be in 1..2^32-2")
    return cost.astype(np.uint32)


def to_scipy_csr(network: RoadNetwork, metric: np.ndarray) -> csr_matrix:
    """Symmetric scipy CSR matrix of the weighted network (float64)."""
    n = network.vertex_count
    w = np.asarray(metric, dtype=np.float64)
    row = np.concatenate([network.edge_u, network.edge_v])
    col = np.concatenate([network.edge_v, network.edge_u])
    dat = np.concatenate([w, w])
    return csr_matrix((dat, (row, col)), shape=(n, n))


# ---------------------------------------------------------------------------
# DIMACS readers / writer
# ---------------------------------------------------------------------------


def parse_dimacs_gr(lines) -> tuple[RoadNetwork, np.ndarray]:
    """Parse a DIMACS ``.gr`` stream into an undirected network + metric.

    ``lines`` is any iterable of text lines (an open file works).  Arcs
    ``a u v w`` use 1-based ids; the two directions of an undirected road
    segment are merged, keeping the minimum cost when they disagree.  Errors
    are reported with their 1-based line number.
    """
    n = m_declared = -1
    best: dict[tuple[int, int], int] = {}
    for ln, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "p":
            if len(parts) != 4 or parts[1] != "sp":
                raise ValueError(f"line {ln}: malformed problem line {line!r}")
            n, m_declared = int(parts[2]), int(parts[3])
        elif parts[0] == "a":
            if n < 0:
                raise ValueError(f"line {ln}: arc before problem line")
            if len(parts) != 4:
                raise ValueError(f"line {ln}: malformed arc line {line!r}")
            try:
                u, v, w = int(parts[1]), int(parts[2]), int(parts[3])
            except ValueError:
                raise ValueError(f"line {ln}: malformed arc line {line!r}") from None
            if not (1 <= u <= n and 1 <= v <= n):
                raise ValueError(f"line {ln}: vertex id out of range 1..{n}")
            if w <= 0:
                raise ValueError(f"line {ln}: nonpositive weight {w}")
            if w >= INF:
                raise ValueError(f"line {ln}: weight {w} exceeds cost domain")
            if u == v:
                continue  # self-loop arcs carry no routing information
            key = (u - 1, v - 1) if u < v else (v - 1, u - 1)
            prev = best.get(key)
            if prev is None or w < prev:
                best[key] = w
        else:
            raise ValueError(f"line {ln}: unrecognized line {line!r}")
    if n < 0:
        raise ValueError("missing problem line 'p sp <n> <m>'")
    pairs = sorted(best)
    network = RoadNetwork(n, pairs)
    cost = np.fromiter((best[p] for p in pairs), dtype=np.uint32, count=len(pairs))
    return network, cost


def parse_dimacs_co(lines) -> np.ndarray:
    """Parse a DIMACS ``.co`` stream into an ``(n, 2)`` coordinate array."""
    n = -1
    coords = None
    for ln, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "p":
            # "p aux sp co <n>"
            n = int(parts[-1])
            coords = np.zeros((n, 2), dtype=np.float64)
        elif parts[0] == "v":
            if coords is None:
                raise ValueError(f"line {ln}: vertex before problem line")
            if len(parts) != 4:
                raise ValueError(f"line {ln}: malformed coordinate line {line!r}")
            i = int(parts[1])
            if not (1 <= i <= n):
                raise ValueError(f"line {ln}: vertex id out of range 1..{n}")
            coords[i - 1, 0] = float(parts[2])
            coords[i - 1, 1] = float(parts[3])
        else:
            raise ValueError(f"line {ln}: unrecognized line {line!r}")
    if coords is None:
        raise ValueError("missing problem line")
    return coords


def write_dimacs_gr(network: RoadNetwork, metric: np.ndarray) -> str:
    """Serialize a network + metric back to DIMACS ``.gr`` text.

    Each undirected edge is emitted as both arcs so the output round-trips
    through :func:`parse_dimacs_gr`.
    """
    out = [f"p sp {network.vertex_count} {2 * network.edge_count}"]
    for e in range(network.edge_count):
        u = int(network.edge_u[e]) + 1
        v = int(network.edge_v[e]) + 1
        w = int(metric[e])
        out.append(f"a {u} {v} {w}")
        out.append(f"a {v} {u} {w}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Dijkstra oracle
# ---------------------------------------------------------------------------


def dijkstra_sssp(network: RoadNetwork, metric: np.ndarray, source: int):
    """Single-source Dijkstra; returns ``(dist, parent)`` int64 arrays.

    Unreachable vertices have ``dist == INF`` and ``parent == -1``.
    """
    n = network.vertex_count
    dist = np.full(n, INF, dtype=np.int64)
    parent = np.full(n, -1, dtype=np.int64)
    dist[source] = 0
    seen = np.zeros(n, dtype=bool)
    c = count()
    heap = [(0, next(c), source)]
    ptr, nbr, eid = network.adj_ptr, network.adj_vertex, network.adj_edge
    w = np.asarray(metric, dtype=np.int64)
    while heap:
        d, _, u = heapq.heappop(heap)
        if seen[u]:
            continue
        seen[u] = True
        for i in range(ptr[u], ptr[u + 1]):
            v = nbr[i]
            nd = d + w[eid[i]]
            if nd < dist[v]:
                dist[v] = nd
                parent[v] = u
                heapq.heappush(heap, (nd, next(c), v))
    return dist, parent


def dijkstra(network: RoadNetwork, metric: np.ndarray, source: int, target: int):
    """Single-pair Dijkstra returning ``(distance, path)``.

    ``path`` is the vertex sequence from ``source`` to ``target`` inclusive,
    or ``None`` when the pair is disconnected (``distance == INF``).  This is
    the package's correctness oracle: exact, but linear-time per query.
    """
    if source == target:
        return 0, [source]
    n = network.vertex_count
    dist = np.full(n, INF, dtype=np.int64)
    parent = np.full(n, -1, dtype=np.int64)
    dist[source] = 0
    seen = np.zeros(n, dtype=bool)
    c = count()
    heap = [(0, next(c), source)]
    ptr, nbr, eid = network.adj_ptr, network.adj_vertex, network.adj_edge
    w = np.asarray(metric, dtype=np.int64)
    while heap:
        d, _, u = heapq.heappop(heap)
        if seen[u]:
            continue
        if u == target:
            break
        seen[u] = True
        for i in range(ptr[u], ptr[u + 1]):
            v = nbr[i]
            nd = d + w[eid[i]]
            if nd < dist[v]:
                dist[v] = nd
                parent[v] = u
                heapq.heappush(heap, (nd, next(c), v))
    if dist[target] >= INF:
        return INF, None
    path = [target]
    while path[-1] != source:
        path.append(int(parent[path[-1]]))
    path.reverse()
    return int(dist[target]), path


def connected_components(network: RoadNetwork) -> tuple[int, np.ndarray]:
    """Component count and per-vertex component label (scipy-backed)."""
    n = network.vertex_count
    dat = np.ones(2 * network.edge_count, dtype=np.int8)
    row = np.concatenate([network.edge_u, network.edge_v])
    col = np.concatenate([network.edge_v, network.edge_u])
    mat = csr_matrix((dat, (row, col)), shape=(n, n))
    ncomp, labels = _csgraph.connected_components(mat, directed=False)
    return int(ncomp), labels


def largest_component(network: RoadNetwork):
    """Restrict a network to its largest connected component.

    Returns ``(sub_network, orig_of, core_of, sub_edge_orig)``: ``orig_of[i]``
    is the original id of component vertex ``i``, ``core_of`` maps original
    ids to component ids (-1 outside the component), and ``sub_edge_orig``
    maps sub-network edge ids back to original edge ids.
    """
    ncomp, labels = connected_components(network)
    if ncomp == 1:
        ident = np.arange(network.vertex_count, dtype=np.int64)
        eident = np.arange(network.edge_count, dtype=np.int64)
        return network, ident, ident.copy(), eident
    sizes = np.bincount(labels, minlength=ncomp)
    keep = int(np.argmax(sizes))
    orig_of = np.where(labels == keep)[0].astype(np.int64)
    core_of = np.full(network.vertex_count, -1, dtype=np.int64)
    core_of[orig_of] = np.arange(len(orig_of), dtype=np.int64)
    mask = labels[network.edge_u] == keep
    sub_edge_orig = np.where(mask)[0].astype(np.int64)
    pairs = zip(core_of[network.edge_u[mask]], core_of[network.edge_v[mask]])
    sub = RoadNetwork(len(orig_of), pairs)
    return sub, orig_of, core_of, sub_edge_orig


# ---------------------------------------------------------------------------
# degree-one contraction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReattachmentMap:
    """Pendant-tree bookkeeping for :func:`contract_degree_one`.

    ``parent``/``parent_edge`` give, for each removed vertex, the neighbor it
    was attached to at removal time and the connecting edge id (original
    numbering).  ``core_of``/``orig_of`` translate between original ids and the
    compact core numbering; ``core_edge_orig`` maps core edge ids to original
    edge ids so a metric can be projected with :meth:`core_metric`.
    """

    core_of: np.ndarray
    orig_of: np.ndarray
    parent: np.ndarray
    parent_edge: np.ndarray
    core_edge_orig: np.ndarray

    def in_core(self, v: int) -> bool:
        return self.core_of[v] >= 0

    def core_metric(self, metric: np.ndarray) -> np.ndarray:
        return np.asarray(metric)[self.core_edge_orig]

    def pendant_path(self, v: int, metric: np.ndarray):
        """Walk from ``v`` to its core anchor.

        Returns ``(anchor, cost, path)`` in original ids, ``path`` running
        from ``v`` to the anchor inclusive.  For core vertices this is
        ``(v, 0, [v])``.
        """
        w = np.asarray(metric, dtype=np.int64)
        cost = 0
        path = [int(v)]
        while self.core_of[path[-1]] < 0:
            e = int(self.parent_edge[path[-1]])
            cost += int(w[e])
            path.append(int(self.parent[path[-1]]))
        return path[-1], cost, path


def contract_degree_one(network: RoadNetwork) -> tuple[RoadNetwork, ReattachmentMap]:
    """Peel degree-one vertices until the core has minimum degree >= 2.

    The contraction is metric-independent: the returned
    :class:`ReattachmentMap` records attachment *edges*, and costs are
    resolved against a metric only when a pendant path is walked.  A tree
    input collapses to a single core vertex.
    """
    n = network.vertex_count
    deg = np.diff(network.adj_ptr).astype(np.int64)
    removed = np.zeros(n, dtype=bool)
    parent = np.full(n, -1, dtype=np.int64)
    parent_edge = np.full(n, -1, dtype=np.int64)
    stack = [v for v in range(n) if deg[v] == 1]
    while stack:
        v = stack.pop()
        if removed[v] or deg[v] != 1:
            continue
        # locate the single surviving neighbor
        for i in range(network.adj_ptr[v], network.adj_ptr[v + 1]):
            u = int(network.adj_vertex[i])
            if not removed[u]:
                parent[v] = u
                parent_edge[v] = int(network.adj_edge[i])
                break
        removed[v] = True
        deg[v] = 0
        u = int(parent[v])
        deg[u] -= 1
        if deg[u] == 1:
            stack.append(u)

    orig_of = np.where(~removed)[0].astype(np.int64)
    core_of = np.full(n, -1, dtype=np.int64)
    core_of[orig_of] = np.arange(len(orig_of), dtype=np.int64)
    mask = ~(removed[network.edge_u] | removed[network.edge_v])
    core_edge_orig = np.where(mask)[0].astype(np.int64)
    core = RoadNetwork(
        len(orig_of),
        zip(core_of[network.edge_u[mask]], core_of[network.edge_v[mask]]),
    )
    for arr in (core_of, orig_of, parent, parent_edge, core_edge_orig):
        arr.setflags(write=False)
    return core, ReattachmentMap(core_of, orig_of, parent, parent_edge, core_edge_orig)


# ---------------------------------------------------------------------------
# benchmark query-set generation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuerySet:
    """One distance-stratified benchmark set: pairs with distance in (lo, hi]."""

    lo: float
    hi: float
    pairs: tuple


def approx_max_distance(
    network: RoadNetwork,
    metric: np.ndarray,
    coords: np.ndarray | None = None,
    rounds: int = 5,
) -> int:
    """Estimate the network diameter by repeated farthest-vertex sweeps.

    Starts from the vertex with extreme coordinates when available (otherwise
    vertex 0), then hops to the farthest reachable vertex ``rounds`` times.
    """
    if coords is not None:
        start = int(np.argmax(coords[:, 0] + coords[:, 1]))
    else:
        start = 0
    mat = to_scipy_csr(network, metric)
    best = 0
    v = start
    for _ in range(rounds):
        dist = _csgraph.dijkstra(mat, directed=False, indices=v)
        dist[np.isinf(dist)] = -1
        far = int(np.argmax(dist))
        if dist[far] <= best:
            break
        best = int(dist[far])
        v = far
    return best


def generate_query_sets(
    network: RoadNetwork,
    metric: np.ndarray,
    coords: np.ndarray | None,
    per_set: int,
    *,
    sets: int = 10,
    l_min: int = 1000,
    seed: int = 0,
    attempt_factor: int = 50,
) -> list[QuerySet]:
    """Generate distance-stratified query sets Q1..Q{sets}.

    Set ``i`` (1-based) holds up to ``per_set`` pairs whose network distance
    lies in ``(l_min * x**(i-1), l_min * x**i]`` with
    ``x = (l_max / l_min) ** (1/sets)``.  Sampling is rejection-based with a
    per-set attempt cap of ``attempt_factor * per_set`` source draws; a set
    that cannot be filled comes back partial with a warning.
    """
    rng = random.Random(seed)
    n = network.vertex_count
    l_max = max(approx_max_distance(network, metric, coords), l_min)
    x = (l_max / l_min) ** (1.0 / sets)
    mat = to_scipy_csr(network, metric)
    result = []
    for i in range(1, sets + 1):
        lo = l_min * x ** (i - 1)
        hi = l_min * x**i
        pairs: list[tuple[int, int]] = []
        attempts = 0
        cap = attempt_factor * per_set
        while len(pairs) < per_set and attempts < cap:
            attempts += 1
            s = rng.randrange(n)
            dist = _csgraph.dijkstra(mat, directed=False, indices=s)
            cand = np.where((dist > lo) & (dist <= hi))[0]
            if len(cand) == 0:
                continue
            t = int(cand[rng.randrange(len(cand))])
            pairs.append((s, t))
        if len(pairs) < per_set:
            warnings.warn(
                f"query set {i} ({lo:.0f}, {hi:.0f}]: only {len(pairs)}/{per_set} "
                f"pairs found within {cap} attempts"
            )
        result.append(QuerySet(lo, hi, tuple(pairs)))
    return result
