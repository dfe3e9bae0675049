"""Balanced separator-tree hierarchy and the vertex order derived from it.

The hierarchy is a binary tree of *separator nodes*: removing the vertices of
a node disconnects the vertex sets of its two child subtrees.  Concatenating
node vertex lists along root-to-leaf paths yields the hierarchical vertex
order: every vertex gets a rank (1-based, root-first), an ancestor chain, a
node-position bitstring identifier, and a rank array used for O(1) LCA-height
lookups.
"""
from __future__ import annotations

import random
import warnings
from collections import deque

import numpy as np

from .graph import RoadNetwork

#: Identifiers are packed into a single 64-bit word; deeper trees are rejected.
MAX_DEPTH = 64


class TreeNode:
    """One separator node: an ordered vertex list plus tree links."""

    __slots__ = ("id", "parent", "left", "right", "depth", "bits", "vertices")

    def __init__(self, id: int, parent: int, depth: int, bits: int, vertices: list[int]):
        self.id = id
        self.parent = parent
        self.left = -1
        self.right = -1
        self.depth = depth
        self.bits = bits  # root-first, packed from the MSB of a 64-bit word
        self.vertices = list(vertices)

    @property
    def is_leaf(self) -> bool:
        return self.left < 0 and self.right < 0

    def bitstring(self) -> str:
        """Human-readable identifier ('' for the root)."""
        return "".join("1" if self.bits >> (63 - i) & 1 else "0" for i in range(self.depth))


class TreeHierarchy:
    """Tree of separator nodes with a total vertex → node assignment."""

    def __init__(self, nodes: list[TreeNode], vertex_count: int, beta: float,
                 leaf_threshold: int):
        self.nodes = nodes
        self.vertex_count = vertex_count
        self.beta = beta
        self.leaf_threshold = leaf_threshold
        vertex_node = np.full(vertex_count, -1, dtype=np.int64)
        for node in nodes:
            for v in node.vertices:
                if vertex_node[v] >= 0:
                    raise ValueError(f"vertex {v} assigned to two nodes")
                vertex_node[v] = node.id
            if not node.vertices:
                raise ValueError(f"node {node.id} is empty")
        if np.any(vertex_node < 0):
            missing = int(np.argmin(vertex_node))
            raise ValueError(f"vertex {missing} not assigned to any node")
        self.vertex_node = vertex_node

    @property
    def root(self) -> TreeNode:
        return self.nodes[0]

    def node_path(self, node_id: int) -> list[int]:
        """Node ids from the root down to ``node_id`` inclusive."""
        path = []
        while node_id >= 0:
            path.append(node_id)
            node_id = self.nodes[node_id].parent
        path.reverse()
        return path


# ---------------------------------------------------------------------------
# hierarchy construction
# ---------------------------------------------------------------------------


class _Builder:
    """Recursive bipartitioning with stamped scratch arrays."""

    def __init__(self, network: RoadNetwork, beta: float, seed: int, leaf_threshold: int):
        self.net = network
        self.beta = beta
        self.rng = random.Random(seed)
        self.leaf_threshold = leaf_threshold
        n = network.vertex_count
        self.seen = np.zeros(n, dtype=np.int64)
        self.seen_tok = 0
        self.side = np.zeros(n, dtype=np.int64)
        self.side_tok = 0
        self.member = np.zeros(n, dtype=np.int64)
        self.member_tok = 0
        self.nodes: list[TreeNode] = []

    # -- scratch helpers ----------------------------------------------------

    def _set_part(self, part: list[int]) -> int:
        self.member_tok += 1
        tok = self.member_tok
        for v in part:
            self.member[v] = tok
        return tok

    def _components(self, part: list[int]) -> list[list[int]]:
        """Connected components of the induced subgraph, in min-id order."""
        tok = self._set_part(part)
        self.seen_tok += 1
        stok = self.seen_tok
        net = self.net
        comps = []
        for start in part:
            if self.seen[start] == stok:
                continue
            comp = [start]
            self.seen[start] = stok
            q = deque([start])
            while q:
                u = q.popleft()
                for w in net.neighbors(u):
                    w = int(w)
                    if self.member[w] == tok and self.seen[w] != stok:
                        self.seen[w] = stok
                        comp.append(w)
                        q.append(w)
            comps.append(sorted(comp))
        return comps

    def _bfs_farthest(self, start: int, tok: int) -> int:
        """Last vertex reached by BFS from ``start`` within the current part."""
        self.seen_tok += 1
        stok = self.seen_tok
        self.seen[start] = stok
        q = deque([start])
        last = start
        net = self.net
        while q:
            u = q.popleft()
            last = u
            for w in net.neighbors(u):
                w = int(w)
                if self.member[w] == tok and self.seen[w] != stok:
                    self.seen[w] = stok
                    q.append(w)
        return last

    # -- partitioners -------------------------------------------------------

    def _two_front(self, part: list[int], s1: int, s2: int, tok: int):
        """Grow BFS fronts from both seeds, always expanding the smaller side."""
        self.side_tok += 2
        t1, t2 = self.side_tok - 1, self.side_tok
        self.side[s1] = t1
        self.side[s2] = t2
        queues = (deque([s1]), deque([s2]))
        sides = ([s1], [s2])
        toks = (t1, t2)
        net = self.net
        while queues[0] or queues[1]:
            i = 0 if (queues[0] and (len(sides[0]) <= len(sides[1]) or not queues[1])) else 1
            u = queues[i].popleft()
            for w in net.neighbors(u):
                w = int(w)
                if self.member[w] == tok and self.side[w] not in (t1, t2):
                    self.side[w] = toks[i]
                    sides[i].append(w)
                    queues[i].append(w)
        return sides[0], sides[1]

    def _boundary(self, small: list[int], small_tok_other: int, tok: int) -> list[int]:
        net = self.net
        sep = []
        for v in small:
            for w in net.neighbors(v):
                w = int(w)
                if self.member[w] == tok and self.side[w] == small_tok_other:
                    sep.append(v)
                    break
        return sep

    def _split_connected(self, part: list[int]):
        """Growth bisection with retries, then degree-peel fallback."""
        beta = self.beta
        for _ in range(8):
            tok = self._set_part(part)
            s1 = part[self.rng.randrange(len(part))]
            s2 = self._bfs_farthest(s1, tok)
            if s2 == s1:
                continue
            a, b = self._two_front(part, s1, s2, tok)
            small, large = (a, b) if len(a) <= len(b) else (b, a)
            large_tok = self.side[large[0]]
            sep = self._boundary(small, large_tok, tok)
            sep_set = set(sep)
            left = sorted(v for v in small if v not in sep_set)
            right = sorted(large)
            total = len(left) + len(right)
            if left and right and max(len(left), len(right)) <= (1 - beta) * total:
                return sorted(sep), left, right
        warnings.warn("growth bisection missed the balance target; peeling separator greedily")
        return self._peel_fallback(part)

    def _peel_fallback(self, part: list[int]):
        """Move high-degree vertices into the separator until pieces pack small."""
        remaining = sorted(part)
        sep: list[int] = []
        while remaining:
            comps = self._components(remaining)
            comps.sort(key=lambda c: (-len(c), c[0]))
            if sep and len(comps[0]) <= 0.5 * len(remaining):
                break
            largest = comps[0]
            tok = self._set_part(remaining)
            net = self.net
            best, best_deg = largest[0], -1
            for v in largest:
                d = sum(1 for w in net.neighbors(v) if self.member[int(w)] == tok)
                if d > best_deg:
                    best, best_deg = v, d
            sep.append(best)
            remaining.remove(best)
        if not remaining:
            return None  # nothing left to split; caller makes a leaf
        comps = self._components(remaining)
        comps.sort(key=lambda c: (-len(c), c[0]))
        left: list[int] = []
        right: list[int] = []
        for c in comps:
            (left if len(left) <= len(right) else right).extend(c)
        if not left or not right:
            return None
        total = len(left) + len(right)
        if max(len(left), len(right)) > (1 - self.beta) * total:
            warnings.warn("accepting an unbalanced hierarchy node after fallback")
        return sorted(sep), sorted(left), sorted(right)

    def _split(self, part: list[int]):
        comps = self._components(part)
        if len(comps) == 1:
            return self._split_connected(part)
        comps.sort(key=lambda c: (-len(c), c[0]))
        if len(comps[0]) > (1 - self.beta) * (len(part) - 1):
            r = self._split_connected(comps[0])
            if r is None:
                return None
            sep, left, right = r
        else:
            x = comps[0][0]
            sep = [x]
            rest = [v for v in comps[0] if v != x]
            units = self._components(rest) if rest else []
            units.sort(key=lambda c: (-len(c), c[0]))
            left, right = [], []
            for c in units:
                (left if len(left) <= len(right) else right).extend(c)
        for c in comps[1:]:
            (left if len(left) <= len(right) else right).extend(c)
        if not left or not right:
            return None
        return sep, sorted(left), sorted(right)

    # -- recursion ----------------------------------------------------------

    def build(self, part: list[int], parent: int, depth: int, bits: int) -> int:
        if depth > MAX_DEPTH:
            raise ValueError(f"hierarchy depth exceeds {MAX_DEPTH}")
        nid = len(self.nodes)
        if len(part) <= self.leaf_threshold:
            self.nodes.append(TreeNode(nid, parent, depth, bits, sorted(part)))
            return nid
        r = self._split(part)
        if r is None:
            self.nodes.append(TreeNode(nid, parent, depth, bits, sorted(part)))
            return nid
        sep, left, right = r
        node = TreeNode(nid, parent, depth, bits, sep)
        self.nodes.append(node)
        node.left = self.build(left, nid, depth + 1, bits)
        node.right = self.build(right, nid, depth + 1, bits | (1 << (63 - depth)))
        return nid


def build_hierarchy(
    network: RoadNetwork,
    beta: float = 0.25,
    *,
    seed: int = 0,
    leaf_threshold: int = 16,
) -> TreeHierarchy:
    """Recursively bipartition a connected network into a separator tree.

    Each internal node stores a separator whose removal disconnects the two
    child parts; recursion stops at parts of ``leaf_threshold`` vertices,
    which become leaves.  ``beta`` in (0, 0.5) is the balance target: both
    child subtrees hold at most ``(1-beta)`` of their union.  The partitioner
    grows two BFS fronts from distance-separated seeds (up to 8 retries) and
    falls back to greedy degree peeling with a warning.
    """
    if not 0 < beta < 0.5:
        raise ValueError("beta must lie in (0, 0.5)")
    builder = _Builder(network, beta, seed, leaf_threshold)
    builder.build(list(range(network.vertex_count)), -1, 0, 0)
    return TreeHierarchy(builder.nodes, network.vertex_count, beta, leaf_threshold)


# ---------------------------------------------------------------------------
# vertex order, identifiers, rank arrays
# ---------------------------------------------------------------------------


class VertexOrder:
    """Ranks, ancestor chains, node identifiers, and rank arrays.

    Ranks are 1-based: the root node's first vertex has rank 1 and ranks grow
    along every root-to-leaf chain.  ``rank_array(v)`` holds the maximal rank
    inside each ancestor *node* of ``f(v)`` followed by ``rank(v)`` itself;
    together with the node bitstrings it answers :meth:`lca_height` without
    touching the tree.
    """

    def __init__(self, hierarchy: TreeHierarchy):
        self.hierarchy = hierarchy
        n = hierarchy.vertex_count
        nodes = hierarchy.nodes
        self.rank = np.zeros(n, dtype=np.int64)
        self.node_of = hierarchy.vertex_node
        self.pos_in_node = np.zeros(n, dtype=np.int64)
        self.node_prefix = np.zeros(len(nodes), dtype=np.int64)
        self.node_rank = np.zeros(len(nodes), dtype=np.int64)
        self.node_depth = np.fromiter((nd.depth for nd in nodes), dtype=np.int64,
                                      count=len(nodes))
        self.node_bits = np.fromiter((nd.bits for nd in nodes), dtype=np.uint64,
                                     count=len(nodes))

        # preorder walk accumulating ancestor sizes
        stack = [(0, 0)]
        while stack:
            nid, prefix = stack.pop()
            node = nodes[nid]
            self.node_prefix[nid] = prefix
            self.node_rank[nid] = prefix + len(node.vertices)
            for i, v in enumerate(node.vertices):
                self.rank[v] = prefix + i + 1
                self.pos_in_node[v] = i
            if node.right >= 0:
                stack.append((node.right, prefix + len(node.vertices)))
            if node.left >= 0:
                stack.append((node.left, prefix + len(node.vertices)))

        # subtree vertex counts -> descendant counts
        self.subtree_size = np.zeros(len(nodes), dtype=np.int64)
        for nid in range(len(nodes) - 1, -1, -1):
            node = nodes[nid]
            size = len(node.vertices)
            if node.left >= 0:
                size += self.subtree_size[node.left]
            if node.right >= 0:
                size += self.subtree_size[node.right]
            self.subtree_size[nid] = size
        # node ids are assigned preorder, so children always follow parents;
        # the reverse loop above sees children before parents
        self.desc_count = self.subtree_size[self.node_of] - self.pos_in_node

        # rank arrays, CSR over vertices: node ranks of strict node-ancestors
        # (root first) followed by the vertex's own rank
        lengths = self.node_depth[self.node_of] + 1
        self.ra_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(lengths, out=self.ra_ptr[1:])
        self.ra_val = np.zeros(int(self.ra_ptr[-1]), dtype=np.int64)
        node_paths = {nid: hierarchy.node_path(nid) for nid in range(len(nodes))}
        for v in range(n):
            base = self.ra_ptr[v]
            path = node_paths[int(self.node_of[v])]
            for lvl, nid in enumerate(path[:-1]):
                self.ra_val[base + lvl] = self.node_rank[nid]
            self.ra_val[base + len(path) - 1] = self.rank[v]

        self.max_rank = int(self.rank.max()) if n else 0
        for arr in (self.rank, self.pos_in_node, self.node_prefix, self.node_rank,
                    self.node_depth, self.node_bits, self.subtree_size,
                    self.desc_count, self.ra_ptr, self.ra_val):
            arr.setflags(write=False)

    # -- lookups ------------------------------------------------------------

    def rank_array(self, v: int) -> np.ndarray:
        return self.ra_val[self.ra_ptr[v]:self.ra_ptr[v + 1]]

    def identifier(self, v: int) -> str:
        return self.hierarchy.nodes[int(self.node_of[v])].bitstring()

    def ancestors(self, v: int) -> list[int]:
        """Ancestor vertices of ``v`` in rank order 1..rank(v) (inclusive)."""
        out: list[int] = []
        for nid in self.hierarchy.node_path(int(self.node_of[v])):
            node = self.hierarchy.nodes[nid]
            if nid == self.node_of[v]:
                out.extend(node.vertices[: int(self.pos_in_node[v]) + 1])
            else:
                out.extend(node.vertices)
        return out

    def descendants(self, v: int) -> list[int]:
        """Descendant vertices of ``v`` (those having ``v`` as an ancestor)."""
        nid = int(self.node_of[v])
        node = self.hierarchy.nodes[nid]
        out = list(node.vertices[int(self.pos_in_node[v]):])
        stack = [c for c in (node.left, node.right) if c >= 0]
        while stack:
            nd = self.hierarchy.nodes[stack.pop()]
            out.extend(nd.vertices)
            if nd.left >= 0:
                stack.append(nd.left)
            if nd.right >= 0:
                stack.append(nd.right)
        return out

    def lca_height(self, s: int, t: int) -> int:
        """Rank of the lowest common ancestor vertex of ``s`` and ``t``.

        Equals ``|anc(s) ∩ anc(t)|``: common ancestors are exactly a shared
        prefix of both ancestor chains.  Computed from the identifier common
        prefix plus one rank-array lookup.
        """
        ns, nt = int(self.node_of[s]), int(self.node_of[t])
        ds, dt = int(self.node_depth[ns]), int(self.node_depth[nt])
        xor = int(self.node_bits[ns]) ^ int(self.node_bits[nt])
        cpl = min(ds, dt) if xor == 0 else min(ds, dt, 64 - xor.bit_length())
        if cpl == ds == dt:
            return int(min(self.rank[s], self.rank[t]))
        if cpl == ds:
            return int(self.rank[s])
        if cpl == dt:
            return int(self.rank[t])
        return int(self.ra_val[self.ra_ptr[s] + cpl])


def derive_order(hierarchy: TreeHierarchy) -> VertexOrder:
    """Derive ranks/identifiers/rank-arrays from a hierarchy.

    Vertices are ranked by position along the root-to-leaf node chain, using
    each node's stored vertex-list order (:func:`build_hierarchy` stores lists
    ascending by id, which makes the result deterministic).
    """
    return VertexOrder(hierarchy)
