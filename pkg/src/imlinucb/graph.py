"""Directed graphs with canonical edge indexing, topology generators,
reachability and edge relevance.

Node ids are ``1..L``. Edges are stored in lexicographic ``(start, end)``
order, so the edges leaving node ``u`` form the contiguous index range
``out_ptr[u]:out_ptr[u + 1]`` sorted by end node.
"""

from __future__ import annotations

import math
from collections import deque
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import CapacityError, InvalidArgument, LoadError

#: Marker for realization entries that were never sampled.
UNSAMPLED = -1

TOPOLOGIES = ("bar", "star", "ray", "grid", "complete", "line", "random_tree")


class Graph:
    """Immutable directed graph on nodes ``1..L``.

    Parameters
    ----------
    n_nodes : int
        Number of nodes ``L``.
    edges : iterable of (int, int)
        Directed edges. They are re-sorted into canonical order; duplicates
        and self-loops are rejected.
    """

    def __init__(self, n_nodes: int, edges: Iterable[tuple[int, int]]):
        if int(n_nodes) < 1:
            raise InvalidArgument(f"graph needs at least one node, got {n_nodes}")
        self.n_nodes = int(n_nodes)
        edge_list = sorted((int(u), int(v)) for u, v in edges)
        for i, (u, v) in enumerate(edge_list):
            if u == v:
                raise InvalidArgument(f"self-loop on node {u}")
            if not (1 <= u <= self.n_nodes and 1 <= v <= self.n_nodes):
                raise InvalidArgument(f"edge ({u}, {v}) has a node outside 1..{self.n_nodes}")
            if i and edge_list[i - 1] == (u, v):
                raise InvalidArgument(f"duplicate edge ({u}, {v})")
        self.edges: tuple[tuple[int, int], ...] = tuple(edge_list)
        self.starts = np.array([u for u, _ in edge_list], dtype=np.int64)
        self.ends = np.array([v for _, v in edge_list], dtype=np.int64)
        self.starts.setflags(write=False)
        self.ends.setflags(write=False)
        counts = np.bincount(self.starts, minlength=self.n_nodes + 1)
        ptr = np.zeros(self.n_nodes + 2, dtype=np.int64)
        ptr[1:] = np.cumsum(counts)
        # ptr[u] is the first edge leaving u (node 0 is unused and empty)
        self.out_ptr = ptr
        self.out_ptr.setflags(write=False)
        self._index = {e: i for i, e in enumerate(edge_list)}
        # plain-list adjacency for the pure-Python hot loops
        self.out_adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n_nodes + 1)]
        self.in_adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n_nodes + 1)]
        for i, (u, v) in enumerate(edge_list):
            self.out_adj[u].append((v, i))
            self.in_adj[v].append((u, i))

    @property
    def L(self) -> int:
        return self.n_nodes

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def nodes(self) -> range:
        return range(1, self.n_nodes + 1)

    def edge_id(self, u: int, v: int) -> int:
        try:
            return self._index[(int(u), int(v))]
        except KeyError:
            raise InvalidArgument(f"no edge ({u}, {v})") from None

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in self._index

    def out_edges(self, u: int) -> range:
        return range(int(self.out_ptr[u]), int(self.out_ptr[u + 1]))

    def __repr__(self):
        return f"Graph(L={self.n_nodes}, |E|={self.n_edges})"

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n_nodes == other.n_nodes and self.edges == other.edges

    def __hash__(self):
        return hash((self.n_nodes, self.edges))

    @cached_property
    def undirected_pairs(self) -> list[tuple[int, int]]:
        return sorted({(min(u, v), max(u, v)) for u, v in self.edges})

    @cached_property
    def is_forest(self) -> bool:
        """True when the underlying undirected simple graph has no cycle."""
        parent = list(range(self.n_nodes + 1))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for u, v in self.undirected_pairs:
            ru, rv = find(u), find(v)
            if ru == rv:
                return False
            parent[ru] = rv
        return True

    @cached_property
    def neighbors(self) -> list[list[int]]:
        """Undirected neighbor lists (ascending)."""
        nb: list[set[int]] = [set() for _ in range(self.n_nodes + 1)]
        for u, v in self.edges:
            nb[u].add(v)
            nb[v].add(u)
        return [sorted(s) for s in nb]

    @cached_property
    def bfs_forest(self) -> tuple[list[int], list[int]]:
        """``(order, parent)`` of a BFS over the undirected skeleton, roots
        taken in ascending id; ``parent[root] == 0``."""
        nb = self.neighbors
        parent = [0] * (self.n_nodes + 1)
        visited = [False] * (self.n_nodes + 1)
        order = []
        for root in range(1, self.n_nodes + 1):
            if visited[root]:
                continue
            visited[root] = True
            queue = [root]
            head = 0
            while head < len(queue):
                u = queue[head]
                head += 1
                order.append(u)
                for v in nb[u]:
                    if not visited[v]:
                        visited[v] = True
                        parent[v] = u
                        queue.append(v)
        return order, parent

    @cached_property
    def forest_levels(self):
        """BFS layout for level-wise message passing on forest skeletons.

        Returns ``(levels, parent, up_edge, down_edge)``. ``levels[d]`` is a
        ``(nodes, group_starts, group_parents)`` triple: the nodes at depth
        ``d``, grouped contiguously by parent, with the offset and parent of
        each group. For each node ``c`` the arrays give its BFS parent and
        the edge indices ``(c, parent)`` and ``(parent, c)`` (``-1`` when
        that direction is absent). None for non-forests.
        """
        if not self.is_forest:
            return None
        order, parent = self.bfs_forest
        depth = [0] * (self.n_nodes + 1)
        for u in order:
            if parent[u]:
                depth[u] = depth[parent[u]] + 1
        levels: list[list[int]] = [[] for _ in range(max(depth) + 1)]
        for u in order:
            levels[depth[u]].append(u)
        up = np.full(self.n_nodes + 1, -1, dtype=np.int64)
        down = np.full(self.n_nodes + 1, -1, dtype=np.int64)
        for c in order:
            if parent[c]:
                up[c] = self._index.get((c, parent[c]), -1)
                down[c] = self._index.get((parent[c], c), -1)
        packed = []
        for lv in levels:
            # BFS appends siblings consecutively, so each parent is one run
            starts = [i for i in range(len(lv)) if i == 0 or parent[lv[i]] != parent[lv[i - 1]]]
            packed.append(
                (
                    np.array(lv, dtype=np.int64),
                    np.array(starts, dtype=np.int64),
                    np.array([parent[lv[i]] for i in starts], dtype=np.int64),
                )
            )
        return packed, np.array(parent, dtype=np.int64), up, down

    @cached_property
    def forest_paths(self):
        """Path incidence for forest skeletons, or None for other graphs.

        Returns ``(sources, incidence)`` where row ``r`` of the sparse
        ``incidence`` matrix marks the directed edges on the unique path from
        ``sources[r]`` to some other node. Pairs whose skeleton path is not
        fully directed that way are left out.
        """
        if not self.is_forest:
            return None
        rows, cols, srcs = [], [], []
        r = 0
        for s in self.nodes:
            stack = [(s, 0, ())]
            while stack:
                u, par, path = stack.pop()
                for v, e in self.out_adj[u]:
                    if v == par:
                        continue
                    p = path + (e,)
                    rows.extend([r] * len(p))
                    cols.extend(p)
                    srcs.append(s)
                    r += 1
                    stack.append((v, u, p))
        inc = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(r, self.n_edges))
        return np.asarray(srcs, dtype=np.int64), inc

    def weak_components(self) -> list[tuple[list[int], int]]:
        """Weakly connected components as ``(nodes, edge_count)`` pairs."""
        adj = csr_matrix(
            (np.ones(self.n_edges), (self.starts - 1, self.ends - 1)),
            shape=(self.n_nodes, self.n_nodes),
        )
        m, labels = connected_components(adj, directed=True, connection="weak")
        edge_counts = np.bincount(labels[self.starts - 1], minlength=m) if self.n_edges else np.zeros(m, int)
        comps = []
        for c in range(m):
            nodes = (np.flatnonzero(labels == c) + 1).tolist()
            comps.append((nodes, int(edge_counts[c])))
        return comps


# --------------------------------------------------------------------------
# validation helpers


def check_weights(graph: Graph, weights, name: str = "weights") -> np.ndarray:
    """Return ``weights`` as a float array after checking length and range."""
    w = np.asarray(weights, dtype=float)
    if w.shape != (graph.n_edges,):
        raise InvalidArgument(f"{name} must have shape ({graph.n_edges},), got {w.shape}")
    if w.size and (np.any(~np.isfinite(w)) or w.min() < 0.0 or w.max() > 1.0):
        raise InvalidArgument(f"{name} entries must lie in [0, 1]")
    return w


def constant_weights(graph: Graph, value: float) -> np.ndarray:
    if not 0.0 <= value <= 1.0:
        raise InvalidArgument(f"edge probability must be in [0, 1], got {value}")
    return np.full(graph.n_edges, float(value))


def check_seed_set(graph: Graph, sources, k: int | None = None) -> tuple[int, ...]:
    """Normalize a seed set to a sorted tuple and validate it."""
    seeds = tuple(sorted(int(s) for s in sources))
    if len(set(seeds)) != len(seeds):
        raise InvalidArgument(f"seed set has duplicates: {seeds}")
    for s in seeds:
        if not 1 <= s <= graph.n_nodes:
            raise InvalidArgument(f"seed {s} outside 1..{graph.n_nodes}")
    if k is not None and len(seeds) != k:
        raise InvalidArgument(f"expected {k} seeds, got {len(seeds)}")
    return seeds


# --------------------------------------------------------------------------
# topology generators


def _doubled(pairs):
    for u, v in pairs:
        yield (u, v)
        yield (v, u)


def ray_arm_sizes(n_nodes: int) -> list[int]:
    """Arm lengths of a ray graph; longer arms come first."""
    k = math.ceil(math.sqrt(n_nodes - 1))
    q, r = divmod(n_nodes - 1, k)
    return [q + 1] * r + [q] * (k - r)


def build_topology(kind: str, n_nodes: int, rng=None) -> Graph:
    """Generate one of the canonical topologies on nodes ``1..L``.

    Every undirected edge is represented by two opposite directed edges,
    except for ``complete`` which already contains all ``L(L-1)`` edges.

    Parameters
    ----------
    kind : {'bar', 'star', 'ray', 'grid', 'complete', 'line', 'random_tree'}
    n_nodes : int
        ``L >= 2``.
    rng : int or numpy.random.Generator, optional
        Only used by ``random_tree``.
    """
    L = int(n_nodes)
    if L < 2:
        raise InvalidArgument(f"topology needs L >= 2, got {n_nodes}")
    if kind == "bar":
        pairs = [(i, i + 1) for i in range(1, L, 2)]
    elif kind == "star":
        pairs = [(1, i) for i in range(2, L + 1)]
    elif kind == "ray":
        pairs = []
        nxt = 2
        for size in ray_arm_sizes(L):
            prev = 1
            for node in range(nxt, nxt + size):
                pairs.append((prev, node))
                prev = node
            nxt += size
    elif kind == "grid":
        cols = math.ceil(math.sqrt(L))
        pairs = []
        for i in range(1, L + 1):
            if i % cols != 0 and i + 1 <= L:
                pairs.append((i, i + 1))
            if i + cols <= L:
                pairs.append((i, i + cols))
    elif kind == "complete":
        return Graph(L, [(u, v) for u in range(1, L + 1) for v in range(1, L + 1) if u != v])
    elif kind == "line":
        pairs = [(i, i + 1) for i in range(1, L)]
    elif kind == "random_tree":
        gen = np.random.default_rng(rng)
        pairs = [(int(gen.integers(1, n)), n) for n in range(2, L + 1)]
    else:
        raise InvalidArgument(f"unknown topology {kind!r}; expected one of {TOPOLOGIES}")
    return Graph(L, _doubled(pairs))


# --------------------------------------------------------------------------
# reachability and relevance


def reachable(graph: Graph, realization, sources) -> set[int]:
    """Nodes influenced under a binary realization: the sources plus every
    node reachable through edges whose realization is 1."""
    w = np.asarray(realization)
    seeds = check_seed_set(graph, sources)
    seen = set(seeds)
    queue = deque(seeds)
    while queue:
        u = queue.popleft()
        for v, e in graph.out_adj[u]:
            val = w[e]
            if val == UNSAMPLED:
                raise InvalidArgument(f"edge {graph.edges[e]} is traversable but unsampled")
            if val == 1 and v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


#: Default cap on DFS steps spent enumerating simple paths.
MAX_PATH_STEPS = 2 * 10**6


class PathBudget:
    """DFS step allowance, shareable across several relevance computations."""

    def __init__(self, steps: int = MAX_PATH_STEPS):
        self.remaining = int(steps)
        self.cap = int(steps)

    def spend(self, n: int = 1) -> None:
        self.remaining -= n
        if self.remaining < 0:
            raise CapacityError(
                f"simple-path enumeration exceeded {self.cap} DFS steps; "
                "relevance counts are exponential in dense graphs"
            )


def relevance_map(graph: Graph, sources, budget: PathBudget | None = None) -> dict[int, set[int]]:
    """Map every non-source node ``v`` to its relevant edge indices.

    An edge is relevant to ``v`` when it lies on a simple path from some
    source to ``v`` that contains no other source. Paths are enumerated by
    DFS, so the cost grows with the number of such simple paths.

    Raises
    ------
    CapacityError
        When the DFS exceeds ``budget`` (``MAX_PATH_STEPS`` by default).
    """
    if budget is None:
        budget = PathBudget()
    seeds = check_seed_set(graph, sources)
    seed_set = set(seeds)
    rel: dict[int, set[int]] = {v: set() for v in graph.nodes if v not in seed_set}
    for s in seeds:
        on_path = [False] * (graph.n_nodes + 1)
        on_path[s] = True
        path: list[int] = []
        stack = [iter(graph.out_adj[s])]
        while stack:
            step = next(stack[-1], None)
            if step is None:
                stack.pop()
                if path:
                    on_path[graph.ends[path.pop()]] = False
                continue
            v, e = step
            if on_path[v] or v in seed_set:
                continue
            budget.spend()
            path.append(e)
            on_path[v] = True
            rel[v].update(path)
            stack.append(iter(graph.out_adj[v]))
    return rel


def relevant_edges(graph: Graph, sources, v: int) -> set[int]:
    """Edge indices relevant to node ``v`` under seed set ``sources``."""
    seeds = check_seed_set(graph, sources)
    if v in seeds:
        raise InvalidArgument(f"node {v} is a source; relevance is defined for non-sources")
    if not 1 <= v <= graph.n_nodes:
        raise InvalidArgument(f"node {v} outside 1..{graph.n_nodes}")
    return relevance_map(graph, seeds)[v]


# --------------------------------------------------------------------------
# edge-list files


def _parse_edge_lines(lines: Sequence[str], path) -> tuple[list[tuple[int, int, int]], list[float | None]]:
    raw = []
    probs: list[float | None] = []
    for lineno, line in enumerate(lines, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        parts = text.split()
        if len(parts) not in (2, 3):
            raise LoadError(f"expected 'start end [prob]', got {text!r}", path, lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise LoadError(f"node ids must be integers, got {text!r}", path, lineno) from None
        if u < 1 or v < 1:
            raise LoadError("node ids must be positive", path, lineno)
        p = None
        if len(parts) == 3:
            try:
                p = float(parts[2])
            except ValueError:
                raise LoadError(f"bad probability {parts[2]!r}", path, lineno) from None
            if not 0.0 <= p <= 1.0:
                raise LoadError(f"probability {p} outside [0, 1]", path, lineno)
        raw.append((lineno, u, v))
        probs.append(p)
    return raw, probs


def load_weighted_graph(path) -> tuple[Graph, np.ndarray | None]:
    """Read an edge-list file, returning the graph and, when every line has a
    third column, the edge probabilities in canonical edge order."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    raw, probs = _parse_edge_lines(lines, path)
    seen: set[tuple[int, int]] = set()
    for lineno, u, v in raw:
        if u == v:
            raise LoadError(f"self-loop on node {u}", path, lineno)
        if (u, v) in seen:
            raise LoadError(f"duplicate edge ({u}, {v})", path, lineno)
        seen.add((u, v))
    if not raw:
        raise LoadError("no edges found", path)
    has_p = [p is not None for p in probs]
    if any(has_p) and not all(has_p):
        first = raw[has_p.index(False)][0]
        raise LoadError("probability column must be present on every line or none", path, first)
    ids = sorted({u for _, u, _ in raw} | {v for _, _, v in raw})
    remap = {old: new for new, old in enumerate(ids, start=1)}
    edges = [(remap[u], remap[v]) for _, u, v in raw]
    graph = Graph(len(ids), edges)
    weights = None
    if all(has_p):
        weights = np.empty(graph.n_edges)
        for (u, v), p in zip(edges, probs):
            weights[graph.edge_id(u, v)] = p
    return graph, weights


def load_graph(path) -> Graph:
    """Read a graph from an edge-list file; node ids are compacted to 1..L."""
    return load_weighted_graph(path)[0]


def format_edge_list(graph: Graph, weights=None) -> str:
    lines = []
    for i, (u, v) in enumerate(graph.edges):
        if weights is None:
            lines.append(f"{u} {v}")
        else:
            lines.append(f"{u} {v} {float(weights[i]):.6g}")
    return "\n".join(lines) + "\n"


def save_graph(graph: Graph, path, weights=None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_edge_list(graph, weights))
