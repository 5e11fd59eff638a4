"""Independent cascade diffusion: sampling, cascades with edge-level
feedback, and exact / Monte-Carlo influence probabilities."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, InvalidArgument
from .graph import UNSAMPLED, Graph, check_seed_set, check_weights

#: Largest number of enumeration states an exact computation may visit.
MAX_EXACT_STATES = 2**20


@dataclass(frozen=True)
class CascadeOutcome:
    """Result of one cascade.

    ``observed`` lists ``(edge index, realized value)`` pairs in the
    breadth-first order in which the edges were attempted; an edge is
    observed exactly when its start node is influenced.
    """

    influenced: frozenset
    observed: tuple
    realization: np.ndarray

    @property
    def reward(self) -> int:
        return len(self.influenced)

    @property
    def observed_edges(self) -> list[int]:
        return [e for e, _ in self.observed]


@dataclass(frozen=True)
class SpreadEstimate:
    mean: float
    std_error: float
    samples: int


def sample_realization(weights, rng) -> np.ndarray:
    """Draw every edge independently as Bernoulli(weight)."""
    w = np.asarray(weights, dtype=float)
    return (rng.random(w.shape[0]) < w).astype(np.int8)


def empty_realization(graph: Graph) -> np.ndarray:
    return np.full(graph.n_edges, UNSAMPLED, dtype=np.int8)


def run_cascade(graph: Graph, sources, weights, rng, realization=None) -> CascadeOutcome:
    """Run one independent cascade from ``sources``.

    Edge realizations are drawn lazily, the first time an edge is attempted.
    Passing a shared ``realization`` buffer (see :func:`empty_realization`)
    lets several cascades in the same round see the same binary weights;
    entries already sampled are reused, missing ones are drawn and stored.

    Sources are processed in ascending id order and each node's downstream
    neighbours in ascending id order, which fixes the observation order.
    """
    seeds = sorted(set(int(s) for s in sources))
    if realization is None:
        realization = empty_realization(graph)
    w = weights
    influenced = set(seeds)
    queue = deque(seeds)
    observed = []
    out_adj = graph.out_adj
    while queue:
        u = queue.popleft()
        for v, e in out_adj[u]:
            val = realization[e]
            if val == UNSAMPLED:
                val = 1 if rng.random() < w[e] else 0
                realization[e] = val
            observed.append((e, int(val)))
            if val == 1 and v not in influenced:
                influenced.add(v)
                queue.append(v)
    return CascadeOutcome(frozenset(influenced), tuple(observed), realization)


# --------------------------------------------------------------------------
# Monte-Carlo estimates


def _reach_matrix(graph: Graph, seeds, live: np.ndarray) -> np.ndarray:
    """Boolean (samples, L) matrix of influenced nodes, one row per realization."""
    n = live.shape[0]
    reached = np.zeros((n, graph.n_nodes + 1), dtype=bool)
    reached[:, list(seeds)] = True
    if graph.n_edges == 0:
        return reached[:, 1:]
    starts, ends = graph.starts, graph.ends
    order = np.argsort(ends, kind="stable")
    ends_sorted = ends[order]
    cuts = np.flatnonzero(np.diff(ends_sorted)) + 1
    heads = np.concatenate(([0], cuts))
    targets = ends_sorted[heads]
    while True:
        fire = reached[:, starts] & live
        hit = np.logical_or.reduceat(fire[:, order], heads, axis=1)
        new = reached.copy()
        new[:, targets] |= hit
        if np.array_equal(new, reached):
            return reached[:, 1:]
        reached = new


def _mc_reach(graph, seeds, weights, samples, rng, chunk=4096):
    w = np.asarray(weights, dtype=float)
    for start in range(0, samples, chunk):
        m = min(chunk, samples - start)
        live = rng.random((m, graph.n_edges)) < w
        yield _reach_matrix(graph, seeds, live)


def spread_mc(graph: Graph, sources, weights, samples: int, rng) -> SpreadEstimate:
    """Monte-Carlo estimate of the expected number of influenced nodes."""
    if samples < 1:
        raise InvalidArgument("samples must be >= 1")
    seeds = check_seed_set(graph, sources)
    w = check_weights(graph, weights)
    sizes = np.concatenate([r.sum(axis=1) for r in _mc_reach(graph, seeds, w, samples, rng)])
    std_error = float(sizes.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return SpreadEstimate(float(sizes.mean()), std_error, samples)


def influence_probs_mc(graph: Graph, sources, weights, samples: int, rng) -> np.ndarray:
    """Per-node influence frequencies over ``samples`` cascades (entry ``v-1``)."""
    if samples < 1:
        raise InvalidArgument("samples must be >= 1")
    seeds = check_seed_set(graph, sources)
    w = check_weights(graph, weights)
    total = np.zeros(graph.n_nodes)
    for r in _mc_reach(graph, seeds, w, samples, rng):
        total += r.sum(axis=0)
    return total / samples


# --------------------------------------------------------------------------
# exact influence probabilities


def _positive_reach(graph: Graph, seeds, w) -> tuple[list[int], list[int]]:
    """Nodes and edges that can carry influence (positive-probability paths)."""
    seen = set(seeds)
    queue = deque(seeds)
    edges = []
    while queue:
        u = queue.popleft()
        for v, e in graph.out_adj[u]:
            if w[e] <= 0.0:
                continue
            edges.append(e)
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return sorted(seen), edges


def _probs_forest(graph: Graph, seeds, w) -> np.ndarray:
    """Exact node probabilities on graphs whose undirected skeleton is a forest.

    Removing the skeleton edge {c, u} splits the forest, so influence that
    enters ``u`` through ``c`` is independent of everything on ``u``'s side.
    Messages ``msg[(c, u)]`` hold that probability and are computed with an
    upward pass followed by a downward pass.
    """
    L = graph.n_nodes
    nb = graph.neighbors
    is_src = [False] * (L + 1)
    for s in seeds:
        is_src[s] = True
    idx = graph._index

    def p(c, u):
        e = idx.get((c, u))
        return 0.0 if e is None else float(w[e])

    order, parent = graph.bfs_forest

    msg: dict[tuple[int, int], float] = {}

    def active_without(c, skip):
        # probability c is influenced using only edges on the far side of skip
        if is_src[c]:
            return 1.0
        prod = 1.0
        for g in nb[c]:
            if g != skip:
                prod *= 1.0 - msg[(g, c)]
        return 1.0 - prod

    for c in reversed(order):
        if parent[c]:
            msg[(c, parent[c])] = p(c, parent[c]) * active_without(c, parent[c])
    for u in order:
        for c in nb[u]:
            if c != parent[u]:
                msg[(u, c)] = p(u, c) * active_without(u, c)

    probs = np.empty(L)
    for v in range(1, L + 1):
        if is_src[v]:
            probs[v - 1] = 1.0
        else:
            prod = 1.0
            for g in nb[v]:
                prod *= 1.0 - msg[(g, v)]
            probs[v - 1] = 1.0 - prod
    return probs


def forest_probs_batch(graph: Graph, seed_sets, weights) -> np.ndarray:
    """Exact node probabilities for many seed sets at once on a forest.

    The same two-pass message passing as the single-set case, run level by
    level over the BFS depth with every message a vector over the batch.
    Returns an array of shape ``(len(seed_sets), L)``.
    """
    layout = graph.forest_levels
    if layout is None:
        raise InvalidArgument("batched message passing needs a forest skeleton")
    levels, parent, up_edge, down_edge = layout
    w = check_weights(graph, weights)
    L = graph.n_nodes
    B = len(seed_sets)
    src = np.zeros((L + 1, B), dtype=bool)
    for b, seeds in enumerate(seed_sets):
        src[list(check_seed_set(graph, seeds)), b] = True
    w_ext = np.append(w, 0.0)  # index -1 reads the zero weight of a missing edge
    w_up = w_ext[up_edge][:, None]
    w_down = w_ext[down_edge][:, None]

    # miss probabilities: influence does not enter c from its subtree side
    # (child_nz/child_zeros: product of nonzero factors and count of zeros)
    child_nz = np.ones((L + 1, B))
    child_zeros = np.zeros((L + 1, B), dtype=np.int64)
    up_miss = np.ones((L + 1, B))
    for lv, starts, pars in reversed(levels[1:]):
        inner = np.where(child_zeros[lv] > 0, 0.0, child_nz[lv])
        up_miss[lv] = 1.0 - w_up[lv] * np.where(src[lv], 1.0, 1.0 - inner)
        zero = up_miss[lv] == 0.0
        # every child of a parent sits in this level, so plain assignment
        child_nz[pars] = np.multiply.reduceat(np.where(zero, 1.0, up_miss[lv]), starts, axis=0)
        child_zeros[pars] = np.add.reduceat(zero.astype(np.int64), starts, axis=0)
    # down_miss[c]: influence does not enter c from its parent's side
    down_miss = np.ones((L + 1, B))
    for lv, _, _ in levels[1:]:
        par = parent[lv]
        zeros = child_zeros[par]
        own_zero = up_miss[lv] == 0.0
        siblings = np.where(
            own_zero,
            np.where(zeros == 1, child_nz[par], 0.0),
            np.where(zeros == 0, child_nz[par] / np.where(own_zero, 1.0, up_miss[lv]), 0.0),
        )
        reach_par = 1.0 - siblings * down_miss[par]
        down_miss[lv] = 1.0 - w_down[lv] * np.where(src[par], 1.0, reach_par)
    total = np.where(child_zeros > 0, 0.0, child_nz) * down_miss
    probs = np.where(src, 1.0, 1.0 - total)
    return probs[1:].T.copy()


def _probs_edge_enum(graph: Graph, seeds, w, edges) -> np.ndarray:
    """Exact node probabilities by enumerating every uncertain edge state."""
    uncertain = [e for e in edges if w[e] < 1.0]
    n_states = 1 << len(uncertain)
    states = np.arange(n_states, dtype=np.int64)
    live = np.zeros((n_states, graph.n_edges), dtype=bool)
    prob = np.ones(n_states)
    for e in edges:
        if w[e] >= 1.0:
            live[:, e] = True
    for j, e in enumerate(uncertain):
        bit = ((states >> j) & 1).astype(bool)
        live[:, e] = bit
        prob *= np.where(bit, w[e], 1.0 - w[e])
    reached = _reach_matrix(graph, seeds, live)
    return prob @ reached


def _probs_subset_dp(graph: Graph, seeds, w, nodes) -> np.ndarray:
    """Exact node probabilities by a recursion over influenced node sets.

    With ``A`` the final influenced set, P(A) = g(A) * q(A, V'\\A) where
    q(B, C) is the probability that no edge from B into C is live and g(A)
    the probability that every node of A is reached using edges inside A:
    g(A) = 1 - sum over S <= B < A of g(B) q(B, A\\B).
    """
    seed_set = set(seeds)
    others = [v for v in nodes if v not in seed_set]
    m = len(others)
    pos = {v: j for j, v in enumerate(others)}
    full = (1 << m) - 1
    # miss[x] over sources: probability no source edge fires into x
    base = [1.0] * m
    miss_from = [[1.0] * m for _ in range(m)]
    for u in nodes:
        for v, e in graph.out_adj[u]:
            if v in pos and w[e] > 0.0:
                if u in seed_set:
                    base[pos[v]] *= 1.0 - w[e]
                elif u in pos:
                    miss_from[pos[u]][pos[v]] *= 1.0 - w[e]
    # h[B][x] = prob. that no edge from seeds + B into x is live
    h = [base]
    for sub in range(1, full + 1):
        low = (sub & -sub).bit_length() - 1
        prev = h[sub ^ (1 << low)]
        row = miss_from[low]
        h.append([a * b for a, b in zip(prev, row)])

    def q_table(b):
        comp = full ^ b
        hb = h[b]
        table = {0: 1.0}
        c = comp & -comp
        while c:
            low = (c & -c).bit_length() - 1
            table[c] = table[c & (c - 1)] * hb[low]
            c = (c - comp) & comp
        return table

    q = [q_table(b) for b in range(full + 1)]
    g = [0.0] * (full + 1)
    for a in range(full + 1):
        total = 0.0
        b = (a - 1) & a  # proper submasks of a, descending
        while True:
            if b != a:
                total += g[b] * q[b][a ^ b]
            if b == 0:
                break
            b = (b - 1) & a
        g[a] = 1.0 - total if a else 1.0
    probs = np.zeros(graph.n_nodes)
    for s in seeds:
        probs[s - 1] = 1.0
    for a in range(full + 1):
        pa = g[a] * q[a][full ^ a]
        if pa == 0.0:
            continue
        x = a
        while x:
            low = (x & -x).bit_length() - 1
            probs[others[low] - 1] += pa
            x &= x - 1
    return probs


def influence_probs_exact(graph: Graph, sources, weights, max_states: int = MAX_EXACT_STATES) -> np.ndarray:
    """Exact probability that each node is influenced (entry ``v-1``).

    The method is chosen per call: message passing when the skeleton is a
    forest, otherwise whichever of edge-state enumeration (``2**u`` states
    over the ``u`` uncertain reachable edges) or influenced-set recursion
    (``3**m`` states over the ``m`` reachable non-seed nodes) is smaller.

    Raises
    ------
    CapacityError
        When both enumerations exceed ``max_states``; use :func:`spread_mc`.
    """
    seeds = check_seed_set(graph, sources)
    w = check_weights(graph, weights)
    if graph.is_forest:
        return _probs_forest(graph, seeds, w)
    nodes, edges = _positive_reach(graph, seeds, w)
    n_uncertain = sum(1 for e in edges if w[e] < 1.0)
    m = len(nodes) - len(seeds)
    edge_states = 2**n_uncertain
    subset_states = 3**m
    if min(edge_states, subset_states) > max_states:
        raise CapacityError(
            f"exact influence needs {min(edge_states, subset_states)} states "
            f"(cap {max_states}); use spread_mc for this instance"
        )
    if edge_states <= subset_states:
        return _probs_edge_enum(graph, seeds, w, edges)
    return _probs_subset_dp(graph, seeds, w, nodes)


def influence_prob_exact(graph: Graph, sources, weights, v: int, max_states: int = MAX_EXACT_STATES) -> float:
    """Exact probability that node ``v`` is influenced from ``sources``."""
    if not 1 <= v <= graph.n_nodes:
        raise InvalidArgument(f"node {v} outside 1..{graph.n_nodes}")
    if v in set(int(s) for s in sources):
        check_seed_set(graph, sources)
        return 1.0
    return float(influence_probs_exact(graph, sources, weights, max_states)[v - 1])


def spread_exact(graph: Graph, sources, weights, max_states: int = MAX_EXACT_STATES) -> float:
    """Exact expected number of influenced nodes."""
    return float(influence_probs_exact(graph, sources, weights, max_states).sum())


def partial_derivative_exact(graph: Graph, sources, weights, edge: int, v: int, max_states: int = MAX_EXACT_STATES) -> float:
    """Derivative of the influence probability of ``v`` in the weight of ``edge``.

    The influence probability is affine in each edge weight, so the
    derivative is the difference between fixing the edge live and dead.
    """
    w = check_weights(graph, weights)
    if not 0 <= edge < graph.n_edges:
        raise InvalidArgument(f"edge index {edge} out of range")
    hi = w.copy()
    hi[edge] = 1.0
    lo = w.copy()
    lo[edge] = 0.0
    return influence_prob_exact(graph, sources, hi, v, max_states) - influence_prob_exact(
        graph, sources, lo, v, max_states
    )


def fixed_weights(weights, live=(), dead=()) -> np.ndarray:
    """Copy of ``weights`` with the edges in ``live`` set to 1 and ``dead`` to 0."""
    w = np.array(weights, dtype=float)
    w[list(live)] = 1.0
    w[list(dead)] = 0.0
    return w


def singleton_spreads_exact(graph: Graph, weights, max_states: int = MAX_EXACT_STATES) -> np.ndarray:
    """Exact spread of every single-node seed set (entry ``s-1``).

    On forests each node is reached from ``s`` only along its unique path,
    so all spreads come from one sparse product of path incidences with
    log-weights.
    """
    w = check_weights(graph, weights)
    paths = graph.forest_paths
    if paths is None:
        return np.array([spread_exact(graph, (s,), w, max_states) for s in graph.nodes])
    srcs, inc = paths
    with np.errstate(divide="ignore"):
        logw = np.log(w)
    reach = np.exp(inc @ logw) if inc.shape[0] else np.zeros(0)
    return 1.0 + np.bincount(srcs - 1, weights=reach, minlength=graph.n_nodes)
