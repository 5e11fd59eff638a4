"""Brute-force reference implementations shared by the tests.

These deliberately avoid the package's own traversal code: reachability is
a plain fixpoint over edge tuples and probabilities are sums over every
binary realization.
"""

import itertools

import numpy as np
import pytest

from imlinucb.graph import Graph, build_topology


def reach_set(n_nodes, edges, live, seeds):
    """Nodes reachable from ``seeds`` over live edges (fixpoint iteration)."""
    reached = set(seeds)
    changed = True
    while changed:
        changed = False
        for (u, v), on in zip(edges, live):
            if on and u in reached and v not in reached:
                reached.add(v)
                changed = True
    return reached


def brute_probs(graph, seeds, weights):
    """Exact per-node influence probabilities by summing over all 2^|E|
    realizations. Returns an array indexed by ``v - 1``."""
    w = np.asarray(weights, dtype=float)
    probs = np.zeros(graph.n_nodes)
    for live in itertools.product((0, 1), repeat=graph.n_edges):
        p = 1.0
        for on, we in zip(live, w):
            p *= we if on else 1.0 - we
        if p == 0.0:
            continue
        for v in reach_set(graph.n_nodes, graph.edges, live, seeds):
            probs[v - 1] += p
    return probs


def brute_spread(graph, seeds, weights):
    return float(brute_probs(graph, seeds, weights).sum())


def simple_paths(graph, seeds):
    """Every simple path (as a node tuple) that starts at a seed and visits
    no other seed, found by testing all node permutations."""
    seed_set = set(seeds)
    others = [v for v in graph.nodes if v not in seed_set]
    edge_set = set(graph.edges)
    paths = []
    for s in seeds:
        for r in range(1, len(others) + 1):
            for tail in itertools.permutations(others, r):
                nodes = (s,) + tail
                if all((a, b) in edge_set for a, b in zip(nodes, nodes[1:])):
                    paths.append(nodes)
    return paths


def brute_relevance(graph, seeds):
    """{v: set of relevant edge indices} from explicit path enumeration."""
    rel = {v: set() for v in graph.nodes if v not in set(seeds)}
    for path in simple_paths(graph, seeds):
        rel[path[-1]].update(graph.edge_id(a, b) for a, b in zip(path, path[1:]))
    return rel


def reference_observation_order(graph, seeds, realization):
    """Breadth-first observation order: sources ascending, then each
    dequeued node's out-neighbours ascending."""
    active = set(seeds)
    queue = sorted(seeds)
    order = []
    head = 0
    while head < len(queue):
        u = queue[head]
        head += 1
        for v in sorted(b for a, b in graph.edges if a == u):
            e = graph.edge_id(u, v)
            order.append((e, int(realization[e])))
            if realization[e] == 1 and v not in active:
                active.add(v)
                queue.append(v)
    return order


def line(n):
    """Forward-only path 1 -> 2 -> ... -> n."""
    return Graph(n, [(i, i + 1) for i in range(1, n)])


def diamond():
    return Graph(4, [(1, 2), (1, 3), (2, 4), (3, 4)])


def small_graphs(max_edges=8, max_nodes=8):
    """Generated topologies with at most ``max_edges`` edges, plus a few
    directed shapes with cycles and reconvergent paths."""
    out = []
    rng = np.random.default_rng(7)
    for kind in ("bar", "star", "ray", "grid", "complete", "line", "random_tree"):
        for L in range(2, max_nodes + 1):
            g = build_topology(kind, L, rng)
            if g.n_edges <= max_edges:
                out.append((f"{kind}{L}", g))
    out.append(("diamond", diamond()))
    out.append(("cycle3", Graph(3, [(1, 2), (2, 3), (3, 1)])))
    out.append(("line4", line(4)))
    out.append(("mixed5", Graph(5, [(1, 2), (2, 3), (3, 1), (3, 4), (1, 4), (4, 5), (5, 2)])))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one "criterion N PASS|FAIL ..." line per acceptance check, echoed at the end
ACCEPTANCE_LINES = []


def record(number, name, ok, detail):
    line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
