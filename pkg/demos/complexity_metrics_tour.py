# Complexity metrics for the stock topologies.
# c_star is the observed-relevance score for the actual weights, c_g its
# worst case over weights (all ones), c_g_zero the zero-weight case, and
# size_bound the crude bound from counting edges and nodes.
import numpy as np

from imlinucb import CapacityError, build_topology, constant_weights, metrics_report, worst_case_metrics

L, K, OMEGA = 7, 1, 0.8

print(f"{'topology':12s} {'|E|':>4s} {'c_star':>8s} {'c_g':>8s} {'c_g0':>6s} {'bound':>8s}")
for kind in ("bar", "star", "ray", "line", "grid", "random_tree", "complete"):
    g = build_topology(kind, L, np.random.default_rng(0))
    rep = metrics_report(g, K, constant_weights(g, OMEGA))
    c_g = "n/a" if rep["c_g"] is None else f"{rep['c_g']:.2f}"
    print(f"{kind:12s} {g.n_edges:4d} {rep['c_star']:8.2f} {c_g:>8s} "
          f"{rep['c_g_zero']:6.2f} {rep['size_bound']:8.2f}")

# dense graphs get expensive fast: the exact scores enumerate simple
# paths, and the enumeration stops with CapacityError past a step budget
try:
    worst_case_metrics(build_topology("complete", 12), K, max_steps=100_000)
except CapacityError as err:
    print(f"\ncomplete L=12: {err}")
