"""Topology- and weight-dependent complexity quantities: relevance counts,
observation probabilities, maximum observed relevance and its bounds."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .cascade import influence_probs_exact, influence_probs_mc
from .errors import CapacityError, InvalidArgument
from .graph import MAX_PATH_STEPS, Graph, PathBudget, check_seed_set, check_weights, relevance_map
from .oracle import MAX_SEED_SETS, oracle_greedy


@dataclass(frozen=True)
class RelevanceProfile:
    """Per-edge relevance counts ``N`` and observation probabilities ``P``
    for one seed set."""

    seeds: tuple
    N: np.ndarray
    P: np.ndarray

    @property
    def score(self) -> float:
        return math.sqrt(float(np.sum(self.N.astype(float) ** 2 * self.P)))


@dataclass(frozen=True)
class MaxRelevance:
    value: float
    seeds: tuple
    lower_bound: bool


def relevance_counts(graph: Graph, sources, budget: PathBudget | None = None) -> np.ndarray:
    """Number of non-source nodes each edge is relevant to (length ``|E|``)."""
    counts = np.zeros(graph.n_edges, dtype=np.int64)
    for edges in relevance_map(graph, sources, budget).values():
        if edges:
            counts[list(edges)] += 1
    return counts


def relevance_count(graph: Graph, sources, edge: int) -> int:
    if not 0 <= edge < graph.n_edges:
        raise InvalidArgument(f"edge index {edge} out of range")
    return int(relevance_counts(graph, sources)[edge])


def observation_probs(graph: Graph, sources, weights, mode: str = "exact", samples: int = 10_000, rng=None) -> np.ndarray:
    """Probability that each edge is observed, i.e. that its start node is
    influenced. ``mode='mc'`` estimates it from ``samples`` cascades."""
    seeds = check_seed_set(graph, sources)
    w = check_weights(graph, weights)
    if mode == "exact":
        node_p = influence_probs_exact(graph, seeds, w)
    elif mode == "mc":
        node_p = influence_probs_mc(graph, seeds, w, samples, np.random.default_rng(rng))
    else:
        raise InvalidArgument(f"unknown probability mode {mode!r}")
    return node_p[graph.starts - 1]


def observation_prob(graph: Graph, sources, edge: int, weights, mode: str = "exact", samples: int = 10_000, rng=None) -> float:
    if not 0 <= edge < graph.n_edges:
        raise InvalidArgument(f"edge index {edge} out of range")
    return float(observation_probs(graph, sources, weights, mode, samples, rng)[edge])


def relevance_profile(
    graph: Graph, sources, weights, mode: str = "exact", samples: int = 10_000, rng=None, budget: PathBudget | None = None
) -> RelevanceProfile:
    seeds = check_seed_set(graph, sources)
    return RelevanceProfile(
        seeds,
        relevance_counts(graph, seeds, budget),
        observation_probs(graph, seeds, weights, mode, samples, rng),
    )


def _all_seed_sets(graph: Graph, k: int):
    if not 1 <= k <= graph.n_nodes:
        raise InvalidArgument(f"K must be in 1..{graph.n_nodes}, got {k}")
    n_sets = math.comb(graph.n_nodes, k)
    if n_sets > MAX_SEED_SETS:
        raise CapacityError(
            f"C({graph.n_nodes}, {k}) = {n_sets} seed sets exceeds cap {MAX_SEED_SETS}; use sampled mode"
        )
    return itertools.combinations(graph.nodes, k)


def max_observed_relevance(
    graph: Graph,
    k: int,
    weights,
    mode: str = "exact",
    n_sets: int = 100,
    prob_mode: str = "exact",
    samples: int = 10_000,
    rng=None,
    max_steps: int = 10 * MAX_PATH_STEPS,
) -> MaxRelevance:
    """Maximum over seed sets of ``sqrt(sum_e N_e^2 P_e)``.

    ``mode='exact'`` scores every ``k``-subset. ``mode='sampled'`` scores
    ``n_sets`` uniformly drawn subsets plus the greedy seed set and reports
    the result as a lower bound. ``max_steps`` caps the total path
    enumeration work across all scored sets.
    """
    w = check_weights(graph, weights)
    budget = PathBudget(max_steps)
    gen = np.random.default_rng(rng)
    if mode == "exact":
        candidates = list(_all_seed_sets(graph, k))
    elif mode == "sampled":
        if not 1 <= k <= graph.n_nodes:
            raise InvalidArgument(f"K must be in 1..{graph.n_nodes}, got {k}")
        candidates = {tuple(sorted(gen.choice(graph.n_nodes, size=k, replace=False) + 1)) for _ in range(n_sets)}
        candidates.add(oracle_greedy(graph, k, w, mc_samples=max(1, samples // 10), rng=gen))
        candidates = sorted(candidates)
    else:
        raise InvalidArgument(f"unknown mode {mode!r}")
    best, best_seeds = -1.0, None
    for seeds in candidates:
        score = relevance_profile(graph, seeds, w, prob_mode, samples, gen, budget).score
        if score > best + 1e-12:
            best, best_seeds = score, tuple(int(s) for s in seeds)
    return MaxRelevance(best, best_seeds, mode != "exact")


def worst_case_metrics(graph: Graph, k: int, max_steps: int = 10 * MAX_PATH_STEPS) -> tuple[float, float, float]:
    """``(C_G, C_G_zero, (L - K) sqrt(|E|))``.

    ``C_G`` treats every edge as observed; ``C_G_zero`` keeps only edges
    leaving the seed set, the limit when all weights go to zero.
    """
    budget = PathBudget(max_steps)
    c_g = c_g0 = 0.0
    for seeds in _all_seed_sets(graph, k):
        n_sq = relevance_counts(graph, seeds, budget).astype(float) ** 2
        c_g = max(c_g, math.sqrt(n_sq.sum()))
        from_seeds = np.isin(graph.starts, seeds)
        c_g0 = max(c_g0, math.sqrt(n_sq[from_seeds].sum()))
    return c_g, c_g0, (graph.n_nodes - k) * math.sqrt(graph.n_edges)


def effective_edge_budget(graph: Graph, k: int) -> int:
    """Edges in the ``min(m, K)`` weakly connected components with most edges."""
    sizes = sorted((n_e for _, n_e in graph.weak_components()), reverse=True)
    return int(sum(sizes[:k]))


def metrics_report(graph: Graph, k: int, weights, mode: str = "auto", n_sets: int = 100, samples: int = 10_000, rng=None) -> dict:
    """Complexity report with keys ``c_star``, ``c_star_is_lower_bound``,
    ``c_g``, ``c_g_zero``, ``size_bound`` and ``e_star``.

    In ``auto`` mode exact quantities are used where the enumeration caps
    allow; otherwise ``C*`` falls back to the sampled lower bound and the
    worst-case values are reported as ``None``.
    """
    w = check_weights(graph, weights)
    if mode not in ("auto", "exact", "sampled"):
        raise InvalidArgument(f"unknown mode {mode!r}")
    exact_sets = mode != "sampled" and math.comb(graph.n_nodes, k) <= MAX_SEED_SETS
    c_g = c_g0 = None
    if exact_sets:
        try:
            c_g, c_g0, _ = worst_case_metrics(graph, k)
        except CapacityError:
            if mode == "exact":
                raise
            exact_sets = False
    if mode == "exact":
        attempts = [("exact", "exact")]
    elif exact_sets:
        attempts = [("exact", "exact"), ("sampled", "exact"), ("sampled", "mc")]
    else:
        attempts = [("sampled", "exact"), ("sampled", "mc")]
    for i, (star_mode, prob_mode) in enumerate(attempts):
        try:
            res = max_observed_relevance(graph, k, w, star_mode, n_sets, prob_mode, samples, rng)
            break
        except CapacityError:
            if i == len(attempts) - 1:
                raise
    return {
        "c_star": res.value,
        "c_star_is_lower_bound": res.lower_bound,
        "c_star_seeds": list(res.seeds),
        "c_g": c_g,
        "c_g_zero": c_g0,
        "size_bound": (graph.n_nodes - k) * math.sqrt(graph.n_edges),
        "e_star": effective_edge_budget(graph, k),
    }
