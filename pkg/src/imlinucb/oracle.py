"""Offline influence-maximization oracles: exhaustive search and lazy greedy."""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .cascade import (
    MAX_EXACT_STATES,
    forest_probs_batch,
    singleton_spreads_exact,
    spread_exact,
    spread_mc,
)
from .errors import CapacityError, InvalidArgument
from .graph import Graph, check_weights

#: Largest number of K-subsets the exhaustive oracle will score.
MAX_SEED_SETS = 10**6

# spreads closer than this are treated as ties, broken by node id
_TIE_DIGITS = 12

# CELF switches to batched refreshes after this many stale pops in one step
_BATCH_AFTER = 3
_BATCH_SIZE = 128


@dataclass(frozen=True)
class OracleSpec:
    """Which oracle to call, and the approximation guarantee it declares.

    ``alpha`` is the probability with which the oracle reaches a ``gamma``
    fraction of the optimal spread; regret is scaled by ``alpha * gamma``.
    """

    kind: str = "exact"
    mc_samples: int = 1000
    alpha: float | None = None
    gamma: float | None = None
    spread: str = "auto"

    def __post_init__(self):
        if self.kind not in ("exact", "exact_enum", "greedy"):
            raise InvalidArgument(f"unknown oracle kind {self.kind!r}")
        if self.kind == "exact_enum":
            object.__setattr__(self, "kind", "exact")
        if self.mc_samples < 1:
            raise InvalidArgument("mc_samples must be >= 1")
        if self.spread not in ("auto", "exact", "mc"):
            raise InvalidArgument(f"unknown spread mode {self.spread!r}")
        default_gamma = 1.0 if self.kind == "exact" else 1.0 - 1.0 / math.e
        if self.alpha is None:
            object.__setattr__(self, "alpha", 1.0)
        if self.gamma is None:
            object.__setattr__(self, "gamma", default_gamma)
        for name in ("alpha", "gamma"):
            val = getattr(self, name)
            if not 0.0 < val <= 1.0:
                raise InvalidArgument(f"{name} must lie in (0, 1], got {val}")

    @property
    def eta(self) -> float:
        return self.alpha * self.gamma


class _Spread:
    """Spread evaluator that prefers exact values and falls back to MC."""

    def __init__(self, graph, weights, mode, mc_samples, rng):
        self.graph = graph
        self.w = weights
        self.mode = mode
        self.mc_samples = mc_samples
        self.rng = rng

    def _mc(self, seeds):
        if self.rng is None:
            raise InvalidArgument("Monte-Carlo spreads need an rng")
        return spread_mc(self.graph, seeds, self.w, self.mc_samples, self.rng).mean

    def __call__(self, seeds) -> float:
        if self.mode == "mc":
            return self._mc(seeds)
        try:
            return spread_exact(self.graph, seeds, self.w)
        except CapacityError:
            if self.mode == "exact":
                raise
            return self._mc(seeds)

    @property
    def batched(self) -> bool:
        return self.mode != "mc" and self.graph.is_forest

    def many(self, seed_sets) -> list[float]:
        if self.batched and len(seed_sets) > 1:
            return forest_probs_batch(self.graph, seed_sets, self.w).sum(axis=1).tolist()
        return [self(s) for s in seed_sets]

    def singletons(self) -> np.ndarray:
        if self.mode != "mc":
            try:
                return singleton_spreads_exact(self.graph, self.w)
            except CapacityError:
                if self.mode == "exact":
                    raise
        return np.array([self._mc((v,)) for v in self.graph.nodes])


def _check_k(graph: Graph, k: int) -> int:
    k = int(k)
    if not 1 <= k <= graph.n_nodes:
        raise InvalidArgument(f"K must be in 1..{graph.n_nodes}, got {k}")
    return k


def oracle_exact(graph: Graph, k: int, weights, spread: str = "exact", mc_samples: int = 1000, rng=None) -> tuple[int, ...]:
    """Best seed set of size ``k`` by scoring every ``k``-subset.

    Ties go to the lexicographically smallest set.

    Raises
    ------
    CapacityError
        If there are more than ``MAX_SEED_SETS`` candidate sets.
    """
    k = _check_k(graph, k)
    w = check_weights(graph, weights)
    n_sets = math.comb(graph.n_nodes, k)
    if n_sets > MAX_SEED_SETS:
        raise CapacityError(f"C({graph.n_nodes}, {k}) = {n_sets} seed sets exceeds cap {MAX_SEED_SETS}")
    if k == graph.n_nodes:
        return tuple(graph.nodes)
    f = _Spread(graph, w, spread, mc_samples, rng)
    if k == 1:
        vals = np.round(f.singletons(), _TIE_DIGITS)
        return (int(np.argmax(vals)) + 1,)
    best, best_val = None, -math.inf
    for seeds in itertools.combinations(graph.nodes, k):
        val = round(f(seeds), _TIE_DIGITS)
        if val > best_val:
            best, best_val = seeds, val
    return best


def oracle_greedy(graph: Graph, k: int, weights, mc_samples: int = 1000, rng=None, spread: str = "auto", lazy: bool = True) -> tuple[int, ...]:
    """Greedy seed selection by marginal spread gain.

    With ``lazy=True`` (CELF) cached gains are only recomputed when they
    reach the top of the priority queue; by submodularity this selects the
    same nodes as re-evaluating every gain each step. Ties go to the
    smallest node id. Spreads are exact when under the enumeration cap and
    Monte-Carlo with ``mc_samples`` otherwise (``spread='auto'``).
    """
    k = _check_k(graph, k)
    w = check_weights(graph, weights)
    if mc_samples < 1:
        raise InvalidArgument("mc_samples must be >= 1")
    if k == graph.n_nodes:
        return tuple(graph.nodes)
    f = _Spread(graph, w, spread, mc_samples, rng)
    gains = np.round(f.singletons(), _TIE_DIGITS)
    selected: list[int] = []
    current = 0.0
    if not lazy:
        candidates = set(graph.nodes)
        first = int(np.argmax(gains)) + 1
        selected.append(first)
        candidates.discard(first)
        current = f(selected)
        while len(selected) < k:
            scored = [(-round(f(selected + [v]) - current, _TIE_DIGITS), v) for v in sorted(candidates)]
            _, v = min(scored)
            selected.append(v)
            candidates.discard(v)
            current = f(selected)
        return tuple(sorted(selected))

    heap = [(-g, v, 0) for v, g in zip(graph.nodes, gains.tolist())]
    heapq.heapify(heap)
    stale_pops = 0
    while len(selected) < k:
        neg_gain, v, stamp = heapq.heappop(heap)
        if stamp == len(selected):
            selected.append(v)
            current = f(selected)
            stale_pops = 0
            continue
        stale_pops += 1
        batch = [v]
        if f.batched and stale_pops > _BATCH_AFTER:
            # many stale entries in a row: refresh a block of them together
            while heap and len(batch) < _BATCH_SIZE and heap[0][2] != len(selected):
                batch.append(heapq.heappop(heap)[1])
        values = f.many([selected + [u] for u in batch])
        for u, val in zip(batch, values):
            heapq.heappush(heap, (-round(val - current, _TIE_DIGITS), u, len(selected)))
    return tuple(sorted(selected))


def solve(spec: OracleSpec, graph: Graph, k: int, weights, rng=None) -> tuple[int, ...]:
    """Run the oracle described by ``spec``."""
    if spec.kind == "exact":
        spread = "exact" if spec.spread == "auto" else spec.spread
        return oracle_exact(graph, k, weights, spread=spread, mc_samples=spec.mc_samples, rng=rng)
    return oracle_greedy(graph, k, weights, mc_samples=spec.mc_samples, rng=rng, spread=spec.spread)
