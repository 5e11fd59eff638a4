"""IMLinUCB: optimistic edge weights from a linear model, an IM oracle, and
least-squares updates from edge-level feedback."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cascade import CascadeOutcome, run_cascade
from .errors import InvalidArgument
from .oracle import OracleSpec, solve


@dataclass
class AgentState:
    """Learner statistics.

    Attributes
    ----------
    inv_gram : ndarray (d, d)
        Inverse of ``M = I + sigma^-2 X_t^T X_t`` over all observed edges.
    stat : ndarray (d,)
        ``B = X_t^T Y_t``, feature vectors weighted by realized values.
    sigma, c : float
        Noise scale and confidence-radius multiplier.
    t : int
        Number of completed rounds.
    """

    d: int
    sigma: float
    c: float
    inv_gram: np.ndarray = field(repr=False)
    stat: np.ndarray = field(repr=False)
    t: int = 0

    @property
    def theta(self) -> np.ndarray:
        return self.inv_gram @ self.stat / self.sigma**2

    def copy(self) -> "AgentState":
        return AgentState(self.d, self.sigma, self.c, self.inv_gram.copy(), self.stat.copy(), self.t)


@dataclass(frozen=True)
class UcbWeights:
    values: np.ndarray
    theta: np.ndarray


def _feature_array(features) -> np.ndarray:
    return np.asarray(getattr(features, "X", features), dtype=float)


def _is_identity(features) -> bool:
    # tabular features are the identity; skip the matrix products
    return getattr(features, "kind", None) == "tabular"


def agent_init(d: int, sigma: float = 1.0, c: float = 1.0) -> AgentState:
    if int(d) < 1:
        raise InvalidArgument(f"feature dimension must be >= 1, got {d}")
    if not sigma > 0:
        raise InvalidArgument(f"sigma must be positive, got {sigma}")
    if not c >= 0:
        raise InvalidArgument(f"c must be nonnegative, got {c}")
    d = int(d)
    return AgentState(d, float(sigma), float(c), np.eye(d), np.zeros(d), 0)


def compute_ucb(state: AgentState, features) -> UcbWeights:
    """Optimistic edge weights ``clip(x^T theta + c * sqrt(x^T M^-1 x), 0, 1)``."""
    X = _feature_array(features)
    if X.ndim != 2 or X.shape[1] != state.d:
        raise InvalidArgument(f"features must have {state.d} columns, got shape {X.shape}")
    theta = state.theta
    if _is_identity(features):
        radicand = np.diag(state.inv_gram).copy()
        values = np.clip(theta + state.c * np.sqrt(np.maximum(radicand, 0.0)), 0.0, 1.0)
        return UcbWeights(values, theta)
    radicand = np.einsum("ij,ij->i", X @ state.inv_gram, X)
    # round-off can push x^T M^-1 x slightly below zero
    np.maximum(radicand, 0.0, out=radicand)
    values = np.clip(X @ theta + state.c * np.sqrt(radicand), 0.0, 1.0)
    return UcbWeights(values, theta)


def agent_update(state: AgentState, feedback: CascadeOutcome, features, method: str = "block") -> AgentState:
    """Fold one round of edge feedback into ``state`` (in place) and return it.

    Every observed edge adds ``sigma^-2 x x^T`` to the gram matrix and
    ``x * w(e)`` to the statistic. ``method='sequential'`` applies one
    Sherman-Morrison update per edge; ``method='block'`` applies the whole
    round at once through the Woodbury identity, which is the same sum of
    rank-one terms and much cheaper when many edges are observed.
    """
    X = _feature_array(features)
    s2 = state.sigma**2
    if feedback.observed:
        idx = np.fromiter((e for e, _ in feedback.observed), dtype=np.int64, count=len(feedback.observed))
        vals = np.fromiter((v for _, v in feedback.observed), dtype=float, count=len(feedback.observed))
        Xo = X[idx]
        if method == "block":
            inv = state.inv_gram
            if _is_identity(features):
                MX = inv[:, idx]
                inner = MX[idx]
            else:
                MX = inv @ Xo.T
                inner = Xo @ MX
            inner[np.diag_indices_from(inner)] += s2
            state.inv_gram = inv - MX @ np.linalg.solve(inner, MX.T)
            # keep symmetry exact against drift
            state.inv_gram = 0.5 * (state.inv_gram + state.inv_gram.T)
        elif method == "sequential":
            inv = state.inv_gram
            for x in Xo:
                mx = inv @ x
                inv -= np.outer(mx, mx) / (x @ mx + s2)
        else:
            raise InvalidArgument(f"unknown update method {method!r}")
        state.stat += vals @ Xo
    state.t += 1
    return state


def default_c(d: int, n: int, edge_budget: int, n_nodes: int, k: int, D: float, delta: float | None = None) -> float:
    """Theoretical confidence radius ``sqrt(d log(1 + n E/d) + 2 log(1/delta)) + D``.

    ``delta`` defaults to ``1 / (n (L + 1 - K))``. ``edge_budget`` is
    either the edge count or the effective budget of the ``K`` largest
    weakly connected components.
    """
    if min(d, n, edge_budget, n_nodes, k) <= 0:
        raise InvalidArgument("d, n, edge_budget, L and K must be positive")
    if k > n_nodes:
        raise InvalidArgument("K cannot exceed L")
    if delta is None:
        log_inv_delta = math.log(n * (n_nodes + 1 - k))
    elif 0.0 < delta < 1.0:
        log_inv_delta = -math.log(delta)
    else:
        raise InvalidArgument(f"delta must lie in (0, 1), got {delta}")
    return math.sqrt(d * math.log(1.0 + n * edge_budget / d) + 2.0 * log_inv_delta) + D


def run_round(state: AgentState, graph, k: int, features, oracle: OracleSpec, weights_true, rng, realization=None):
    """One IMLinUCB round: optimistic weights, oracle call, cascade, update.

    Returns ``(state, outcome, seeds)``; ``state`` is updated in place.
    """
    ucb = compute_ucb(state, features)
    seeds = solve(oracle, graph, k, ucb.values, rng)
    outcome = run_cascade(graph, seeds, weights_true, rng, realization)
    agent_update(state, outcome, features)
    return state, outcome, seeds
