"""Edge feature matrices for the linear generalization model."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, LoadError
from .graph import Graph

_NORM_SLACK = 1e-12


@dataclass(frozen=True)
class FeatureMatrix:
    """Edge features, one row per edge in canonical order.

    ``theta_star`` is set when the generating parameter is known; then
    ``rho`` is the worst-case gap ``max_e |w(e) - x_e . theta_star|`` and
    ``D`` the norm of ``theta_star``.
    """

    X: np.ndarray
    theta_star: np.ndarray | None = None
    rho: float | None = None
    D: float | None = None
    kind: str = "custom"

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim != 2:
            raise InvalidArgument("feature matrix must be 2-D")
        norms = np.linalg.norm(X, axis=1)
        if norms.size and norms.max() > 1.0 + 1e-9:
            raise InvalidArgument(f"feature rows must have norm <= 1, max is {norms.max()}")
        X.setflags(write=False)
        object.__setattr__(self, "X", X)

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def n_edges(self) -> int:
        return self.X.shape[0]


def misspecification(X, weights, theta) -> float:
    return float(np.max(np.abs(np.asarray(weights) - np.asarray(X) @ theta))) if len(weights) else 0.0


def tabular_features(graph: Graph, weights=None) -> FeatureMatrix:
    """Identity features: one independent parameter per edge."""
    X = np.eye(graph.n_edges)
    if weights is None:
        return FeatureMatrix(X, kind="tabular")
    theta = np.array(weights, dtype=float)
    return FeatureMatrix(X, theta, misspecification(X, theta, theta), float(np.linalg.norm(theta)), kind="tabular")


def synth_features(weights, d: int, rng) -> FeatureMatrix:
    """Random features on which the weights are exactly linear.

    A unit vector ``theta`` is drawn uniformly on the sphere and each row is
    ``w(e) * theta + z_e`` with ``z_e`` orthogonal to ``theta`` and scaled
    so the row norm is at most one.
    """
    w = np.asarray(weights, dtype=float)
    if d < 2:
        raise InvalidArgument("synthetic features need d >= 2")
    if w.size and (w.min() < 0 or w.max() > 1):
        raise InvalidArgument("weights must lie in [0, 1]")
    gen = np.random.default_rng(rng)
    theta = gen.standard_normal(d)
    theta /= np.linalg.norm(theta)
    Z = gen.standard_normal((w.size, d))
    Z -= np.outer(Z @ theta, theta)
    z_norm = np.linalg.norm(Z, axis=1)
    # target orthogonal length, uniform in the room left by the w(e) component
    room = np.sqrt(np.clip(1.0 - w**2, 0.0, None))
    length = room * gen.random(w.size)
    scale = np.divide(length, z_norm, out=np.zeros_like(z_norm), where=z_norm > 0)
    X = np.outer(w, theta) + Z * scale[:, None]
    norms = np.linalg.norm(X, axis=1)
    over = norms > 1.0
    if np.any(over):
        # only reachable through round-off; shrink the orthogonal part only
        X[over] = np.outer(w[over], theta) + Z[over] * (scale[over] * (1.0 - _NORM_SLACK))[:, None]
    return FeatureMatrix(X, theta, misspecification(X, w, theta), 1.0, kind="synthetic")


def edge_features_from_nodes(graph: Graph, node_features) -> FeatureMatrix:
    """Edge rows as the element-wise product of the two endpoint features,
    divided by the largest row norm so every row has norm at most one."""
    U = np.asarray(node_features, dtype=float)
    if U.ndim != 2 or U.shape[0] != graph.n_nodes:
        raise InvalidArgument(f"need one feature row per node ({graph.n_nodes}), got shape {U.shape}")
    X = U[graph.starts - 1] * U[graph.ends - 1]
    norms = np.linalg.norm(X, axis=1)
    top = norms.max() if norms.size else 0.0
    if top > 0:
        X = X / top
    return FeatureMatrix(X, kind="node_product")


def load_node_features(path, n_nodes: int | None = None) -> np.ndarray:
    """Read ``node_id v1 ... vd`` lines into an (L, d) array (row ``id-1``)."""
    rows: dict[int, list[float]] = {}
    width = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            try:
                node = int(parts[0])
                vals = [float(x) for x in parts[1:]]
            except ValueError:
                raise LoadError(f"cannot parse {text!r}", path, lineno) from None
            if not vals:
                raise LoadError("node has no feature values", path, lineno)
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise LoadError(f"expected {width} values, got {len(vals)}", path, lineno)
            if node in rows:
                raise LoadError(f"duplicate node {node}", path, lineno)
            rows[node] = vals
    if not rows:
        raise LoadError("no node features found", path)
    L = n_nodes if n_nodes is not None else max(rows)
    missing = [v for v in range(1, L + 1) if v not in rows]
    if missing:
        raise InvalidArgument(f"node features missing for nodes {missing[:5]}")
    return np.array([rows[v] for v in range(1, L + 1)])
